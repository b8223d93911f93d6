//! Performance measures aggregated over a scenario's iterations.

use crate::engine::{Estimate, IterationResult};
use crate::scenario::{true_estimand, OutcomeKind, Scenario};

pub const SIGNIFICANCE: f64 = 0.05;

/// A proportion with its Monte Carlo SE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub mcse: f64,
    pub denominator: u64,
}

impl Rate {
    fn from_counts(hits: u64, denominator: u64) -> Option<Self> {
        if denominator == 0 {
            return None;
        }
        let value = hits as f64 / denominator as f64;
        let mcse = if hits == 0 || hits == denominator {
            0.0
        } else {
            (value * (1.0 - value) / denominator as f64).sqrt()
        };
        Some(Self { value, mcse, denominator })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceSummary {
    pub scenario: Scenario,
    pub n_iterations: u64,
    /// Iterations with an estimate: the t-test fit (continuous) or the odds
    /// ratio (binary).
    pub n_estimable: u64,
    pub n_chi2_calculable: Option<u64>,
    pub n_fisher_calculable: Option<u64>,
    pub bias: Option<f64>,
    pub bias_mcse: Option<f64>,
    pub emp_se: Option<f64>,
    pub mod_se: Option<f64>,
    pub coverage: Option<Rate>,
    pub reject_t: Option<Rate>,
    pub reject_chi2: Option<Rate>,
    pub reject_chi2_adj: Option<Rate>,
    pub reject_fisher: Option<Rate>,
    /// exp(bias) of the log odds ratio; binary only.
    pub ror: Option<f64>,
}

impl PerformanceSummary {
    pub fn kind(&self) -> OutcomeKind {
        self.scenario.kind()
    }

    pub fn n_missing(&self) -> u64 {
        self.n_iterations - self.n_estimable
    }

    pub fn missing_fraction(&self) -> f64 {
        self.n_missing() as f64 / self.n_iterations as f64
    }

    pub fn chi2_missing_fraction(&self) -> Option<f64> {
        self.n_chi2_calculable
            .map(|c| (self.n_iterations - c) as f64 / self.n_iterations as f64)
    }

    /// Fewer than two estimable iterations: no empirical SE.
    pub fn is_degenerate(&self) -> bool {
        self.n_estimable < 2
    }
}

struct Point {
    estimate: f64,
    se: f64,
    covers: bool,
}

/// Aggregates `results`, all of which must belong to `s`.
///
/// Each measure uses its own denominator: estimate-based measures are over
/// estimable iterations, each test over its calculable iterations.
pub fn summarize(results: &[IterationResult], s: &Scenario) -> PerformanceSummary {
    let truth = true_estimand(s);
    let mut points = Vec::with_capacity(results.len());
    let mut t_rejects = (0u64, 0u64);
    let mut chi2 = (0u64, 0u64);
    let mut chi2_adj = (0u64, 0u64);
    let mut fisher = (0u64, 0u64);
    let reject = |acc: &mut (u64, u64), p: Option<f64>| {
        if let Some(p) = p {
            acc.1 += 1;
            if p < SIGNIFICANCE {
                acc.0 += 1;
            }
        }
    };

    for r in results {
        match &r.estimate {
            Estimate::Continuous(est) => {
                assert_eq!(s.kind(), OutcomeKind::Continuous, "result kind does not match scenario");
                if let Some(fit) = est.fit {
                    points.push(Point {
                        estimate: fit.diff,
                        se: fit.se,
                        covers: fit.ci_low <= truth && truth <= fit.ci_high,
                    });
                    reject(&mut t_rejects, Some(fit.p_value));
                }
            }
            Estimate::Binary(est) => {
                assert_eq!(s.kind(), OutcomeKind::Binary, "result kind does not match scenario");
                if let Some(fit) = est.odds_ratio {
                    points.push(Point {
                        estimate: fit.log_or,
                        se: fit.wald_se,
                        covers: fit.ci_low <= truth && truth <= fit.ci_high,
                    });
                }
                reject(&mut chi2, est.chi2.map(|x| x.p_value));
                reject(&mut chi2_adj, est.chi2_adj.map(|x| x.p_value));
                reject(&mut fisher, est.fisher_p);
            }
        }
    }

    let e = points.len() as u64;
    let ef = e as f64;
    let bias = (e > 0).then(|| points.iter().map(|p| p.estimate - truth).sum::<f64>() / ef);
    let emp_se = (e >= 2).then(|| {
        let mean = points.iter().map(|p| p.estimate).sum::<f64>() / ef;
        let ss: f64 = points.iter().map(|p| (p.estimate - mean).powi(2)).sum();
        (ss / (ef - 1.0)).sqrt()
    });
    let mod_se = (e > 0).then(|| (points.iter().map(|p| p.se * p.se).sum::<f64>() / ef).sqrt());
    let covered = points.iter().filter(|p| p.covers).count() as u64;

    let binary = s.kind() == OutcomeKind::Binary;
    PerformanceSummary {
        scenario: s.clone(),
        n_iterations: results.len() as u64,
        n_estimable: e,
        n_chi2_calculable: binary.then_some(chi2.1),
        n_fisher_calculable: binary.then_some(fisher.1),
        bias,
        bias_mcse: emp_se.map(|sd| sd / ef.sqrt()),
        emp_se,
        mod_se,
        coverage: Rate::from_counts(covered, e),
        reject_t: if binary { None } else { Rate::from_counts(t_rejects.0, t_rejects.1) },
        reject_chi2: if binary { Rate::from_counts(chi2.0, chi2.1) } else { None },
        reject_chi2_adj: if binary { Rate::from_counts(chi2_adj.0, chi2_adj.1) } else { None },
        reject_fisher: if binary { Rate::from_counts(fisher.0, fisher.1) } else { None },
        ror: if binary { bias.map(f64::exp) } else { None },
    }
}

/// Keeps only null-effect scenarios, whose rejection rates are Type-1 errors.
pub fn type1_slice(summaries: &[PerformanceSummary]) -> Vec<PerformanceSummary> {
    summaries.iter().filter(|s| s.scenario.is_null_effect()).cloned().collect()
}
