//! Analysis methods applied to the truncated analysis set.

pub mod kernels;
pub mod profile;
pub mod ttest;
pub mod twobytwo;

pub use profile::{profile_ci, profile_deviance, ProfileError};
pub use ttest::{mean_diff_ttest, ContinuousEstimate, TTest};
pub use twobytwo::{adjusted_chi2, fisher_exact, log_odds_ratio, pearson_chi2, ChiSquared};

use crate::dgp::TwoByTwoTable;

/// Sample odds ratio with its Wald SE and profile-likelihood interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsRatioFit {
    pub log_or: f64,
    pub wald_se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Everything computed for one binary trial. Each `None` is an inestimable or
/// incalculable result and is counted as missing downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryEstimate {
    pub table: TwoByTwoTable,
    pub odds_ratio: Option<OddsRatioFit>,
    pub chi2: Option<ChiSquared>,
    pub chi2_adj: Option<ChiSquared>,
    pub fisher_p: Option<f64>,
}

impl BinaryEstimate {
    pub fn or_estimable(&self) -> bool {
        self.odds_ratio.is_some()
    }

    pub fn chi2_calculable(&self) -> bool {
        self.chi2.is_some()
    }

    pub fn fisher_calculable(&self) -> bool {
        self.fisher_p.is_some()
    }
}

/// Runs every binary analysis on one table.
pub fn analyse_binary(table: &TwoByTwoTable, conf: f64) -> Result<BinaryEstimate, ProfileError> {
    let odds_ratio = match log_odds_ratio(table) {
        Some((log_or, wald_se)) => {
            let (ci_low, ci_high) = profile_ci(table, conf)?;
            Some(OddsRatioFit { log_or, wald_se, ci_low, ci_high })
        }
        None => None,
    };
    Ok(BinaryEstimate {
        table: *table,
        odds_ratio,
        chi2: pearson_chi2(table),
        chi2_adj: adjusted_chi2(table),
        fisher_p: fisher_exact(table),
    })
}
