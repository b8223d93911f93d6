//! Profile-likelihood interval for the log odds ratio of a 2x2 table.
//!
//! The model is the saturated two-parameter logistic regression: control
//! log-odds `alpha`, treatment log-odds `alpha + beta`. For each candidate
//! `beta` the intercept is maximized out, and the interval endpoints are where
//! the profile deviance reaches the chi-squared(1) critical value.

use thiserror::Error;

use super::kernels::chi2_1_quantile;
use super::twobytwo::log_odds_ratio;
use crate::dgp::TwoByTwoTable;

/// Bracket half-widths start at this many Wald SEs and double.
const INITIAL_BRACKET_SE: f64 = 2.0;
/// Give up once the bracket would exceed this many Wald SEs.
const MAX_BRACKET_SE: f64 = 1e3;
/// Bisection stops when the bracket is narrower than this (in beta).
/// Tighter than the 1e-8 contract so the deviance at the root is accurate too.
const ROOT_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("table {0:?} has a zero cell; the profile interval is undefined")]
    Inestimable(TwoByTwoTable),
    #[error("could not bracket the {side} profile bound for table {table:?} within {limit} Wald SEs")]
    Bracketing { table: TwoByTwoTable, side: &'static str, limit: f64 },
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    crate::dgp::logistic(x)
}

/// Grouped binomial log-likelihood of the 2x2 logistic model.
#[derive(Debug, Clone, Copy)]
pub struct TableLikelihood {
    a: f64,
    n1: f64,
    c: f64,
    n0: f64,
}

impl TableLikelihood {
    pub fn new(t: &TwoByTwoTable) -> Self {
        Self { a: t.a as f64, n1: t.n1() as f64, c: t.c as f64, n0: t.n0() as f64 }
    }

    pub fn log_lik(&self, alpha: f64, beta: f64) -> f64 {
        self.c * alpha - self.n0 * softplus(alpha) + self.a * (alpha + beta)
            - self.n1 * softplus(alpha + beta)
    }

    fn score_alpha(&self, alpha: f64, beta: f64) -> f64 {
        self.c - self.n0 * sigmoid(alpha) + self.a - self.n1 * sigmoid(alpha + beta)
    }

    fn info_alpha(&self, alpha: f64, beta: f64) -> f64 {
        let p0 = sigmoid(alpha);
        let p1 = sigmoid(alpha + beta);
        self.n0 * p0 * (1.0 - p0) + self.n1 * p1 * (1.0 - p1)
    }

    /// Intercept maximizing the likelihood at fixed `beta`. Requires every
    /// cell to be positive, which places the root between the two per-arm
    /// solutions.
    pub fn profile_alpha(&self, beta: f64) -> f64 {
        let from_control = (self.c / (self.n0 - self.c)).ln();
        let from_treated = (self.a / (self.n1 - self.a)).ln() - beta;
        let (mut lo, mut hi) = if from_control <= from_treated {
            (from_control, from_treated)
        } else {
            (from_treated, from_control)
        };
        if hi - lo == 0.0 {
            return lo;
        }
        // Score is decreasing in alpha; safeguarded Newton inside [lo, hi].
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let s = self.score_alpha(x, beta);
            if s == 0.0 {
                return x;
            }
            if s > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = x + s / self.info_alpha(x, beta);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-14 * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }

    pub fn profile_log_lik(&self, beta: f64) -> f64 {
        self.log_lik(self.profile_alpha(beta), beta)
    }
}

/// Profile deviance `2 [l(beta_hat) - max_alpha l(beta, alpha)]`.
pub fn profile_deviance(t: &TwoByTwoTable, beta: f64) -> Option<f64> {
    let (beta_hat, _) = log_odds_ratio(t)?;
    let lik = TableLikelihood::new(t);
    Some(2.0 * (lik.profile_log_lik(beta_hat) - lik.profile_log_lik(beta)))
}

/// Profile-likelihood confidence interval for the log odds ratio.
pub fn profile_ci(t: &TwoByTwoTable, conf: f64) -> Result<(f64, f64), ProfileError> {
    let (beta_hat, wald_se) = log_odds_ratio(t).ok_or(ProfileError::Inestimable(*t))?;
    let lik = TableLikelihood::new(t);
    let max_ll = lik.profile_log_lik(beta_hat);
    let target = chi2_1_quantile(conf);
    let excess = |beta: f64| 2.0 * (max_ll - lik.profile_log_lik(beta)) - target;

    let bound = |direction: f64, side: &'static str| -> Result<f64, ProfileError> {
        let mut k = INITIAL_BRACKET_SE;
        let mut inner = beta_hat;
        let mut outer = beta_hat + direction * k * wald_se;
        while excess(outer) < 0.0 {
            k *= 2.0;
            if k > MAX_BRACKET_SE {
                return Err(ProfileError::Bracketing { table: *t, side, limit: MAX_BRACKET_SE });
            }
            inner = outer;
            outer = beta_hat + direction * k * wald_se;
        }
        while (outer - inner).abs() > ROOT_TOLERANCE {
            let mid = 0.5 * (inner + outer);
            if mid == inner || mid == outer {
                break;
            }
            if excess(mid) < 0.0 {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        Ok(0.5 * (inner + outer))
    };

    Ok((bound(-1.0, "lower")?, bound(1.0, "upper")?))
}
