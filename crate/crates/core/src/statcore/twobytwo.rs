use super::kernels::{chi2_upper, log_binom};
use crate::dgp::TwoByTwoTable;

/// Relative tolerance when deciding whether a table is at most as probable as
/// the observed one in the two-sided Fisher test.
pub const FISHER_RELATIVE_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquared {
    pub statistic: f64,
    pub p_value: f64,
}

/// Sample log odds ratio and its Woolf standard error; `None` when any cell
/// is zero. For a single binary covariate this is the logistic-regression MLE.
pub fn log_odds_ratio(t: &TwoByTwoTable) -> Option<(f64, f64)> {
    if !t.all_cells_positive() {
        return None;
    }
    let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
    let log_or = ((a * d) / (b * c)).ln();
    let se = (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt();
    Some((log_or, se))
}

/// Uncorrected Pearson chi-squared on one degree of freedom.
pub fn pearson_chi2(t: &TwoByTwoTable) -> Option<ChiSquared> {
    if !t.all_margins_positive() {
        return None;
    }
    let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
    let n = t.total() as f64;
    let cross = a * d - b * c;
    let denom = t.n1() as f64 * t.n0() as f64 * t.events() as f64 * t.non_events() as f64;
    let statistic = n * cross * cross / denom;
    Some(ChiSquared { statistic, p_value: chi2_upper(statistic, 1.0) })
}

/// The 'N-1' chi-squared: Pearson's statistic scaled by (N-1)/N.
pub fn adjusted_chi2(t: &TwoByTwoTable) -> Option<ChiSquared> {
    let pearson = pearson_chi2(t)?;
    let n = t.total() as f64;
    let statistic = pearson.statistic * (n - 1.0) / n;
    Some(ChiSquared { statistic, p_value: chi2_upper(statistic, 1.0) })
}

/// Two-sided Fisher exact test conditioning on both margins.
///
/// Sums the hypergeometric probabilities of every table whose probability is
/// at most that of the observed table (with a relative slack of 1e-7).
/// `None` when a margin is zero.
pub fn fisher_exact(t: &TwoByTwoTable) -> Option<f64> {
    if !t.all_margins_positive() {
        return None;
    }
    let n1 = t.n1();
    let n0 = t.n0();
    let events = t.events();
    let total = t.total();
    let lo = events.saturating_sub(n0);
    let hi = events.min(n1);
    let ln_denom = log_binom(total, events);
    let ln_prob = |x: u64| log_binom(n1, x) + log_binom(n0, events - x) - ln_denom;

    let observed = ln_prob(t.a);
    let cutoff = observed + FISHER_RELATIVE_SLACK.ln_1p();
    let mut p = 0.0;
    for x in lo..=hi {
        let lp = ln_prob(x);
        if lp <= cutoff {
            p += lp.exp();
        }
    }
    Some(p.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tab(a: u64, b: u64, c: u64, d: u64) -> TwoByTwoTable {
        TwoByTwoTable::new(a, b, c, d)
    }

    #[test]
    fn woolf_example() {
        let (lor, se) = log_odds_ratio(&tab(10, 40, 5, 45)).unwrap();
        assert!((lor - 2.25_f64.ln()).abs() < 1e-15);
        assert!((se - 0.589_255_650_988_789_6).abs() < 1e-12);
        assert_eq!(log_odds_ratio(&tab(5, 45, 5, 45)).unwrap().0, 0.0);
        assert!(log_odds_ratio(&tab(0, 50, 5, 45)).is_none());
        assert!(log_odds_ratio(&tab(5, 0, 5, 45)).is_none());
    }

    #[test]
    fn pearson_examples() {
        let x = pearson_chi2(&tab(25, 25, 25, 25)).unwrap();
        assert_eq!(x.statistic, 0.0);
        assert_eq!(x.p_value, 1.0);
        let x = pearson_chi2(&tab(10, 40, 5, 45)).unwrap();
        assert!((x.statistic - 100.0 * 250.0_f64.powi(2) / (50.0 * 50.0 * 15.0 * 85.0)).abs() < 1e-12);
        assert!((x.statistic - 1.9608).abs() < 1e-4);
        assert!((x.p_value - 0.161_429_462_367_079_22).abs() < 1e-12);
        assert!(pearson_chi2(&tab(0, 50, 0, 50)).is_none());
        assert!(pearson_chi2(&tab(0, 0, 3, 50)).is_none());
    }

    #[test]
    fn adjusted_examples() {
        let x = adjusted_chi2(&tab(10, 40, 5, 45)).unwrap();
        let p = pearson_chi2(&tab(10, 40, 5, 45)).unwrap();
        assert!((x.statistic - p.statistic * 0.99).abs() < 1e-14);
        assert!((x.statistic - 1.9412).abs() < 1e-4);
        assert_eq!(adjusted_chi2(&tab(25, 25, 25, 25)).unwrap().statistic, 0.0);
    }

    #[test]
    fn fisher_examples() {
        let p = fisher_exact(&tab(3, 1, 1, 3)).unwrap();
        assert!((p - 34.0 / 70.0).abs() < 1e-14);
        assert!((fisher_exact(&tab(2, 2, 2, 2)).unwrap() - 1.0).abs() < 1e-12);
        assert!(fisher_exact(&tab(0, 5, 0, 7)).is_none());
    }

    proptest! {
        #[test]
        fn adjusted_is_strictly_smaller(a in 0u64..60, b in 0u64..60, c in 0u64..60, d in 0u64..60) {
            let t = tab(a, b, c, d);
            if let (Some(p), Some(adj)) = (pearson_chi2(&t), adjusted_chi2(&t)) {
                if p.statistic > 0.0 {
                    prop_assert!(adj.statistic < p.statistic);
                }
            }
        }

        #[test]
        fn symmetric_under_swaps(a in 0u64..40, b in 0u64..40, c in 0u64..40, d in 0u64..40) {
            let t = tab(a, b, c, d);
            let both = t.swap_rows().swap_columns();
            prop_assert_eq!(pearson_chi2(&t), pearson_chi2(&both));
            let f = fisher_exact(&t);
            for other in [t.swap_rows(), t.swap_columns(), both] {
                match (f, fisher_exact(&other)) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                    (x, y) => prop_assert_eq!(x.is_none(), y.is_none()),
                }
            }
        }

        #[test]
        fn fisher_p_in_unit_interval(a in 0u64..80, b in 0u64..80, c in 0u64..80, d in 0u64..80) {
            if let Some(p) = fisher_exact(&tab(a, b, c, d)) {
                prop_assert!(p > 0.0 && p <= 1.0);
            }
        }

        #[test]
        fn moving_into_the_tail_never_raises_fisher_p(
            n1 in 2u64..40, n0 in 2u64..40, events in 1u64..40, shift in 0u64..40,
        ) {
            let events = events.min(n1 + n0 - 1);
            let lo = events.saturating_sub(n0);
            let hi = events.min(n1);
            // Hypergeometric mode; beyond it point probabilities fall monotonically.
            let mode = (n1 + 1) * (events + 1) / (n1 + n0 + 2);
            let a = (lo + shift).min(hi);
            if a >= mode && a < hi {
                let t = tab(a, n1 - a, events - a, n0 + a - events);
                let next = tab(a + 1, n1 - a - 1, events - a - 1, n0 + a + 1 - events);
                let (p, q) = (fisher_exact(&t).unwrap(), fisher_exact(&next).unwrap());
                prop_assert!(q <= p * (1.0 + 1e-12));
            }
        }
    }
}
