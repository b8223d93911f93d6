use super::kernels::{t_quantile, t_two_sided};
use crate::dgp::AnalysisSet;

/// Pooled-variance two-sample t-test result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    /// Treatment mean minus control mean.
    pub diff: f64,
    pub se: f64,
    pub t_stat: f64,
    pub df: u64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousEstimate {
    pub n1: u64,
    pub n0: u64,
    /// `None` when an arm is empty, there are fewer than three survivors in
    /// total, or the pooled variance is zero.
    pub fit: Option<TTest>,
}

impl ContinuousEstimate {
    pub fn estimable(&self) -> bool {
        self.fit.is_some()
    }
}

fn mean_and_ss(xs: &[f64]) -> (f64, f64) {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss)
}

pub fn mean_diff_ttest(set: &AnalysisSet, conf: f64) -> ContinuousEstimate {
    let (n1, n0) = (set.n1() as u64, set.n0() as u64);
    let mut est = ContinuousEstimate { n1, n0, fit: None };
    if n1 == 0 || n0 == 0 || n1 + n0 < 3 {
        return est;
    }
    let (m1, ss1) = mean_and_ss(&set.treated);
    let (m0, ss0) = mean_and_ss(&set.control);
    let df = n1 + n0 - 2;
    let pooled_var = (ss1 + ss0) / df as f64;
    if pooled_var.is_nan() || pooled_var <= 0.0 {
        return est;
    }
    let diff = m1 - m0;
    let se = (pooled_var * (1.0 / n1 as f64 + 1.0 / n0 as f64)).sqrt();
    let t_stat = diff / se;
    let p_value = t_two_sided(t_stat, df as f64);
    let half_width = t_quantile(df as f64, 1.0 - 0.5 * (1.0 - conf)) * se;
    est.fit = Some(TTest {
        diff,
        se,
        t_stat,
        df,
        p_value,
        ci_low: diff - half_width,
        ci_high: diff + half_width,
    });
    est
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(t: &[f64], c: &[f64]) -> AnalysisSet {
        AnalysisSet { treated: t.to_vec(), control: c.to_vec() }
    }

    #[test]
    fn identical_constant_groups_are_inestimable() {
        // Zero pooled variance: t is undefined.
        let est = mean_diff_ttest(&set(&[5.0; 3], &[5.0; 3]), 0.95);
        assert!(!est.estimable());
    }

    #[test]
    fn identical_groups_give_null_test() {
        let est = mean_diff_ttest(&set(&[4.0, 5.0, 6.0], &[4.0, 5.0, 6.0]), 0.95);
        let fit = est.fit.unwrap();
        assert_eq!(fit.diff, 0.0);
        assert_eq!(fit.t_stat, 0.0);
        assert_eq!(fit.p_value, 1.0);
    }

    #[test]
    fn worked_example() {
        let fit = mean_diff_ttest(&set(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]), 0.95).fit.unwrap();
        assert_eq!(fit.diff, 3.0);
        assert_eq!(fit.df, 4);
        assert!((fit.se - (2.0_f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((fit.t_stat - 3.674_234_614_174_767).abs() < 1e-12);
        assert!((fit.p_value - 0.021_311_641_128_756_727).abs() < 1e-10);
        assert!((fit.ci_low - 0.733_042_064_472_476_9).abs() < 1e-9);
        assert!((fit.ci_high - 5.266_957_935_527_524).abs() < 1e-9);
    }

    #[test]
    fn small_arms() {
        // A single survivor in one arm still has a pooled variance from the other.
        let fit = mean_diff_ttest(&set(&[1.0], &[2.0, 4.0]), 0.95).fit.unwrap();
        assert_eq!(fit.df, 1);
        assert_eq!(fit.diff, -2.0);
        assert!((fit.se - (2.0_f64 * 1.5).sqrt()).abs() < 1e-15);
        let est = mean_diff_ttest(&set(&[1.0], &[2.0]), 0.95);
        assert!(!est.estimable());
        assert_eq!((est.n1, est.n0), (1, 1));
        assert!(!mean_diff_ttest(&set(&[], &[1.0, 2.0, 3.0]), 0.95).estimable());
        assert!(!mean_diff_ttest(&set(&[], &[]), 0.95).estimable());
    }

    proptest! {
        #[test]
        fn negation_flips_sign_and_keeps_p(
            t in prop::collection::vec(-1e4f64..1e4, 2..30),
            c in prop::collection::vec(-1e4f64..1e4, 2..30),
        ) {
            let a = mean_diff_ttest(&set(&t, &c), 0.95);
            let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
            let b = mean_diff_ttest(&set(&neg(&t), &neg(&c)), 0.95);
            if let (Some(fa), Some(fb)) = (a.fit, b.fit) {
                prop_assert_eq!(fa.diff, -fb.diff);
                prop_assert_eq!(fa.t_stat, -fb.t_stat);
                prop_assert_eq!(fa.p_value, fb.p_value);
                prop_assert!(fa.ci_low <= fa.diff && fa.diff <= fa.ci_high);
            }
        }
    }
}
