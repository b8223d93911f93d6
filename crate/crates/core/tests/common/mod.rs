//! Independent reference implementations shared by the integration tests and
//! the acceptance runner. Nothing here calls into the code it checks, apart
//! from the counter-based stream used as a source of random tables.

#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use truncsim::dgp::TwoByTwoTable;
use truncsim::statcore::kernels::{chi2_upper, log_binom, t_quantile, t_tail};
use truncsim::statcore::{fisher_exact, log_odds_ratio, profile_ci};
use truncsim::stream::{Stream, StreamFamily};

pub const ORACLE_SEED: u64 = 20_240_229;

pub fn rng(label: &str) -> Stream {
    StreamFamily::new(ORACLE_SEED, label).stream(0)
}

/// Uniform integer in `lo..=hi`.
pub fn int_in(s: &mut Stream, lo: u64, hi: u64) -> u64 {
    lo + ((s.uniform() * (hi - lo + 1) as f64) as u64).min(hi - lo)
}

pub fn random_positive_table(s: &mut Stream, max_cell: u64) -> TwoByTwoTable {
    TwoByTwoTable::new(
        int_in(s, 1, max_cell),
        int_in(s, 1, max_cell),
        int_in(s, 1, max_cell),
        int_in(s, 1, max_cell),
    )
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Maximum likelihood fit of `logit p = alpha + beta * treated` by plain
/// two-parameter Newton-Raphson on the grouped data. Returns `(beta, se)`
/// with the SE from the inverse observed information.
pub fn logistic_mle(t: &TwoByTwoTable) -> (f64, f64) {
    let (a, n1) = (t.a as f64, (t.a + t.b) as f64);
    let (c, n0) = (t.c as f64, (t.c + t.d) as f64);
    let (mut alpha, mut beta) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let p0 = logistic(alpha);
        let p1 = logistic(alpha + beta);
        let s_alpha = (c - n0 * p0) + (a - n1 * p1);
        let s_beta = a - n1 * p1;
        let w0 = n0 * p0 * (1.0 - p0);
        let w1 = n1 * p1 * (1.0 - p1);
        // Information matrix [[w0 + w1, w1], [w1, w1]] has determinant w0 * w1.
        let det = w0 * w1;
        let d_alpha = (w1 * s_alpha - w1 * s_beta) / det;
        let d_beta = (-w1 * s_alpha + (w0 + w1) * s_beta) / det;
        alpha += d_alpha;
        beta += d_beta;
        if d_alpha.abs() < 1e-15 && d_beta.abs() < 1e-15 {
            break;
        }
    }
    let p0 = logistic(alpha);
    let p1 = logistic(alpha + beta);
    let w0 = n0 * p0 * (1.0 - p0);
    let w1 = n1 * p1 * (1.0 - p1);
    (beta, ((w0 + w1) / (w0 * w1)).sqrt())
}

fn table_log_lik(t: &TwoByTwoTable, alpha: f64, beta: f64) -> f64 {
    let p0 = logistic(alpha);
    let p1 = logistic(alpha + beta);
    t.c as f64 * p0.ln() + t.d as f64 * (1.0 - p0).ln() + t.a as f64 * p1.ln() + t.b as f64 * (1.0 - p1).ln()
}

/// Profile deviance by bisection on the intercept score, measured against
/// the closed-form saturated maximum.
pub fn oracle_deviance(t: &TwoByTwoTable, beta: f64) -> f64 {
    let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
    let max = a * (a / (a + b)).ln() + b * (b / (a + b)).ln() + c * (c / (c + d)).ln() + d * (d / (c + d)).ln();
    let score = |alpha: f64| (c - (c + d) * logistic(alpha)) + (a - (a + b) * logistic(alpha + beta));
    let (mut lo, mut hi) = (-60.0_f64, 60.0_f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if score(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * (max - table_log_lik(t, 0.5 * (lo + hi), beta))
}

fn binom(n: u64, k: u64) -> BigUint {
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Two-sided Fisher p by exact enumeration in integer arithmetic: a table is
/// counted when its weight is at most (1 + 1e-7) times the observed weight.
pub fn fisher_enumerated(t: &TwoByTwoTable) -> f64 {
    let (n1, n0) = (t.a + t.b, t.c + t.d);
    let m = t.a + t.c;
    let weight = |x: u64| binom(n1, x) * binom(n0, m - x);
    let observed = weight(t.a);
    let bound = &observed * BigUint::from(10_000_001u64);
    let mut hit = BigUint::zero();
    for x in m.saturating_sub(n0)..=m.min(n1) {
        let w = weight(x);
        if &w * BigUint::from(10_000_000u64) <= bound {
            hit += w;
        }
    }
    let total = binom(n1 + n0, m);
    // Scale so the integer quotient keeps 60 significant bits.
    let shift = 60u32;
    let q = (hit << shift) / &total;
    q.to_f64().unwrap() / 2f64.powi(shift as i32)
}

/// Random table whose row and column totals are all in `1..=30`.
pub fn random_small_margin_table(s: &mut Stream) -> TwoByTwoTable {
    loop {
        let t = TwoByTwoTable::new(int_in(s, 0, 30), int_in(s, 0, 30), int_in(s, 0, 30), int_in(s, 0, 30));
        let margins = [t.a + t.b, t.c + t.d, t.a + t.c, t.b + t.d];
        if margins.iter().all(|&m| (1..=30).contains(&m)) {
            return t;
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Kernel {
    TTail,
    TQuantile,
    Chi2Upper,
    LogBinom,
}
use Kernel::*;

/// (kernel, first argument, second argument, value to 20 digits).
/// TTail(t, df) is the upper tail; TQuantile(df, q); Chi2Upper(x, df);
/// LogBinom(n, k). Values computed with mpmath at 50 digits.
#[allow(clippy::excessive_precision, clippy::approx_constant)]
pub const KERNEL_REFERENCE: [(Kernel, f64, f64, f64); 50] = [
    (TTail, 0.5, 1.0, 0.35241638234956672582),
    (TTail, 2.0, 1.0, 0.14758361765043327418),
    (TTail, -1.3, 2.0, 0.8383764840919798149),
    (TTail, 0.1, 3.0, 0.46332617440040291243),
    (TTail, 1.0, 4.0, 0.1869504831500294425),
    (TTail, 3.6742346141747673, 4.0, 0.010655820564378361811),
    (TTail, 2.5, 7.0, 0.020496109292876448445),
    (TTail, -0.8, 10.0, 0.77884979042922929787),
    (TTail, 1.96, 30.0, 0.029671156448025238157),
    (TTail, 4.0, 30.0, 0.00019092281804187842162),
    (TTail, 2.2, 98.0, 0.0150783980821948995),
    (TTail, -2.0, 198.0, 0.97656655819925585873),
    (TTail, 1.5, 500.0, 0.06712277458502690259),
    (TTail, 3.1, 998.0, 0.00099472742950550400672),
    (TQuantile, 1.0, 0.975, 12.706204736174693314),
    (TQuantile, 2.0, 0.9, 1.8856180831641270225),
    (TQuantile, 3.0, 0.975, 3.1824463052837084359),
    (TQuantile, 4.0, 0.975, 2.7764451051977934898),
    (TQuantile, 5.0, 0.995, 4.0321429835552271793),
    (TQuantile, 8.0, 0.05, -1.8595480375308983539),
    (TQuantile, 12.0, 0.6, 0.25903274567688700493),
    (TQuantile, 29.0, 0.975, 2.0452296421327038745),
    (TQuantile, 60.0, 0.999, 3.2317091260243594529),
    (TQuantile, 97.0, 0.975, 1.9847231860139842923),
    (TQuantile, 200.0, 0.025, -1.9718962236339093581),
    (TQuantile, 998.0, 0.975, 1.9623438462163342481),
    (Chi2Upper, 0.0, 1.0, 1.0),
    (Chi2Upper, 0.001, 1.0, 0.97477287936996038828),
    (Chi2Upper, 0.5, 1.0, 0.47950012218695346232),
    (Chi2Upper, 1.9607843137254901, 1.0, 0.16142946236708319177),
    (Chi2Upper, 3.841459, 1.0, 0.049999994653195766393),
    (Chi2Upper, 6.635, 1.0, 0.0099994195740425249697),
    (Chi2Upper, 10.0, 1.0, 0.0015654022580025496775),
    (Chi2Upper, 25.0, 1.0, 5.7330314375838782335e-7),
    (Chi2Upper, 2.0, 2.0, 0.3678794411714423216),
    (Chi2Upper, 7.5, 3.0, 0.057558451972636406967),
    (Chi2Upper, 12.0, 5.0, 0.034787780506241849918),
    (Chi2Upper, 30.0, 10.0, 0.00085664121077530039211),
    (LogBinom, 0.0, 0.0, 0.0),
    (LogBinom, 1.0, 0.0, 0.0),
    (LogBinom, 5.0, 2.0, 2.302585092994045684),
    (LogBinom, 10.0, 3.0, 4.7874917427820459942),
    (LogBinom, 20.0, 10.0, 12.126791314602454439),
    (LogBinom, 30.0, 15.0, 18.859693581148381253),
    (LogBinom, 50.0, 7.0, 18.419524075268983805),
    (LogBinom, 60.0, 30.0, 39.311700726011262416),
    (LogBinom, 100.0, 50.0, 66.783841652017426009),
    (LogBinom, 200.0, 17.0, 55.866810789710229105),
    (LogBinom, 500.0, 250.0, 343.23999487845016314),
    (LogBinom, 1000.0, 500.0, 689.46726156785118008),
];

pub fn eval_kernel(k: Kernel, x: f64, y: f64) -> f64 {
    match k {
        TTail => t_tail(x, y),
        TQuantile => t_quantile(x, y),
        Chi2Upper => chi2_upper(x, y),
        LogBinom => log_binom(x as u64, y as u64),
    }
}

/// Each check returns the worst discrepancy seen, or a description of the
/// first case beyond tolerance.
pub type Check = Result<f64, String>;

pub fn check_woolf_vs_mle(tables: usize) -> Check {
    let mut s = rng("woolf-vs-mle");
    let mut worst = 0.0_f64;
    for _ in 0..tables {
        let t = random_positive_table(&mut s, 200);
        let (beta, se) = log_odds_ratio(&t).ok_or_else(|| format!("{t:?} not estimable"))?;
        let (mle_beta, mle_se) = logistic_mle(&t);
        let err = (beta - mle_beta).abs().max((se - mle_se).abs());
        if !(err <= 1e-8) {
            return Err(format!("{t:?}: woolf ({beta}, {se}) vs mle ({mle_beta}, {mle_se})"));
        }
        worst = worst.max(err);
    }
    Ok(worst)
}

pub const CHI2_1_95: f64 = 3.841459;

pub fn check_profile_endpoints(tables: usize) -> Check {
    let mut s = rng("profile-endpoints");
    let mut worst = 0.0_f64;
    for i in 0..tables {
        let max_cell = if i % 2 == 0 { 15 } else { 400 };
        let t = random_positive_table(&mut s, max_cell);
        let (lo, hi) = profile_ci(&t, 0.95).map_err(|e| e.to_string())?;
        for end in [lo, hi] {
            let err = (oracle_deviance(&t, end) - CHI2_1_95).abs();
            if !(err <= 1e-6) {
                return Err(format!("{t:?}: deviance at {end} off by {err}"));
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

pub fn check_fisher(tables: usize) -> Check {
    let mut s = rng("fisher-enumeration");
    let mut worst = 0.0_f64;
    for _ in 0..tables {
        let t = random_small_margin_table(&mut s);
        let p = fisher_exact(&t).ok_or_else(|| format!("{t:?} not calculable"))?;
        let err = (p - fisher_enumerated(&t)).abs();
        if !(err <= 1e-12) {
            return Err(format!("{t:?}: fisher {p} off by {err}"));
        }
        worst = worst.max(err);
    }
    Ok(worst)
}

pub fn check_kernels() -> Check {
    let mut worst = 0.0_f64;
    for &(k, x, y, want) in &KERNEL_REFERENCE {
        let got = eval_kernel(k, x, y);
        let err = (got - want).abs();
        if !(err <= 1e-10) {
            return Err(format!("{k:?}({x}, {y}) = {got}, reference {want}"));
        }
        worst = worst.max(err);
    }
    Ok(worst)
}
