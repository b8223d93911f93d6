//! Distribution kernels used by the analysis methods.
//!
//! Everything here is plain `f64` code: log-gamma, the regularized incomplete
//! beta and gamma functions, and the Student-t / chi-squared / normal tails and
//! quantiles built on them. Arguments outside a function's domain are contract
//! violations and panic.

use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 1000;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma: argument must be positive, got {x}");
    if x >= 10.0 {
        return stirling_ln_gamma(x);
    }
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

fn stirling_ln_gamma(x: f64) -> f64 {
    // Asymptotic series; at x >= 10 the truncated tail is below 1e-17.
    const B: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut pow = inv;
    for b in B {
        corr += b * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + corr
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, k)`.
pub fn log_binom(n: u64, k: u64) -> f64 {
    assert!(k <= n, "log_binom: k = {k} exceeds n = {n}");
    if k == 0 || k == n {
        return 0.0;
    }
    let (n, k) = (n as f64, k.min(n - k) as f64);
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Regularized incomplete beta `I_x(a, b)`, with `y = 1 - x` passed separately
/// so callers that know the complement exactly do not lose it to cancellation.
fn beta_reg(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() / a) * beta_cf(a, b, x)
    } else {
        1.0 - (ln_front.exp() / b) * beta_cf(b, a, y)
    }
}

// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q: invalid arguments a = {a}, x = {x}");
    if x == 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // Lower series, then complement.
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        1.0 - sum * ln_front.exp()
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        ln_front.exp() * h
    }
}

/// Upper tail `P(X > x)` of a chi-squared variable with `df` degrees of freedom.
pub fn chi2_upper(x: f64, df: f64) -> f64 {
    assert!(df > 0.0, "chi2_upper: df must be positive, got {df}");
    assert!(x >= 0.0, "chi2_upper: x must be non-negative, got {x}");
    gamma_q(0.5 * df, 0.5 * x)
}

/// One-sided upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn t_tail(t: f64, df: f64) -> f64 {
    assert!(df >= 1.0, "t_tail: df must be >= 1, got {df}");
    assert!(!t.is_nan(), "t_tail: t is NaN");
    let half = 0.5 * t_two_sided_raw(t.abs(), df);
    if t >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// Two-sided p-value `P(|T| > |t|)`.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    assert!(df >= 1.0, "t_two_sided: df must be >= 1, got {df}");
    assert!(!t.is_nan(), "t_two_sided: t is NaN");
    t_two_sided_raw(t.abs(), df)
}

fn t_two_sided_raw(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let t2 = t * t;
    let denom = df + t2;
    beta_reg(0.5 * df, 0.5, df / denom, t2 / denom)
}

fn t_ln_pdf(t: f64, df: f64) -> f64 {
    ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df * PI).ln()
        - 0.5 * (df + 1.0) * (t * t / df).ln_1p()
}

/// Quantile of Student's t: the `t` with `P(T <= t) = q`.
pub fn t_quantile(df: f64, q: f64) -> f64 {
    assert!(df >= 1.0, "t_quantile: df must be >= 1, got {df}");
    assert!(q > 0.0 && q < 1.0, "t_quantile: q must lie in (0, 1), got {q}");
    if q == 0.5 {
        return 0.0;
    }
    let upper = q.min(1.0 - q);
    let sign = if q > 0.5 { 1.0 } else { -1.0 };
    let t = if df == 1.0 {
        (PI * (0.5 - upper)).tan()
    } else if df == 2.0 {
        let a = 4.0 * upper * (1.0 - upper);
        2.0 * (1.0 - 2.0 * upper) / (2.0 * a).sqrt()
    } else {
        t_upper_quantile(df, upper)
    };
    sign * t
}

// Solves t_tail(t) = p for t > 0, p < 0.5, by safeguarded Newton.
fn t_upper_quantile(df: f64, p: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_tail(hi, df) > p {
        lo = hi;
        hi *= 2.0;
    }
    let mut t = normal_quantile(1.0 - p).clamp(lo, hi);
    if t <= lo || t >= hi {
        t = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let f = t_tail(t, df) - p;
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let step = f / t_ln_pdf(t, df).exp();
        let mut next = t + step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * t.abs().max(1.0) {
            return next;
        }
        t = next;
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    t
}

/// Standard normal quantile (Wichura's AS 241, PPND16), accurate to about 1e-16.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0, 1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2_509.080_928_730_122_7 * r + 33_430.575_583_588_13) * r
                + 67_265.770_927_008_7)
                * r
                + 45_921.953_931_549_87)
                * r
                + 13_731.693_765_509_46)
                * r
                + 1_971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5_226.495_278_852_545 * r + 28_729.085_735_721_943) * r
                + 39_307.895_800_092_71)
                * r
                + 21_213.794_301_586_597)
                * r
                + 5_394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_91)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Upper quantile of chi-squared with one degree of freedom.
pub fn chi2_1_quantile(conf: f64) -> f64 {
    assert!(conf > 0.0 && conf < 1.0, "chi2_1_quantile: conf must lie in (0, 1)");
    let z = normal_quantile(0.5 + 0.5 * conf);
    z * z
}
