//! Scenario definitions and the standard parameter grids.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Outcome standard deviation (grams) used by the continuous grids.
pub const OUTCOME_SD: f64 = 580.0;
pub const CORE_N: [u32; 4] = [100, 200, 500, 1000];
/// Largest odds ratio in the standard grids, outside the 0.05-step range.
pub const EXTREME_OR: f64 = 5.0;
/// Largest continuous effect (in SD units) in the standard grids.
pub const EXTREME_SD_MULTIPLE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetTag {
    Set1,
    Set2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensitivity {
    Core,
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    Continuous,
    Binary,
}

impl SetTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SetTag::Set1 => "set1",
            SetTag::Set2 => "set2",
        }
    }
}

impl Sensitivity {
    pub fn as_str(self) -> &'static str {
        match self {
            Sensitivity::Core => "core",
            Sensitivity::A => "a",
            Sensitivity::B => "b",
            Sensitivity::C => "c",
        }
    }
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Continuous => "continuous",
            OutcomeKind::Binary => "binary",
        }
    }
}

macro_rules! display_via_as_str {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    )*};
}
display_via_as_str!(SetTag, Sensitivity, OutcomeKind);

/// Outcome submodel. Continuous parameters are in grams; binary ones on the
/// log-odds scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OutcomeModel {
    Continuous {
        intercept_y: f64,
        beta_r: f64,
        beta_u: f64,
        sigma_y: f64,
        beta_ru: f64,
    },
    Binary {
        intercept_y: f64,
        beta_r: f64,
        beta_u: f64,
        beta_ru: f64,
    },
}

impl OutcomeModel {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            OutcomeModel::Continuous { .. } => OutcomeKind::Continuous,
            OutcomeModel::Binary { .. } => OutcomeKind::Binary,
        }
    }

    pub fn intercept_y(&self) -> f64 {
        match *self {
            OutcomeModel::Continuous { intercept_y, .. } | OutcomeModel::Binary { intercept_y, .. } => {
                intercept_y
            }
        }
    }

    pub fn beta_r(&self) -> f64 {
        match *self {
            OutcomeModel::Continuous { beta_r, .. } | OutcomeModel::Binary { beta_r, .. } => beta_r,
        }
    }

    pub fn beta_u(&self) -> f64 {
        match *self {
            OutcomeModel::Continuous { beta_u, .. } | OutcomeModel::Binary { beta_u, .. } => beta_u,
        }
    }

    pub fn beta_ru(&self) -> f64 {
        match *self {
            OutcomeModel::Continuous { beta_ru, .. } | OutcomeModel::Binary { beta_ru, .. } => beta_ru,
        }
    }
}

/// One fully specified data-generating configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub set: SetTag,
    pub sensitivity: Sensitivity,
    /// Total randomized participants, split equally between the arms.
    pub n: u32,
    pub intercept_s: f64,
    pub alpha_r: f64,
    pub alpha_u: f64,
    pub alpha_ru: f64,
    pub outcome: OutcomeModel,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("n must be even and at least 4, got {0}")]
    BadSize(u32),
    #[error("sigma_y must be positive, got {0}")]
    BadSigma(f64),
    #[error("parameter {0} is not finite")]
    NotFinite(&'static str),
}

/// Rounds to 1e-12 and clears negative zero, so ids do not depend on the last
/// few bits of a log or exp.
pub fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12 + 0.0
}

impl Scenario {
    pub fn kind(&self) -> OutcomeKind {
        self.outcome.kind()
    }

    /// Stable identifier built from every parameter.
    pub fn id(&self) -> String {
        use fmt::Write;
        let mut id = format!(
            "{}-{}-{}-n{}-is{}-ar{}-au{}-aru{}",
            self.set,
            self.sensitivity,
            self.kind(),
            self.n,
            round12(self.intercept_s),
            round12(self.alpha_r),
            round12(self.alpha_u),
            round12(self.alpha_ru),
        );
        let o = &self.outcome;
        write!(
            id,
            "-iy{}-br{}-bu{}-bru{}",
            round12(o.intercept_y()),
            round12(o.beta_r()),
            round12(o.beta_u()),
            round12(o.beta_ru())
        )
        .unwrap();
        if let OutcomeModel::Continuous { sigma_y, .. } = *o {
            write!(id, "-sy{}", round12(sigma_y)).unwrap();
        }
        id
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(ScenarioError::BadSize(self.n));
        }
        let o = &self.outcome;
        let params = [
            ("intercept_s", self.intercept_s),
            ("alpha_r", self.alpha_r),
            ("alpha_u", self.alpha_u),
            ("alpha_ru", self.alpha_ru),
            ("intercept_y", o.intercept_y()),
            ("beta_r", o.beta_r()),
            ("beta_u", o.beta_u()),
            ("beta_ru", o.beta_ru()),
        ];
        for (name, v) in params {
            if !v.is_finite() {
                return Err(ScenarioError::NotFinite(name));
            }
        }
        if let OutcomeModel::Continuous { sigma_y, .. } = *o {
            if !(sigma_y > 0.0 && sigma_y.is_finite()) {
                return Err(ScenarioError::BadSigma(sigma_y));
            }
        }
        Ok(())
    }

    /// Odds ratio of the treatment effect on the intermediate.
    pub fn or_intermediate(&self) -> f64 {
        round12(self.alpha_r.exp())
    }

    /// Treatment effect on the outcome on its display scale: grams for
    /// continuous outcomes, the odds ratio for binary ones.
    pub fn effect_outcome(&self) -> f64 {
        match self.outcome {
            OutcomeModel::Continuous { beta_r, .. } => round12(beta_r),
            OutcomeModel::Binary { beta_r, .. } => round12(beta_r.exp()),
        }
    }

    /// Whether the treatment effect on the outcome is null.
    pub fn is_null_effect(&self) -> bool {
        self.outcome.beta_r() == 0.0
    }
}

/// The hypothetical-estimand truth: the outcome-model treatment coefficient.
pub fn true_estimand(s: &Scenario) -> f64 {
    s.outcome.beta_r()
}

/// True when selection on the intermediate is expected to bias the naive
/// comparison: treatment moves the intermediate (directly or through the
/// interaction) and the confounder acts on both intermediate and outcome.
pub fn bias_expected(s: &Scenario) -> bool {
    (s.alpha_r != 0.0 || s.alpha_ru != 0.0) && s.alpha_u != 0.0 && s.outcome.beta_u() != 0.0
}

/// Odds-ratio grid `1.00, 1.05, ..., 2.00, 5`.
pub fn odds_ratio_grid() -> Vec<f64> {
    (0..=20)
        .map(|k| f64::from(100 + 5 * k) / 100.0)
        .chain(std::iter::once(EXTREME_OR))
        .collect()
}

/// Continuous effect grid in grams: `0, 0.1, ..., 2.0, 5` SDs.
pub fn mean_difference_grid() -> Vec<f64> {
    (0..=20)
        .map(|k| f64::from(k) * OUTCOME_SD / 10.0)
        .chain(std::iter::once(EXTREME_SD_MULTIPLE * OUTCOME_SD))
        .collect()
}

fn core_outcome(kind: OutcomeKind, beta_r: f64) -> OutcomeModel {
    match kind {
        OutcomeKind::Continuous => OutcomeModel::Continuous {
            intercept_y: 3300.0,
            beta_r,
            beta_u: -0.2 * OUTCOME_SD,
            sigma_y: OUTCOME_SD,
            beta_ru: 0.0,
        },
        OutcomeKind::Binary => OutcomeModel::Binary {
            intercept_y: 0.1_f64.ln(),
            beta_r,
            beta_u: 1.2_f64.ln(),
            beta_ru: 0.0,
        },
    }
}

/// Core grid for a set and outcome kind over explicit axes.
///
/// `odds_ratios` are treatment odds ratios on the intermediate; `effects` are
/// grams for continuous outcomes and odds ratios for binary ones.
pub fn build_grid(
    set: SetTag,
    kind: OutcomeKind,
    sizes: &[u32],
    odds_ratios: &[f64],
    effects: &[f64],
) -> Vec<Scenario> {
    let alpha_ru = match set {
        SetTag::Set1 => 0.0,
        SetTag::Set2 => 0.8_f64.ln(),
    };
    let mut grid = Vec::with_capacity(sizes.len() * odds_ratios.len() * effects.len());
    for &n in sizes {
        for &or in odds_ratios {
            for &effect in effects {
                let beta_r = match kind {
                    OutcomeKind::Continuous => effect,
                    OutcomeKind::Binary => effect.ln(),
                };
                grid.push(Scenario {
                    set,
                    sensitivity: Sensitivity::Core,
                    n,
                    intercept_s: 0.2_f64.ln(),
                    alpha_r: or.ln(),
                    alpha_u: 0.8_f64.ln(),
                    alpha_ru,
                    outcome: core_outcome(kind, beta_r),
                });
            }
        }
    }
    grid
}

/// The full core grid: 4 sizes x 22 intermediate ORs x 22 outcome effects.
pub fn build_core_grid(set: SetTag, kind: OutcomeKind) -> Vec<Scenario> {
    let effects = match kind {
        OutcomeKind::Continuous => mean_difference_grid(),
        OutcomeKind::Binary => odds_ratio_grid(),
    };
    build_grid(set, kind, &CORE_N, &odds_ratio_grid(), &effects)
}

/// Applies one sensitivity variant to a single scenario.
pub fn apply_sensitivity_one(s: &Scenario, variant: Sensitivity) -> Scenario {
    let mut out = s.clone();
    out.sensitivity = variant;
    match variant {
        Sensitivity::Core => {}
        Sensitivity::A => {
            out.alpha_u = 0.5_f64.ln();
            match &mut out.outcome {
                OutcomeModel::Continuous { beta_u, .. } => *beta_u = -OUTCOME_SD,
                OutcomeModel::Binary { beta_u, .. } => *beta_u = 1.5_f64.ln(),
            }
        }
        Sensitivity::B => out.alpha_r = -s.alpha_r + 0.0,
        Sensitivity::C => {
            out.intercept_s = 0.0;
            if let OutcomeModel::Binary { intercept_y, .. } = &mut out.outcome {
                *intercept_y = 0.0;
            }
        }
    }
    out
}

pub fn apply_sensitivity(grid: &[Scenario], variant: Sensitivity) -> Vec<Scenario> {
    grid.iter().map(|s| apply_sensitivity_one(s, variant)).collect()
}
