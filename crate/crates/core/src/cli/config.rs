//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cli::figure::Metric;
use crate::engine::RunPlan;
use crate::scenario::{
    apply_sensitivity, build_grid, mean_difference_grid, odds_ratio_grid, OutcomeKind, OutcomeModel,
    Scenario, Sensitivity, SetTag, CORE_N,
};

pub const DEFAULT_ITERATIONS: u64 = 10_000;
pub const OUT_DIR_ENV: &str = "TRUNCSIM_OUT_DIR";
pub const THREADS_ENV: &str = "TRUNCSIM_THREADS";

const KEYS: [&str; 13] = [
    "master_seed",
    "iterations",
    "sets",
    "sensitivities",
    "outcomes",
    "n",
    "or_grid",
    "beta_r_grid",
    "scenarios",
    "out_dir",
    "emit_raw",
    "threads",
    "figures",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("unknown config key \"{0}\"")]
    UnknownKey(String),
    #[error("missing required config key \"{0}\"")]
    Missing(&'static str),
    #[error("config key \"{key}\": {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// Outcome-effect grid overrides, one list per outcome kind: grams for
/// continuous outcomes, odds ratios for binary ones.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectGrids {
    pub continuous: Option<Vec<f64>>,
    pub binary: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureOptions {
    #[serde(default)]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub include_extreme: bool,
}

/// A user-specified scenario, parameters on the model scale.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    pub set: SetTag,
    #[serde(default = "core_sensitivity")]
    pub sensitivity: Sensitivity,
    pub outcome: OutcomeKind,
    pub n: u32,
    pub intercept_s: f64,
    pub alpha_r: f64,
    pub alpha_u: f64,
    #[serde(default)]
    pub alpha_ru: f64,
    pub intercept_y: f64,
    pub beta_r: f64,
    pub beta_u: f64,
    pub sigma_y: Option<f64>,
    #[serde(default)]
    pub beta_ru: f64,
}

fn core_sensitivity() -> Sensitivity {
    Sensitivity::Core
}

impl CustomScenario {
    fn to_scenario(&self) -> Result<Scenario, String> {
        let outcome = match (self.outcome, self.sigma_y) {
            (OutcomeKind::Continuous, Some(sigma_y)) => OutcomeModel::Continuous {
                intercept_y: self.intercept_y,
                beta_r: self.beta_r,
                beta_u: self.beta_u,
                sigma_y,
                beta_ru: self.beta_ru,
            },
            (OutcomeKind::Continuous, None) => return Err("continuous scenario needs sigma_y".into()),
            (OutcomeKind::Binary, None) => OutcomeModel::Binary {
                intercept_y: self.intercept_y,
                beta_r: self.beta_r,
                beta_u: self.beta_u,
                beta_ru: self.beta_ru,
            },
            (OutcomeKind::Binary, Some(_)) => return Err("binary scenario cannot set sigma_y".into()),
        };
        let s = Scenario {
            set: self.set,
            sensitivity: self.sensitivity,
            n: self.n,
            intercept_s: self.intercept_s,
            alpha_r: self.alpha_r,
            alpha_u: self.alpha_u,
            alpha_ru: self.alpha_ru,
            outcome,
        };
        s.validate().map_err(|e| e.to_string())?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub master_seed: u64,
    pub iterations: u64,
    pub sets: Vec<SetTag>,
    pub sensitivities: Vec<Sensitivity>,
    pub outcomes: Vec<OutcomeKind>,
    pub n: Vec<u32>,
    /// Treatment odds ratios on the intermediate.
    pub or_grid: Vec<f64>,
    pub beta_r_grid: EffectGrids,
    pub scenarios: Vec<CustomScenario>,
    pub out_dir: PathBuf,
    pub emit_raw: bool,
    pub threads: Option<usize>,
    pub figures: FigureOptions,
}

fn take<T: DeserializeOwned>(obj: &mut Map<String, Value>, key: &'static str) -> Result<Option<T>, ConfigError> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| invalid(key, e.to_string())),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(ConfigError::Malformed("top level must be a JSON object".into()));
    };
    if let Some(unknown) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey(unknown.clone()));
    }

    let cfg = RunConfig {
        master_seed: take(&mut obj, "master_seed")?.ok_or(ConfigError::Missing("master_seed"))?,
        iterations: take(&mut obj, "iterations")?.unwrap_or(DEFAULT_ITERATIONS),
        sets: take(&mut obj, "sets")?.unwrap_or_default(),
        sensitivities: take(&mut obj, "sensitivities")?.unwrap_or_default(),
        outcomes: take(&mut obj, "outcomes")?.unwrap_or_default(),
        n: take(&mut obj, "n")?.unwrap_or_else(|| CORE_N.to_vec()),
        or_grid: take(&mut obj, "or_grid")?.unwrap_or_else(odds_ratio_grid),
        beta_r_grid: take(&mut obj, "beta_r_grid")?.unwrap_or_default(),
        scenarios: take(&mut obj, "scenarios")?.unwrap_or_default(),
        out_dir: take(&mut obj, "out_dir")?.unwrap_or_else(|| PathBuf::from("out")),
        emit_raw: take(&mut obj, "emit_raw")?.unwrap_or(false),
        threads: take(&mut obj, "threads")?,
        figures: take(&mut obj, "figures")?
            .unwrap_or(FigureOptions { metrics: Vec::new(), include_extreme: false }),
    };
    cfg.check()?;
    Ok(cfg)
}

impl RunConfig {
    fn check(&self) -> Result<(), ConfigError> {
        if self.iterations == 0 {
            return Err(invalid("iterations", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 4 || n % 2 != 0) {
            return Err(invalid("n", format!("{n} is not an even size of at least 4")));
        }
        if let Some(&or) = self.or_grid.iter().find(|&&or| !(or > 0.0 && or.is_finite())) {
            return Err(invalid("or_grid", format!("odds ratio {or} must be positive and finite")));
        }
        if let Some(v) = &self.beta_r_grid.continuous {
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(invalid("beta_r_grid", format!("continuous effect {x} is not finite")));
            }
        }
        if let Some(v) = &self.beta_r_grid.binary {
            if let Some(x) = v.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                return Err(invalid("beta_r_grid", format!("binary effect {x} must be a positive odds ratio")));
            }
        }
        for (i, c) in self.scenarios.iter().enumerate() {
            c.to_scenario().map_err(|m| invalid("scenarios", format!("entry {i}: {m}")))?;
        }
        let plan = self.resolve_scenarios();
        if plan.is_empty() {
            return Err(invalid("sets", "no scenarios resolved: give sets, sensitivities and outcomes, or scenarios"));
        }
        Ok(())
    }

    /// The ordered scenario list: grid scenarios (outcome, then sensitivity,
    /// then set) followed by custom scenarios.
    pub fn resolve_scenarios(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &kind in &self.outcomes {
            let effects = match kind {
                OutcomeKind::Continuous => self.beta_r_grid.continuous.clone().unwrap_or_else(mean_difference_grid),
                OutcomeKind::Binary => self.beta_r_grid.binary.clone().unwrap_or_else(odds_ratio_grid),
            };
            for &sens in &self.sensitivities {
                for &set in &self.sets {
                    let core = build_grid(set, kind, &self.n, &self.or_grid, &effects);
                    out.extend(apply_sensitivity(&core, sens));
                }
            }
        }
        out.extend(self.scenarios.iter().filter_map(|c| c.to_scenario().ok()));
        out
    }

    pub fn plan(&self) -> Result<RunPlan, ConfigError> {
        let mut plan = RunPlan::new(self.resolve_scenarios(), self.iterations, self.master_seed)
            .map_err(|e| invalid("scenarios", e.to_string()))?;
        plan.out_dir = self.out_dir.clone();
        plan.threads = self.threads;
        Ok(plan)
    }

    /// Applies the output-directory and thread-count environment overrides.
    pub fn apply_env(&mut self, out_dir: Option<String>, threads: Option<String>) -> Result<(), ConfigError> {
        if let Some(dir) = out_dir.filter(|d| !d.is_empty()) {
            self.out_dir = PathBuf::from(dir);
        }
        if let Some(t) = threads.filter(|t| !t.is_empty()) {
            let n: usize = t
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| invalid(THREADS_ENV, format!("\"{t}\" is not a positive integer")))?;
            self.threads = Some(n);
        }
        Ok(())
    }
}

/// Hash over everything that determines the numbers: seed, iteration count
/// and the ordered scenario ids (which encode every parameter).
pub fn config_hash(plan: &RunPlan) -> String {
    let mut h = Sha256::new();
    h.update(format!("seed={}\niterations={}\n", plan.master_seed(), plan.iterations()));
    for s in plan.scenarios() {
        h.update(s.id());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
