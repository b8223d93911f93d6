//! Summary CSVs, raw per-iteration dumps and the run manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Estimate, IterationResult};
use crate::metrics::PerformanceSummary;
use crate::scenario::{OutcomeKind, Scenario, Sensitivity, SetTag};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("nothing to write")]
    Empty,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv { path: path.to_path_buf(), source }
}

/// One row of a summary CSV. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub set: SetTag,
    pub sensitivity: Sensitivity,
    pub outcome: OutcomeKind,
    pub n: u32,
    pub or_intermediate: f64,
    pub effect_outcome: f64,
    pub alpha_u: f64,
    pub beta_u: f64,
    pub alpha_ru: f64,
    pub beta_ru: f64,
    pub iterations: u64,
    pub n_estimable: u64,
    pub n_chi2_calc: Option<u64>,
    pub n_fisher_calc: Option<u64>,
    pub bias: Option<f64>,
    pub bias_mcse: Option<f64>,
    pub emp_se: Option<f64>,
    pub mod_se: Option<f64>,
    pub coverage: Option<f64>,
    pub coverage_mcse: Option<f64>,
    pub reject_t: Option<f64>,
    pub reject_chi2: Option<f64>,
    pub reject_chi2_adj: Option<f64>,
    pub reject_fisher: Option<f64>,
    pub ror: Option<f64>,
}

impl From<&PerformanceSummary> for SummaryRow {
    fn from(p: &PerformanceSummary) -> Self {
        let s = &p.scenario;
        Self {
            scenario_id: s.id(),
            set: s.set,
            sensitivity: s.sensitivity,
            outcome: s.kind(),
            n: s.n,
            or_intermediate: s.or_intermediate(),
            effect_outcome: s.effect_outcome(),
            alpha_u: s.alpha_u,
            beta_u: s.outcome.beta_u(),
            alpha_ru: s.alpha_ru,
            beta_ru: s.outcome.beta_ru(),
            iterations: p.n_iterations,
            n_estimable: p.n_estimable,
            n_chi2_calc: p.n_chi2_calculable,
            n_fisher_calc: p.n_fisher_calculable,
            bias: p.bias,
            bias_mcse: p.bias_mcse,
            emp_se: p.emp_se,
            mod_se: p.mod_se,
            coverage: p.coverage.map(|r| r.value),
            coverage_mcse: p.coverage.map(|r| r.mcse),
            reject_t: p.reject_t.map(|r| r.value),
            reject_chi2: p.reject_chi2.map(|r| r.value),
            reject_chi2_adj: p.reject_chi2_adj.map(|r| r.value),
            reject_fisher: p.reject_fisher.map(|r| r.value),
            ror: p.ror,
        }
    }
}

type GroupKey = (SetTag, Sensitivity, OutcomeKind);

fn group_key(s: &Scenario) -> GroupKey {
    (s.set, s.sensitivity, s.kind())
}

fn group_file(prefix: &str, (set, sens, kind): GroupKey) -> String {
    format!("{prefix}_{set}_{sens}_{kind}.csv")
}

/// Writes one CSV per (set, sensitivity, outcome), rows in input order.
/// Returns the written paths in order of first appearance.
pub fn write_summaries(summaries: &[PerformanceSummary], out_dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    if summaries.is_empty() {
        return Err(OutputError::Empty);
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut order: Vec<GroupKey> = Vec::new();
    let mut groups: BTreeMap<String, Vec<SummaryRow>> = BTreeMap::new();
    for p in summaries {
        let key = group_key(&p.scenario);
        if !order.contains(&key) {
            order.push(key);
        }
        groups.entry(group_file("summary", key)).or_default().push(SummaryRow::from(p));
    }
    let mut paths = Vec::with_capacity(order.len());
    for key in order {
        let name = group_file("summary", key);
        let path = out_dir.join(&name);
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        for row in &groups[&name] {
            w.serialize(row).map_err(csv_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn read_summaries(path: &Path) -> Result<Vec<SummaryRow>, OutputError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<Vec<SummaryRow>, _>>().map_err(csv_err(path))
}

#[derive(Debug, Serialize)]
struct RawRow<'a> {
    scenario_id: &'a str,
    iteration: u64,
    n1: u64,
    n0: u64,
    estimate: Option<f64>,
    se: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    p_t: Option<f64>,
    p_chi2: Option<f64>,
    p_chi2_adj: Option<f64>,
    p_fisher: Option<f64>,
    a: Option<u64>,
    b: Option<u64>,
    c: Option<u64>,
    d: Option<u64>,
}

impl<'a> RawRow<'a> {
    fn new(id: &'a str, r: &IterationResult) -> Self {
        let mut row = RawRow {
            scenario_id: id,
            iteration: r.iteration,
            n1: r.n1,
            n0: r.n0,
            estimate: None,
            se: None,
            ci_low: None,
            ci_high: None,
            p_t: None,
            p_chi2: None,
            p_chi2_adj: None,
            p_fisher: None,
            a: None,
            b: None,
            c: None,
            d: None,
        };
        match &r.estimate {
            Estimate::Continuous(est) => {
                if let Some(fit) = est.fit {
                    row.estimate = Some(fit.diff);
                    row.se = Some(fit.se);
                    row.ci_low = Some(fit.ci_low);
                    row.ci_high = Some(fit.ci_high);
                    row.p_t = Some(fit.p_value);
                }
            }
            Estimate::Binary(est) => {
                if let Some(fit) = est.odds_ratio {
                    row.estimate = Some(fit.log_or);
                    row.se = Some(fit.wald_se);
                    row.ci_low = Some(fit.ci_low);
                    row.ci_high = Some(fit.ci_high);
                }
                row.p_chi2 = est.chi2.map(|x| x.p_value);
                row.p_chi2_adj = est.chi2_adj.map(|x| x.p_value);
                row.p_fisher = est.fisher_p;
                let t = est.table;
                (row.a, row.b, row.c, row.d) = (Some(t.a), Some(t.b), Some(t.c), Some(t.d));
            }
        }
        row
    }
}

/// Streams per-iteration results into `raw_<set>_<sensitivity>_<outcome>.csv`.
pub struct RawWriter {
    dir: PathBuf,
    writers: BTreeMap<String, (PathBuf, csv::Writer<BufWriter<File>>)>,
}

impl RawWriter {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), writers: BTreeMap::new() }
    }

    pub fn write(&mut self, s: &Scenario, results: &[IterationResult]) -> Result<(), OutputError> {
        let name = group_file("raw", group_key(s));
        if !self.writers.contains_key(&name) {
            let path = self.dir.join(&name);
            let file = File::create(&path).map_err(io_err(&path))?;
            self.writers.insert(name.clone(), (path, csv::Writer::from_writer(BufWriter::new(file))));
        }
        let (path, w) = self.writers.get_mut(&name).expect("inserted above");
        let id = s.id();
        for r in results {
            w.serialize(RawRow::new(&id, r)).map_err(csv_err(path))?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<PathBuf>, OutputError> {
        let mut paths = Vec::new();
        for (_, (path, mut w)) in self.writers {
            w.flush().map_err(io_err(&path))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub iterations: u64,
    pub scenarios: usize,
    pub files: Vec<String>,
    /// Scenario ids that hit a numerical contract error, with the message.
    pub failed: Vec<(String, String)>,
}

pub fn write_manifest(manifest: &Manifest, out_dir: &Path) -> Result<PathBuf, OutputError> {
    let path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}
