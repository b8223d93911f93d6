//! Command implementations behind the `truncsim` binary.

pub mod config;
pub mod figure;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{run_grid, EngineError};
use crate::metrics::{summarize, PerformanceSummary};
use crate::scenario::{OutcomeKind, Sensitivity};
use config::{config_hash, ConfigError, RunConfig};
use figure::{emit_figure, FigureError, FigureStyle, Metric};
use output::{write_manifest, write_summaries, Manifest, OutputError, RawWriter, SummaryRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{} scenario(s) failed; first: {first}", .count)]
    Numerical { count: usize, first: String },
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Figure(#[from] FigureError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 config error, 2 numerical contract error, 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical { .. } => 2,
            CliError::Figure(FigureError::MixedKinds | FigureError::MetricUnavailable { .. } | FigureError::Empty) => 1,
            CliError::Output(OutputError::Empty) => 1,
            CliError::Output(_) | CliError::Figure(_) | CliError::Io { .. } => 3,
        }
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub summaries: Vec<PerformanceSummary>,
    pub files: Vec<PathBuf>,
    pub failed: Vec<(String, String)>,
}

/// Simulates, summarizes and writes every output for a resolved config.
///
/// Numerical failures in individual scenarios do not stop the run; they are
/// listed in the manifest and turned into an error after all outputs exist.
pub fn run(cfg: &RunConfig, progress: impl Write) -> Result<RunReport, CliError> {
    let plan = cfg.plan()?;
    let out_dir = plan.out_dir.clone();
    fs::create_dir_all(&out_dir).map_err(|source| CliError::Io { path: out_dir.clone(), source })?;

    let mut raw = cfg.emit_raw.then(|| RawWriter::new(&out_dir));
    let mut summaries = Vec::with_capacity(plan.scenarios().len());
    let mut failed = Vec::new();
    let grid = run_grid(&plan, progress).map_err(|e| ConfigError::Invalid { key: "threads".into(), message: e.to_string() })?;
    for item in grid {
        let run = item.map_err(|source| CliError::Io { path: PathBuf::from("<progress>"), source })?;
        match run.results {
            Ok(results) => {
                if let Some(raw) = raw.as_mut() {
                    raw.write(&run.scenario, &results)?;
                }
                summaries.push(summarize(&results, &run.scenario));
            }
            Err(EngineError::Numerical { id, source }) => failed.push((id, source.to_string())),
            Err(other) => failed.push((run.scenario.id(), other.to_string())),
        }
    }

    let mut files = if summaries.is_empty() { Vec::new() } else { write_summaries(&summaries, &out_dir)? };
    if let Some(raw) = raw {
        files.extend(raw.finish()?);
    }
    files.extend(write_figures(&summaries, cfg, &out_dir)?);

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(&plan),
        master_seed: plan.master_seed(),
        iterations: plan.iterations(),
        scenarios: plan.scenarios().len(),
        files: files.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
        failed: failed.clone(),
    };
    files.push(write_manifest(&manifest, &out_dir)?);

    if let Some((id, msg)) = failed.first() {
        return Err(CliError::Numerical { count: failed.len(), first: format!("{id}: {msg}") });
    }
    Ok(RunReport { summaries, files, failed })
}

fn write_figures(summaries: &[PerformanceSummary], cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let style = FigureStyle { include_extreme: cfg.figures.include_extreme };
    let mut paths = Vec::new();
    let mut groups: Vec<((Sensitivity, OutcomeKind), Vec<SummaryRow>)> = Vec::new();
    for s in summaries {
        let key = (s.scenario.sensitivity, s.kind());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(SummaryRow::from(s)),
            None => groups.push((key, vec![SummaryRow::from(s)])),
        }
    }
    for ((sens, kind), rows) in &groups {
        for &metric in &cfg.figures.metrics {
            if metric == Metric::Ror && *kind == OutcomeKind::Continuous {
                continue;
            }
            let path = out_dir.join(format!("fig_{sens}_{kind}_{}.svg", metric.as_str()));
            emit_figure(rows, metric, style, &path)?;
            paths.push(path);
        }
    }
    Ok(paths)
}
