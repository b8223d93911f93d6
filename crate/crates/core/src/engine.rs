//! Monte Carlo execution: per-iteration streams, trial generation, analysis.

use std::collections::HashSet;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::dgp::{binary_table, continuous_set, generate_records};
use crate::scenario::{OutcomeKind, Scenario, ScenarioError};
use crate::statcore::{analyse_binary, mean_diff_ttest, BinaryEstimate, ContinuousEstimate, ProfileError};
use crate::stream::{Stream, StreamFamily};

/// Confidence level for every interval in the study.
pub const CONFIDENCE: f64 = 0.95;

/// The stream for one (scenario, iteration) pair.
pub fn derive_stream(master_seed: u64, scenario_id: &str, iteration: u64) -> Stream {
    StreamFamily::new(master_seed, scenario_id).stream(iteration)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimate {
    Continuous(ContinuousEstimate),
    Binary(BinaryEstimate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationResult {
    pub iteration: u64,
    /// Treatment-arm survivors.
    pub n1: u64,
    /// Control-arm survivors.
    pub n0: u64,
    pub estimate: Estimate,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("scenario {id}: {source}")]
    Numerical {
        id: String,
        #[source]
        source: ProfileError,
    },
    #[error("invalid scenario {id}: {source}")]
    Scenario {
        id: String,
        #[source]
        source: ScenarioError,
    },
    #[error("duplicate scenario id {0} in run plan")]
    DuplicateScenario(String),
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
}

fn run_iteration(s: &Scenario, family: &StreamFamily, iteration: u64) -> Result<IterationResult, ProfileError> {
    let mut stream = family.stream(iteration);
    let records = generate_records(s, &mut stream);
    let (n1, n0, estimate) = match s.kind() {
        OutcomeKind::Continuous => {
            let set = continuous_set(&records);
            let est = mean_diff_ttest(&set, CONFIDENCE);
            (est.n1, est.n0, Estimate::Continuous(est))
        }
        OutcomeKind::Binary => {
            let table = binary_table(&records);
            let est = analyse_binary(&table, CONFIDENCE)?;
            (table.n1(), table.n0(), Estimate::Binary(est))
        }
    };
    Ok(IterationResult { iteration, n1, n0, estimate })
}

/// Runs `iterations` independent trials of one scenario on the current rayon
/// pool. Result `i` depends only on `(s, master_seed, i)`.
pub fn run_scenario(s: &Scenario, iterations: u64, master_seed: u64) -> Result<Vec<IterationResult>, EngineError> {
    let id = s.id();
    let family = StreamFamily::new(master_seed, &id);
    (0..iterations)
        .into_par_iter()
        .map(|i| run_iteration(s, &family, i))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| EngineError::Numerical { id, source })
}

#[derive(Debug, Clone)]
pub struct RunPlan {
    scenarios: Vec<Scenario>,
    iterations: u64,
    master_seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl RunPlan {
    pub fn new(scenarios: Vec<Scenario>, iterations: u64, master_seed: u64) -> Result<Self, EngineError> {
        if iterations == 0 {
            return Err(EngineError::NoIterations);
        }
        let mut seen = HashSet::new();
        for s in &scenarios {
            let id = s.id();
            s.validate().map_err(|source| EngineError::Scenario { id: id.clone(), source })?;
            if !seen.insert(id.clone()) {
                return Err(EngineError::DuplicateScenario(id));
            }
        }
        Ok(Self { scenarios, iterations, master_seed, out_dir: PathBuf::from("out"), threads: None })
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
}

/// One scenario's worth of output from [`run_grid`].
#[derive(Debug)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    /// Numerical contract failures stay here instead of aborting the grid.
    pub results: Result<Vec<IterationResult>, EngineError>,
}

/// Lazily executes a plan in order, one scenario per `next()`.
///
/// After each scenario a progress line `<id>\t<completed>/<total>\t<seconds>`
/// is written to the sink; sink errors end the run.
pub struct GridRun<'a, W: Write> {
    plan: &'a RunPlan,
    pool: Option<rayon::ThreadPool>,
    progress: W,
    next: usize,
    started: Instant,
    failed: bool,
}

pub fn run_grid<W: Write>(plan: &RunPlan, progress: W) -> Result<GridRun<'_, W>, EngineError> {
    let pool = match plan.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| EngineError::ThreadPool(e.to_string()))?,
        ),
        None => None,
    };
    Ok(GridRun { plan, pool, progress, next: 0, started: Instant::now(), failed: false })
}

impl<W: Write> Iterator for GridRun<'_, W> {
    type Item = io::Result<ScenarioRun>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let scenario = self.plan.scenarios.get(self.next)?.clone();
        self.next += 1;
        let (iterations, seed) = (self.plan.iterations, self.plan.master_seed);
        let results = match &self.pool {
            Some(pool) => pool.install(|| run_scenario(&scenario, iterations, seed)),
            None => run_scenario(&scenario, iterations, seed),
        };
        let line = writeln!(
            self.progress,
            "{}\t{}/{}\t{:.3}",
            scenario.id(),
            self.next,
            self.plan.scenarios.len(),
            self.started.elapsed().as_secs_f64()
        )
        .and_then(|_| self.progress.flush());
        if let Err(e) = line {
            self.failed = true;
            return Some(Err(e));
        }
        Some(Ok(ScenarioRun { scenario, results }))
    }
}
