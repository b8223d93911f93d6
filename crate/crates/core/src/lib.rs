//! Simulation engine for outcome truncation in two-arm randomized trials.
//!
//! A [`scenario::Scenario`] fixes the data-generating model: a logistic model
//! for the intermediate event, and a normal or logistic outcome model that is
//! only observed for participants with the intermediate event. The
//! [`engine`] simulates trials, [`statcore`] analyses the truncated subgroup
//! with the usual methods (t-test; odds ratio with profile-likelihood CI,
//! chi-squared, 'N-1' chi-squared, Fisher's exact test), and [`metrics`]
//! turns the per-iteration results into bias, coverage, rejection rates, SEs
//! and missing-data counts.

pub mod cli;
pub mod dgp;
pub mod engine;
pub mod metrics;
pub mod scenario;
pub mod statcore;
pub mod stream;

pub use engine::{derive_stream, run_grid, run_scenario, IterationResult, RunPlan};
pub use metrics::{summarize, type1_slice, PerformanceSummary};
pub use scenario::{apply_sensitivity, bias_expected, build_core_grid, true_estimand, Scenario};
