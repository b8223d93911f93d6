use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use truncsim::cli::config::{parse_config, OUT_DIR_ENV, THREADS_ENV};
use truncsim::cli::figure::{emit_figure, FigureStyle, Metric};
use truncsim::cli::output::read_summaries;
use truncsim::cli::{run, CliError};
use truncsim::scenario::{apply_sensitivity, build_core_grid, OutcomeKind, Sensitivity, SetTag};

#[derive(Parser)]
#[command(name = "truncsim", version, about = "Simulate outcome truncation in two-arm trials")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every scenario in a config, then write summaries, figures and a manifest.
    Run { config: PathBuf },
    /// Draw a faceted chart from a summary CSV.
    Plot {
        summary: PathBuf,
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
        /// Keep the OR 5 / 5 SD grid points.
        #[arg(long)]
        include_extreme: bool,
    },
    /// List the scenarios of a standard grid without running them.
    Grid {
        #[arg(long, value_parser = parse_set)]
        set: SetTag,
        #[arg(long, value_parser = parse_outcome)]
        outcome: OutcomeKind,
        #[arg(long, value_parser = parse_sensitivity, default_value = "core")]
        sensitivity: Sensitivity,
        #[arg(long)]
        print: bool,
    },
}

fn parse_set(s: &str) -> Result<SetTag, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown set \"{s}\""))
}

fn parse_outcome(s: &str) -> Result<OutcomeKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown outcome \"{s}\""))
}

fn parse_sensitivity(s: &str) -> Result<Sensitivity, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase()))
        .map_err(|_| format!("unknown sensitivity \"{s}\""))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config } => {
            let mut cfg = parse_config(&config)?;
            cfg.apply_env(std::env::var(OUT_DIR_ENV).ok(), std::env::var(THREADS_ENV).ok())?;
            let report = run(&cfg, io::stderr().lock())?;
            for f in &report.files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Plot { summary, metric, out, include_extreme } => {
            let rows = read_summaries(&summary)?;
            emit_figure(&rows, metric, FigureStyle { include_extreme }, &out)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Grid { set, outcome, sensitivity, print } => {
            let grid = apply_sensitivity(&build_core_grid(set, outcome), sensitivity);
            if print {
                println!("scenario_id\tn\tor_intermediate\teffect_outcome");
                for s in &grid {
                    println!("{}\t{}\t{}\t{}", s.id(), s.n, s.or_intermediate(), s.effect_outcome());
                }
            } else {
                println!("{} scenarios", grid.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
