//! The `qsl` command-line surface.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or schema error,
//! 3 numerical failure.

pub mod run;
pub mod spec;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::geometry::PATH_TOLERANCE;

pub use run::{
    bound_csv, bound_rows, ingest_density_trajectory, run_bound, run_evolve, run_mixed, RunOptions,
};
pub use spec::{ModelSpec, SweepSpec};
pub use verify::{run_verify, Suite, VerifyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed")]
    Verification,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qsl",
    version,
    about = "Quantum speed limits for arbitrary state evolutions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a trajectory and its speeds as CSV.
    Evolve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of grid steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Bound reports over a sweep of evolution times as CSV.
    Bound {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `min:max:count[:log]` or a comma-separated list of T values.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        /// Allowed shortfall of S below S0 before a row is rejected.
        #[arg(long, default_value_t = PATH_TOLERANCE)]
        tolerance: f64,
    },
    /// Run the oracle cross-checks and print a JSON report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound for a density-matrix trajectory, via purification.
    Mixed {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = PATH_TOLERANCE)]
        tolerance: f64,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}"))),
    }
}

fn check_tolerance(tolerance: f64) -> Result<(), CliError> {
    if tolerance.is_finite() && tolerance >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "tolerance must be non-negative, got {tolerance}"
        )))
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Evolve { spec, out, steps } => {
            let spec = ModelSpec::from_json(&read(spec)?)?;
            let opts = RunOptions {
                steps: *steps,
                ..RunOptions::default()
            };
            emit(out.as_deref(), &run_evolve(&spec, &opts)?)
        }
        Command::Bound {
            spec,
            out,
            sweep,
            steps,
            tolerance,
        } => {
            check_tolerance(*tolerance)?;
            let spec = ModelSpec::from_json(&read(spec)?)?;
            let sweep = sweep.as_deref().map(SweepSpec::parse).transpose()?;
            let opts = RunOptions {
                steps: *steps,
                tolerance: *tolerance,
            };
            emit(out.as_deref(), &run_bound(&spec, sweep.as_ref(), &opts)?)
        }
        Command::Verify { suite, out } => {
            let report = run_verify(*suite);
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            emit(out.as_deref(), &text)?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Verification)
            }
        }
        Command::Mixed {
            spec,
            out,
            tolerance,
        } => {
            check_tolerance(*tolerance)?;
            let output = run_mixed(&read(spec)?, *tolerance)?;
            let text = serde_json::to_string_pretty(&output).expect("report serializes") + "\n";
            emit(out.as_deref(), &text)
        }
    }
}

/// Runs the parsed command and returns the process exit code.
pub fn main_with(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qsl: {e}");
            e.exit_code()
        }
    }
}
