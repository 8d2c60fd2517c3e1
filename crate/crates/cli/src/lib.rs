//! Command surface for the `testopt` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod scenario;
pub mod verify;

pub use verify::ClosedForms;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Input(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Mandatory,
    Flexible,
    Restricted,
    Blind,
}

#[derive(Debug, Parser)]
#[command(name = "testopt", version, about = "Optimal admissions policies under social pressure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every cell of a scenario under one testing regime.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        /// Print a machine-readable JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Payoff as a function of the imputed score for one cell, as CSV.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        cell: String,
        #[arg(long, allow_hyphen_values = true)]
        tau_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        tau_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-group analysis: losses, thresholds and the backfire verdict.
    Aa {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
        /// Write a pressure sweep as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        delta_min: f64,
        #[arg(long, default_value_t = 10.0)]
        delta_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Check the closed forms against the brute-force oracle.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        tau_step: f64,
        #[arg(long, default_value_t = 2_000_000)]
        mc_samples: u64,
        #[arg(long)]
        json: bool,
    },
}

/// Runs one command, writing its report to `out`.
pub fn run(cli: Cli, closed: &ClosedForms, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { scenario, regime, json } => commands::solve(&scenario, regime, json, out),
        Command::Sweep {
            scenario,
            cell,
            tau_min,
            tau_max,
            steps,
            out: dest,
        } => commands::sweep(&scenario, &cell, tau_min, tau_max, steps, dest.as_deref(), out),
        Command::Aa {
            scenario,
            json,
            out: dest,
            delta_min,
            delta_max,
            steps,
        } => commands::aa(&scenario, json, dest.as_deref(), delta_min, delta_max, steps, out),
        Command::Verify {
            scenario,
            seed,
            tau_step,
            mc_samples,
            json,
        } => {
            let cfg = testopt_core::oracle::OracleConfig {
                tau_grid_step: tau_step,
                mc_samples,
                seed,
                ..Default::default()
            };
            verify::cmd_verify(&scenario, &cfg, closed, json, out)
        }
    }
}

pub(crate) fn io_err(e: std::io::Error) -> CliError {
    CliError::Input(format!("i/o: {e}"))
}
