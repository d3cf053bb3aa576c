//! Command-line driver: Monte Carlo simulation studies, single-dataset
//! fitting with any stopping rule, Scaled-Lasso noise estimation, and the
//! theory-check suite.
//!
//! Exit codes: 0 success (including recorded run failures), 1 runtime or
//! deterministic-check failure, 2 invalid configuration or usage.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod output;

#[derive(Parser)]
#[command(
    name = "ompboost",
    about = "Greedy L2-boosting with sequential early stopping",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment from a JSON config and write CSV/JSON
    /// results.
    Simulate {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for runs.csv and summary.json.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: available parallelism). Results do not
        /// depend on this.
        #[arg(long)]
        workers: Option<usize>,
        /// Assert the deterministic identities on every replication.
        #[arg(long)]
        debug_asserts: bool,
    },
    /// Fit one dataset (CSV) and select an iteration with the named rule.
    Fit {
        /// Dataset CSV: header row, response in the first column; optional
        /// `f_star` and `epsilon` columns carry ground truth.
        #[arg(long)]
        data: PathBuf,
        /// Selection rule: tau-true-noise, tau-estimated-noise, two-step,
        /// hdaic, oracle-classical, oracle-balanced.
        #[arg(long)]
        rule: String,
        /// Rule parameter as key=value (repeatable): c_tau, lambda0_factor,
        /// c_aic, c_hdaic, m_cap, m_max.
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        /// Prepend an all-ones intercept column to the design.
        #[arg(long)]
        intercept: bool,
    },
    /// Estimate the empirical noise level of a dataset with the Scaled
    /// Lasso; prints JSON.
    NoiseEstimate {
        #[arg(long)]
        data: PathBuf,
        /// Factor under the root in `lambda0 = sqrt(factor * ln(p) / n)`.
        #[arg(long, default_value_t = 1.0)]
        lambda0_factor: f64,
    },
    /// Run the theory-check suite over a seeded batch of replications;
    /// exits 1 when a deterministic check fails.
    Check {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Test hook: perturb the residual sequence to force a failure.
        #[arg(long, hide = true)]
        corrupt_r_sq: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            out,
            workers,
            debug_asserts,
        } => commands::simulate(&config, &out, workers, debug_asserts),
        Command::Fit {
            data,
            rule,
            params,
            intercept,
        } => commands::fit(&data, &rule, &params, intercept),
        Command::NoiseEstimate {
            data,
            lambda0_factor,
        } => commands::noise_estimate(&data, lambda0_factor),
        Command::Check {
            config,
            workers,
            corrupt_r_sq,
        } => commands::check(&config, workers, corrupt_r_sq),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
