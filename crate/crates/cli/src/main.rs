//! `detx`: exponent computation, proportion sweeps, rejection analysis,
//! Monte Carlo simulation, and reference-evaluator checks, driven by JSON
//! configs and emitting deterministic CSV.
//!
//! Exit codes: 0 when every computation converged, 1 on configuration or
//! usage errors, 2 when results were produced but something did not
//! converge (the CSV's `converged` column or failure counts say what).

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ThresholdChoice, Validated};

/// Failure class that aborts a command before results exist.
pub enum Failure {
    Config(String),
}

#[derive(Parser)]
#[command(
    name = "detx",
    version,
    about = "Error and rejection exponents for distributed detection with trained tests"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output CSV path; defaults to the config's `out`, then stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// RNG seed, overriding the config's simulation seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Threshold handling, overriding the config.
    #[arg(long, value_enum)]
    threshold: Option<ThresholdChoice>,
    /// Lattice resolution, overriding the config.
    #[arg(long, value_name = "R")]
    resolution: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Binary error exponent of the configured instance.
    Exponent {
        #[command(flatten)]
        common: Common,
        /// Single-channel noiseless closed form on the raw sources.
        #[arg(long, conflicts_with = "vi")]
        gutman: bool,
        /// Identity-cover processing assumption.
        #[arg(long)]
        vi: bool,
    },
    /// Error exponent as a function of the training ratio.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
    },
    /// Exponent surface over test/training channel proportions.
    SweepAb {
        #[command(flatten)]
        common: Common,
    },
    /// Rejection exponents across thresholds and hypotheses.
    MaryReject {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo outcome rates of the configured decision rule.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Compare engine values against the lattice reference evaluators.
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
}

/// A loaded config with the command-line overrides folded in.
pub struct Effective {
    pub v: Validated,
    pub out: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub threshold: ThresholdChoice,
    pub resolution: Option<f64>,
}

fn effective(common: Common) -> Result<Effective, Failure> {
    let v = config::load(&common.config)?;
    let out = common.out.or_else(|| v.cfg.out.clone());
    let threshold = common.threshold.or(v.cfg.threshold).unwrap_or(ThresholdChoice::Raw);
    let resolution = common.resolution.or(v.cfg.resolution);
    Ok(Effective { v, out, seed_override: common.seed, threshold, resolution })
}

fn dispatch(cmd: Cmd) -> Result<bool, Failure> {
    match cmd {
        Cmd::Exponent { common, gutman, vi } => {
            commands::exponent(&effective(common)?, gutman, vi)
        }
        Cmd::SweepAlpha { common } => commands::sweep_alpha_cmd(&effective(common)?),
        Cmd::SweepAb { common } => commands::sweep_ab_cmd(&effective(common)?),
        Cmd::MaryReject { common } => commands::mary_reject_cmd(&effective(common)?),
        Cmd::Simulate { common } => commands::simulate_cmd(&effective(common)?),
        Cmd::OracleCheck { common } => commands::oracle_check_cmd(&effective(common)?),
    }
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors; usage problems share the
            // config-error exit code.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("warning: not every computation converged");
            2
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn main() {
    std::process::exit(run());
}
