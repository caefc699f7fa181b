//! The `dymart` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
//! and capacity errors.

mod commands;
pub mod output;
pub mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::generate::DEFAULT_SEED;
pub use output::{Cell, Format, Table};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Largest depth for which `walsh-table` writes the full Gram matrix.
pub const WALSH_TABLE_MAX_DEPTH: u32 = 10;

#[derive(Debug, Parser)]
#[command(name = "dymart", version, about = "Discrete stochastic calculus experiments on the dyadic sample space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Depth n (number of coin flips).
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of random trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Tolerance override NAME=VALUE; NAME may be `all`.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_assignment)]
    pub tol: Vec<(String, f64)>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Sum quadratic variation over every step instead of omitting the last.
    #[arg(long)]
    pub full_range_qv: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gram matrix of all Walsh functions.
    WalshTable(CommonArgs),
    /// Martingale representation round trip on seeded random martingales,
    /// or on a process file.
    Mrt {
        #[command(flatten)]
        common: CommonArgs,
        /// Process file (CSV, or binary when the extension is .bin).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Moments of the scaled walk against their closed forms.
    BmStats {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        depths: Vec<u32>,
    },
    /// Weak-expectation sweep of the Euler scheme for a named problem.
    Sde {
        /// gbm, ou or poly.
        problem: String,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        depths: Vec<u32>,
        /// Problem parameter NAME=VALUE.
        #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_assignment)]
        params: Vec<(String, f64)>,
        /// Drift polynomial coefficients (constant term first), for poly.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        drift_coeffs: Vec<f64>,
        /// Diffusion polynomial coefficients (constant term first), for poly.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        diffusion_coeffs: Vec<f64>,
    },
    /// Run every verification suite.
    VerifyAll(CommonArgs),
    /// Write a process file.
    Generate {
        #[arg(value_enum)]
        kind: ProcessKind,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Walsh transform of a random-variable CSV (or synthesis with --inverse).
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        inverse: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessKind {
    /// The scaled coin-flip walk.
    Walk,
    /// A martingale closed by a uniform random terminal value.
    Martingale,
}

fn parse_assignment(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value: f64 = value.trim().parse().map_err(|_| format!("cannot parse {value:?} as a number"))?;
    if value.is_nan() {
        return Err("value must not be NaN".into());
    }
    Ok((name.trim().to_string(), value))
}

/// Settings shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub depth: Option<u32>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub full_range_qv: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            depth: None,
            seed: DEFAULT_SEED,
            trials: None,
            tolerances: BTreeMap::new(),
            out: None,
            format: None,
            full_range_qv: false,
        }
    }
}

impl From<&CommonArgs> for ExperimentConfig {
    fn from(a: &CommonArgs) -> Self {
        ExperimentConfig {
            depth: a.depth,
            seed: a.seed,
            trials: a.trials,
            tolerances: a.tol.iter().cloned().collect(),
            out: a.out.clone(),
            format: a.format,
            full_range_qv: a.full_range_qv,
        }
    }
}

impl ExperimentConfig {
    /// Override for `name`, else the `all` override, else `default`.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances
            .get(name)
            .or_else(|| self.tolerances.get("all"))
            .copied()
            .unwrap_or(default)
    }

    pub fn depth_or(&self, default: u32) -> u32 {
        self.depth.unwrap_or(default)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// Errors that end a command before any verdict is reached.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("depth {depth} exceeds the limit {limit} for {what}")]
    Capacity { what: &'static str, depth: u32, limit: u32 },
    #[error(transparent)]
    Library(#[from] Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Library(Error::Io(e))
    }
}

/// Runs a parsed command line and returns the process exit code. Messages
/// go to stderr.
pub fn run(cli: Cli) -> u8 {
    let outcome = match &cli.command {
        Command::WalshTable(c) => commands::walsh_table(&c.into()),
        Command::Mrt { common, input } => commands::mrt(&common.into(), input.as_deref()),
        Command::BmStats { common, depths } => commands::bm_stats(&common.into(), depths),
        Command::Sde { problem, common, depths, params, drift_coeffs, diffusion_coeffs } => {
            commands::sde(&common.into(), problem, depths, params, drift_coeffs, diffusion_coeffs)
        }
        Command::VerifyAll(c) => commands::verify_all(&c.into()),
        Command::Generate { kind, common } => commands::generate(&common.into(), *kind),
        Command::Transform { input, inverse, common } => {
            commands::transform(&common.into(), input, *inverse)
        }
    };
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("dymart: {e}");
            EXIT_USAGE
        }
    }
}

pub use commands::{
    bm_stats_table, mrt_table, sde_problem, sde_table, walsh_table_matrix, SDE_PROBLEMS,
};
