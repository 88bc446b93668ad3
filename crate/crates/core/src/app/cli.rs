//! Command-line definition and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{
    cmd_check, cmd_classify, cmd_example1, cmd_powers, cmd_shift, parse_tolerance, AppError,
    Outcome, DEFAULT_HORIZON,
};
use crate::harness::DEFAULT_MAX_DIM;
use crate::numeric::ToleranceContext;

#[derive(Debug, Parser)]
#[command(
    name = "posinorm",
    version,
    about = "Posinormality, ascent/descent and weighted-shift analysis of matrices"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Tolerances: one number for all, or `rank=..,psd=..,residual=..`.
    #[arg(long, global = true, env = "POSINORM_TOL")]
    pub tol: Option<String>,
    /// Emit the canonical JSON report (default).
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Emit a human-readable summary instead of JSON.
    #[arg(long, global = true)]
    pub text: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a square matrix read from a MatrixFile.
    Classify { file: PathBuf },
    /// Classify T, T^2, ..., T^N and report the kernel/range chains.
    Powers {
        file: PathBuf,
        #[arg(long)]
        max_n: usize,
    },
    /// Posinormality of powers of a weighted shift.
    Shift {
        /// const:c | pow:p | recip | bilrecip | geom:r | list:a,b,...
        #[arg(long)]
        weights: String,
        /// Powers to analyse (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "1")]
        n: Vec<usize>,
        /// Number of windows scanned when no closed form is known.
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
    },
    /// Per-block constants, blow-up curve and block-structure checks.
    Example1 {
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// Run seeded property suites.
    Check {
        /// douglas | t1c1 | t3 | t4 | t5 | chains | all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub fn execute(cli: &Cli) -> Result<Outcome, AppError> {
    let tol = match &cli.global.tol {
        Some(spec) => parse_tolerance(spec)?,
        None => ToleranceContext::default(),
    };
    match &cli.command {
        Command::Classify { file } => cmd_classify(file, &tol),
        Command::Powers { file, max_n } => cmd_powers(file, *max_n, &tol),
        Command::Shift {
            weights,
            n,
            horizon,
        } => cmd_shift(weights, n, *horizon, &tol),
        Command::Example1 { k_max, depth } => cmd_example1(*k_max, *depth, &tol),
        Command::Check {
            suite,
            trials,
            dim,
            seed,
        } => cmd_check(suite, *trials, *dim, *seed, &tol),
    }
}

/// Runs the parsed command, writes its output and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(outcome) => {
            if cli.global.text {
                print!("{}", outcome.text);
            } else {
                println!("{}", outcome.document.to_canonical());
            }
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
