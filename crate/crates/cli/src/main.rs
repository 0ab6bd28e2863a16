//! `dpmix`: fit a Dirichlet process mixture to univariate data, complete the
//! posterior draws into full random mixtures, and summarize the results.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.

mod commands;
mod format;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input: exit code 2.
    Usage(String),
    /// Failure while doing the work (for example writing output): exit 3.
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<dpmix::Error> for CliError {
    fn from(e: dpmix::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "dpmix", version, about = "Dirichlet process mixture pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum What {
    Density,
    Cdf,
    Modes,
    Moments,
    Bands,
}

#[derive(Subcommand)]
enum Command {
    /// Run the marginal Gibbs sampler on a data file or the builtin
    /// `galaxies` dataset and write a draws file.
    Fit {
        /// Input path (one value per line, `#` comments) or `galaxies`.
        input: String,
        /// Retained draws.
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Discarded warm-up sweeps.
        #[arg(long, default_value_t = 2000)]
        burnin: usize,
        /// Sweeps between retained draws.
        #[arg(long, default_value_t = 150)]
        thin: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hold the concentration parameter fixed.
        #[arg(long)]
        fix_alpha: Option<f64>,
        /// Hold the base-measure location fixed.
        #[arg(long, allow_negative_numbers = true)]
        fix_mu: Option<f64>,
        /// Hold the base-measure spread multiplier fixed.
        #[arg(long)]
        fix_tau: Option<f64>,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complete every draw in a draws file into a full mixture.
    Complete {
        draws: PathBuf,
        /// Stick-mass truncation tolerance.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Probability budget for exceeding the tolerance.
        #[arg(long, default_value_t = 0.01)]
        ups: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a mixtures file (or the marginal mixtures of a draws
    /// file): plottable CSV or JSON summaries.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum)]
        what: What,
        /// Grid lower bound (derived from the samples when omitted).
        #[arg(long, allow_negative_numbers = true)]
        grid_lo: Option<f64>,
        /// Grid upper bound.
        #[arg(long, allow_negative_numbers = true)]
        grid_hi: Option<f64>,
        /// Grid points (density/cdf/moments/bands: 1000; modes: 512).
        #[arg(long)]
        grid_n: Option<usize>,
        /// Band level.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time fit sweeps and completion batches; report JSON.
    Bench {
        /// Sample sizes to benchmark, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![100usize])]
        n: Vec<usize>,
        /// Sweeps (and draws to complete) per repetition.
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Repetitions per sample size.
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit {
            input,
            iters,
            burnin,
            thin,
            seed,
            fix_alpha,
            fix_mu,
            fix_tau,
            out,
        } => commands::fit(
            &input,
            commands::FitOptions {
                iters,
                burnin,
                thin,
                seed,
                fix_alpha,
                fix_mu,
                fix_tau,
            },
            out.as_deref(),
        ),
        Command::Complete {
            draws,
            eps,
            ups,
            seed,
            out,
        } => commands::complete(&draws, eps, ups, seed, out.as_deref()),
        Command::Analyze {
            file,
            what,
            grid_lo,
            grid_hi,
            grid_n,
            level,
            out,
        } => commands::analyze(
            &file,
            what,
            commands::GridOptions {
                lo: grid_lo,
                hi: grid_hi,
                n: grid_n,
            },
            level,
            out.as_deref(),
        ),
        Command::Bench { n, iters, reps, out } => commands::bench(&n, iters, reps, out.as_deref()),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
