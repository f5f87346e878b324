//! `horolab`: experiment front end for the horocycle-flow laboratory.
//!
//! Exit codes: 0 success (counterexample proved and verified), 1 usage,
//! domain, or I/O error, 2 inconclusive verdict, 3 enumeration resource cap.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::FileConfig;

/// A command failure carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
    pub fn inconclusive(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<horolab::Error> for Failure {
    fn from(err: horolab::Error) -> Failure {
        let code = match err {
            horolab::Error::ResourceCap { .. } => 3,
            _ => 1,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Failure {
        Failure {
            code: 1,
            message: err.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "horolab",
    version,
    about = "Horocycle-flow laboratory: constants, counterexample certificates, \
             divergence scans, separation sweeps, and Poincare-disk plots"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for all randomized sweeps (recorded in every output).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 or unset: library default). Outputs do not depend
    /// on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct BallArgs {
    /// Word-length budget for ball enumeration.
    #[arg(long)]
    word_length: Option<usize>,
    /// Displacement cap; enables certified lower bounds.
    #[arg(long)]
    displacement: Option<f64>,
    /// Abort enumeration beyond this many elements (exit 3).
    #[arg(long)]
    max_elements: Option<usize>,
    /// Load the ball from a cache file instead of enumerating.
    #[arg(long)]
    ball: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ConstantsArgs {
    #[command(flatten)]
    ball: BallArgs,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CounterexampleArgs {
    /// Diagonal scale a > 1 of the counterexample pair.
    #[arg(long)]
    a: Option<f64>,
    /// Verification horizon: samples cover [-t_max, t_max].
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of log-spaced verification samples.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    ball: BallArgs,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    /// Pair spec: `diag:<a>` or `cohorbital:<tau>`.
    #[arg(long)]
    pair: Option<String>,
    /// Separation threshold for first_exceed.
    #[arg(long)]
    delta: Option<f64>,
    /// Scan horizon [0, t_max].
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of evenly spaced samples.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    ball: BallArgs,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    /// Number of random pairs.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated separation thresholds.
    #[arg(long)]
    deltas: Option<String>,
    /// Scan horizon per pair.
    #[arg(long)]
    t_max: Option<f64>,
    /// Samples per pair scan.
    #[arg(long)]
    scan_samples: Option<usize>,
    /// Speed field: `constant:<c>` or `sinusoidal:<amplitude>[:<phase>]`.
    #[arg(long)]
    speed: Option<String>,
    /// RK4 step for the reparametrization integrator.
    #[arg(long)]
    integrator_step: Option<f64>,
    #[command(flatten)]
    ball: BallArgs,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct PlotArgs {
    /// Horocycle time range of each trace: t in [-t_max, t_max].
    #[arg(long)]
    t_max: Option<f64>,
    /// Points per trace.
    #[arg(long)]
    samples: Option<usize>,
    /// Number of ball elements whose orbits are traced.
    #[arg(long)]
    orbits: Option<usize>,
    #[command(flatten)]
    ball: BallArgs,
    /// Output SVG path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CacheBallArgs {
    #[command(flatten)]
    ball: BallArgs,
    /// Output text path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the trace-gap and separation constants from a Cayley ball.
    Constants(ConstantsArgs),
    /// Build and verify the close-but-distinct-orbit certificate.
    Counterexample(CounterexampleArgs),
    /// Scan d_X(theta_t x, theta_t y) over [0, t_max] into a CSV.
    Scan(ScanArgs),
    /// Empirical separation frequencies over random pairs under a time change.
    Sweep(SweepArgs),
    /// Render the Poincare disk with the Bolza octagon and orbit traces.
    Plot(PlotArgs),
    /// Enumerate a ball and write its line-oriented cache file.
    CacheBall(CacheBallArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap would exit 2 on usage errors; keep 2 reserved for
            // inconclusive verdicts.
            let _ = err.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("horolab: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let threads = config::pick(&cli.threads, &file.threads, 0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    }
    let seed = config::pick(&cli.seed, &file.seed, 42);

    match cli.command {
        Command::Constants(args) => commands::constants(&args, &file, seed),
        Command::Counterexample(args) => commands::counterexample(&args, &file, seed),
        Command::Scan(args) => commands::scan(&args, &file, seed),
        Command::Sweep(args) => commands::sweep(&args, &file, seed),
        Command::Plot(args) => commands::plot(&args, &file),
        Command::CacheBall(args) => commands::cache_ball(&args, &file),
    }
}
