//! `hawkes`: simulate, fit, select, test and benchmark multivariate
//! exponential Hawkes processes with inhibition.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Parser)]
#[command(
    name = "hawkes",
    version,
    about = "Exact likelihood toolkit for Hawkes processes with inhibition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one realization by thinning.
    Simulate(SimulateArgs),
    /// Maximum-likelihood fit on one or more event files.
    Fit(FitArgs),
    /// Recover the interaction support and refit on it.
    Select(SelectArgs),
    /// Time-rescaling goodness-of-fit tests.
    Gof(GofArgs),
    /// Run the full simulation study for one scenario.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Model document (JSON). Alternative to --scenario.
    #[arg(required_unless_present = "scenario", conflicts_with = "scenario")]
    pub model: Option<PathBuf>,
    /// Built-in scenario: S1, S2 or S3.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Stop after this many events.
    #[arg(long, required_unless_present = "horizon", conflicts_with = "horizon")]
    pub events: Option<usize>,
    /// Stop at this time.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
pub enum ObjectiveArg {
    Exact,
    Approx,
}

#[derive(Args)]
pub struct FitArgs {
    /// Event files; several files are fitted jointly.
    #[arg(required = true)]
    pub events: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hold every interaction at zero (homogeneous Poisson fit).
    #[arg(long)]
    pub no_interactions: bool,
    /// Dimension for files without a `# dim=` line.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Eps,
    Cfe,
    Cfst,
}

#[derive(Copy, Clone, ValueEnum)]
pub enum ScoreArg {
    Alpha,
    KernelMass,
}

#[derive(Args)]
pub struct SelectArgs {
    /// Fitted model document (the unconstrained MLE).
    pub model: PathBuf,
    /// Training event files.
    #[arg(required = true)]
    pub events: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// ε for eps (a number in [0, 1) or `auto`), γ for cfe and cfst.
    #[arg(long)]
    pub level: Option<String>,
    /// Held-out event files scored when --level auto.
    #[arg(long, num_args = 1..)]
    pub test: Vec<PathBuf>,
    /// Build pseudo-realizations by concatenating K realizations.
    #[arg(long, value_name = "K")]
    pub resample: Option<usize>,
    /// Number of pseudo-realizations built by --resample.
    #[arg(long, default_value_t = 25)]
    pub reps: usize,
    /// A single events file is cut into this many equal windows before resampling.
    #[arg(long, default_value_t = 10)]
    pub windows: usize,
    #[arg(long, value_enum, default_value = "alpha")]
    pub score: ScoreArg,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Sign matrix CSV; defaults to the --out path with a `.support.csv` suffix.
    #[arg(long)]
    pub support_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GofArgs {
    pub model: PathBuf,
    /// Test event files; p-values are averaged over them.
    #[arg(required = true)]
    pub events: Vec<PathBuf>,
    /// Benjamini–Hochberg level.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Also use the interval from 0 to the first event.
    #[arg(long)]
    pub include_first: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Ordered p-values CSV; defaults to the --out path with a `.ordered.csv` suffix.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// S1, S2, S3 or D10-spec (the latter needs --model).
    #[arg(long)]
    pub scenario: String,
    /// Model document for D10-spec.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 25)]
    pub replications: usize,
    #[arg(long, default_value_t = 5000)]
    pub events: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value = "alpha")]
    pub score: ScoreArg,
    /// Confidence level γ for CfE and CfSt.
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("HAWKES_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("HAWKES_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Select(a) => commands::select(a),
        Command::Gof(a) => commands::gof(a),
        Command::Bench(a) => commands::bench(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
