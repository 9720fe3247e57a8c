use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod output;

use error::CliError;

/// Koopman operator identification from trajectory data.
#[derive(Parser, Debug)]
#[command(name = "koopman", version)]
struct Cli {
    /// Seed for every random draw a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress reports on standard output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model from a config and trajectory CSV.
    Fit(FitArgs),
    /// Simulate a saved model from an initial state.
    Simulate(SimulateArgs),
    /// Print the eigenvalues of a saved model.
    Eig(EigArgs),
    /// Differentiate trajectory CSV columns in time.
    Diff(DiffArgs),
    /// Generate benchmark trajectories.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// JSON fit config with `observables` and `regressor` blocks.
    #[arg(long)]
    config: PathBuf,
    /// Training trajectory CSV.
    #[arg(long)]
    data: PathBuf,
    /// Model JSON to write; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of trailing input columns when the CSV has no header.
    #[arg(long)]
    n_inputs: Option<usize>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Initial state, comma separated (delay-embedded for delay models).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x0: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Input CSV with one row per step and one column per input channel.
    #[arg(long)]
    inputs: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EigFormat {
    Table,
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct EigArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = EigFormat::Table)]
    format: EigFormat,
    /// Trajectory CSV for per-mode linearity-consistency scores.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    n_inputs: Option<usize>,
}

#[derive(Args, Debug)]
struct DiffArgs {
    #[arg(long)]
    data: PathBuf,
    /// fd2, fd4, savitzky_golay, spectral, spline or total_variation.
    #[arg(long, default_value = "fd2")]
    method: String,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    smoothing: Option<f64>,
    #[arg(long)]
    tv_lambda: Option<f64>,
    #[arg(long)]
    tv_iters: Option<usize>,
    #[arg(long)]
    periodic: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// slow_manifold, vdp_osc, lorenz, forced_duffing, linear2d, drss or torus.
    #[arg(long)]
    system: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Parameter overrides, `key=value`, repeatable or comma separated.
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
    /// Drive forced systems with seeded Gaussian inputs instead of zero.
    #[arg(long)]
    random_input: bool,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Context { seed: cli.seed, json: cli.json, quiet: cli.quiet };
    let result: Result<(), CliError> = match &cli.command {
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Eig(a) => commands::eig(&ctx, a),
        Command::Diff(a) => commands::diff(&ctx, a),
        Command::Bench(a) => commands::bench(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
