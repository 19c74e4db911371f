//! `thg`: build hypergraph tensors, denoise signals, train and sweep
//! tensor hypergraph classifiers, and run micro-benchmarks.
//!
//! Exit codes: 0 success, 1 assertion/acceptance failure, 2 usage or
//! I/O error.

mod bench_cmd;
mod build_cmd;
mod config;
mod data;
mod demo;
mod denoise_cmd;
mod manifest;
mod train_cmd;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError { code: 2, message: message.into() }
    }

    pub fn failure(message: impl Into<String>) -> CliError {
        CliError { code: 1, message: message.into() }
    }
}

impl From<thg_core::Error> for CliError {
    fn from(e: thg_core::Error) -> CliError {
        let code = match &e {
            thg_core::Error::Io(_) | thg_core::Error::Parse { .. } => 2,
            thg_core::Error::InvalidConfig(_) => 2,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError { code: 2, message: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError { code: 2, message: format!("json: {e}") }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; all randomness derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML config file; CLI flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Emit machine-readable JSON to stdout where supported.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Parser, Debug)]
#[command(name = "thg", version, about = "tensor-hypergraph signal processing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the normalized adjacency tensor of a hypergraph.
    Build(build_cmd::BuildArgs),
    /// Denoise a hypergraph signal by iterative Laplacian smoothing.
    Denoise(denoise_cmd::DenoiseArgs),
    /// Train a node classifier.
    Train(train_cmd::TrainArgs),
    /// Evaluate a checkpoint on a dataset.
    Eval(train_cmd::EvalArgs),
    /// Sweep the (K, alpha) grid with repeated seeded runs.
    Grid(train_cmd::GridArgs),
    /// Show that distinct hypergraphs share a clique expansion but not
    /// an adjacency tensor.
    DemoInjectivity(demo::DemoArgs),
    /// Time the direct vs Fourier t-product paths.
    Bench(bench_cmd::BenchArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(args) => build_cmd::run(&cli.common, args),
        Command::Denoise(args) => denoise_cmd::run(&cli.common, args),
        Command::Train(args) => train_cmd::run_train(&cli.common, args),
        Command::Eval(args) => train_cmd::run_eval(&cli.common, args),
        Command::Grid(args) => train_cmd::run_grid(&cli.common, args),
        Command::DemoInjectivity(args) => demo::run(&cli.common, args),
        Command::Bench(args) => bench_cmd::run(&cli.common, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
