//! `irp`: generate instances, run searches, enumerate exact fronts, solve
//! single routing problems and serve the HTTP API.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input.

mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use irp_core::benchgen::ScenarioKind;

#[derive(Debug, Parser)]
#[command(name = "irp", version, about = "Biobjective inventory routing solver")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a benchmark instance from a geometry file.
    Generate(GenerateArgs),
    /// Run the reference-point search and write a run bundle.
    Solve(SolveArgs),
    /// Enumerate every frequency vector up to a bound and write the exact front.
    Enumerate(EnumerateArgs),
    /// Solve a single capacitated routing problem.
    VrpSolve(VrpSolveArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long, value_parser = parse_scenario)]
    scenario: ScenarioKind,
    #[arg(long)]
    periods: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vehicle capacity.
    #[arg(long)]
    capacity: i64,
    #[arg(long)]
    out: PathBuf,
    /// Relative half-width of the demand band.
    #[arg(long, default_value_t = 0.25)]
    deviation: f64,
    /// Storage capacity as a multiple of the base demand.
    #[arg(long, default_value_t = 10.0)]
    storage_factor: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SearchSolver {
    Savings,
    Rtr,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Number of reference points (odd, at least 3).
    #[arg(long)]
    refpoints: usize,
    #[arg(long, value_enum, default_value = "rtr")]
    vrp: SearchSolver,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the run bundle.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long)]
    max_evaluations: Option<u64>,
    #[arg(long)]
    max_seconds: Option<f64>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    max_freq: u32,
    /// Output archive file (CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RoutingSolver {
    Savings,
    Rtr,
    Exact,
}

#[derive(Debug, Args)]
struct VrpSolveArgs {
    /// Routing problem file (JSON).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "rtr")]
    vrp: RoutingSolver,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory for persisted instances and runs; in-memory when absent.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

fn parse_scenario(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: irp_core::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Solve(a) => commands::solve(a),
        Command::Enumerate(a) => commands::enumerate(a),
        Command::VrpSolve(a) => commands::vrp_solve(a),
        Command::Serve(a) => commands::serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
