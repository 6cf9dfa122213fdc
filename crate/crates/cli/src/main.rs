//! `kgwell`: reproducible Klein-Gordon square-well experiments.
//!
//! Exit codes: 0 success, 1 comparison outside its thresholds, 2 invalid
//! configuration or mismatched inputs, 3 failure while running.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "kgwell", version, about = "Klein-Gordon particle in a square well")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Assert a fully deterministic run. No command draws random numbers,
    /// so this only documents the guarantee.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound-state table and graphical-solution curves.
    BoundStates,
    /// Amplitude magnitudes over a momentum grid, one CSV per depth.
    Scan,
    /// Wavepacket snapshots from the multiple-scattering expansion.
    Evolve,
    /// The same snapshots from the finite-difference solver.
    Fdtd {
        /// Also run every `convergence_dx` lattice and report the error ratios.
        #[arg(long)]
        convergence: bool,
    },
    /// Compare snapshot runs (directories or snapshot CSV files); `b` is the reference.
    Compare { run_a: PathBuf, run_b: PathBuf },
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Invalid(anyhow::anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Runtime(e.into()))?;
    }
    let load = || -> Result<RunConfig, Failure> {
        let path = cli.config.as_ref().ok_or_else(|| Failure::Invalid(anyhow::anyhow!("--config <path> is required")))?;
        RunConfig::load(path).map_err(Failure::Invalid)
    };
    match &cli.command {
        Command::BoundStates => commands::bound_states(&load()?, &cli.out),
        Command::Scan => commands::scan(&load()?, &cli.out),
        Command::Evolve => commands::evolve(&load()?, &cli.out),
        Command::Fdtd { convergence } => commands::fdtd(&load()?, &cli.out, *convergence),
        Command::Compare { run_a, run_b } => {
            let cfg = match &cli.config {
                Some(_) => Some(load()?),
                None => None,
            };
            commands::compare_runs(cfg.as_ref(), run_a, run_b, Some(&cli.out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("comparison outside thresholds");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
