//! `tdflow`: batch front end for the implicit variational solver.
//!
//! Subcommands: `solve` (one scheme run plus diagnostics), `validate`
//! (hypothesis checks of a catalog functional), `compare` (two-trajectory
//! contraction), `study` (mesh-refinement rate table), `oracle` (PDE
//! reference solvers only). Exit codes: 0 success, 2 configuration error,
//! 3 solver failure, 4 failed diagnostic verdict.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "tdflow", version, about = "Implicit variational gradient-flow solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for randomized pieces (partitions, sampling plans).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker cap for diagnostic and ladder parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the minimizing-movement scheme and the configured diagnostics.
    Solve,
    /// Check the declared hypotheses of the configured functional.
    Validate,
    /// Run two initial data under one functional and test contraction.
    Compare,
    /// Mesh-refinement study over the configured step ladder.
    Study,
    /// Run only the PDE reference solver from the configuration.
    Oracle,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("TDFLOW_LOG")).init();
    let cli = Cli::parse();

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config PATH is required");
            return ExitCode::from(2);
        }
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let mut run_config = match config::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        run_config.seed = seed;
    }
    log::info!(
        "loaded config: space={:?} functional={}",
        run_config.space,
        run_config.functional.name
    );

    let result = match cli.command {
        Command::Solve => commands::solve(&run_config, cli.out.as_deref()),
        Command::Validate => commands::validate(&run_config, cli.out.as_deref()),
        Command::Compare => commands::compare(&run_config, cli.out.as_deref()),
        Command::Study => commands::study(&run_config, cli.out.as_deref(), cli.threads),
        Command::Oracle => commands::oracle(&run_config, cli.out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
