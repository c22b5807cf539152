//! `vqlsbench`: run VQLS optimizer benchmarks, solve single instances and
//! re-summarize results.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on bad input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "vqlsbench",
    version,
    about = "Variational quantum linear solver optimizer benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the experiment matrix described by a config file and write
    /// runs.csv, summary.csv and manifest.txt to the output directory
    /// (overridden by the VQLSBENCH_OUT environment variable).
    Run {
        /// Path to the benchmark config file.
        config: PathBuf,
        /// Maximum number of runs executed concurrently; overrides
        /// `parallel` in the config's [output] section.
        #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
        parallel: Option<u64>,
    },
    /// Run one optimization and print the final cost, units used and the
    /// fidelity against the classical solution.
    Solve {
        /// Built-in instance (A1, A2, A3) or path to a problem file.
        problem: String,
        /// Optimizer name (see `vqlsbench list`).
        optimizer: String,
        /// Noise level: exact, shots or device.
        noise: String,
        /// Master seed; the run reproduces run 0 of the matching benchmark cell.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shots per expectation term on sampling backends.
        #[arg(long, default_value_t = vqls_core::cost::DEFAULT_SHOTS, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        /// Evaluation budget in units [default: 200 per qubit].
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        /// Number of entangling blocks in the ansatz.
        #[arg(long, default_value_t = vqls_core::problem::DEFAULT_DEPTH)]
        depth: usize,
        /// Single-qubit depolarizing probability (device noise).
        #[arg(long)]
        p1: Option<f64>,
        /// Two-qubit depolarizing probability (device noise).
        #[arg(long)]
        p2: Option<f64>,
        /// Readout flip probability (device noise).
        #[arg(long)]
        p_readout: Option<f64>,
    },
    /// Recompute summary statistics from a runs.csv file.
    Stats {
        /// Path to runs.csv.
        runs: PathBuf,
        /// Number of best runs per cell to summarize. Defaults to the top_k
        /// recorded in a manifest.txt next to the runs file, else 50
        /// (clamped to each cell's run count).
        #[arg(long, value_name = "K", value_parser = clap::value_parser!(u64).range(1..))]
        top_k: Option<u64>,
        /// Write the summary here instead of to standard output.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// List built-in problems, optimizers and noise levels.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, parallel } => commands::run(&config, parallel.map(|n| n as usize)),
        Command::Solve {
            problem,
            optimizer,
            noise,
            seed,
            shots,
            budget,
            depth,
            p1,
            p2,
            p_readout,
        } => commands::solve(&commands::SolveArgs {
            problem,
            optimizer,
            noise,
            seed,
            shots,
            budget,
            depth,
            p1,
            p2,
            p_readout,
        }),
        Command::Stats { runs, top_k, out } => commands::stats(&runs, top_k.map(|k| k as usize), out.as_deref()),
        Command::List => commands::list(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vqlsbench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
