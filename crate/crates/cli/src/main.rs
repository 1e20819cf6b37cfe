use std::path::PathBuf;

use clap::{Parser, Subcommand};
use fdbeam::run::{self, RunManifest};

/// Full-duplex mmWave beamforming experiments.
#[derive(Parser)]
#[command(name = "fdbeam", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered experiment and write CSV plot data plus a metadata
    /// echo into the output directory.
    Run {
        /// Path to a `key = value` configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Experiment name (see `fdbeam list`).
        #[arg(long)]
        experiment: String,
        /// Output directory; created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Master seed for the Monte Carlo trials.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Cap the number of worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the registered experiments.
    List,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config, experiment, out, seed, trials, jobs } => {
            run::execute(&RunManifest { config, experiment, out, seed, trials, jobs })
        }
        Command::List => {
            print!("{}", run::list());
            Ok(())
        }
    }
}
