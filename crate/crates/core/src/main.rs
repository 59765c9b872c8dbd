use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use snn_resilience::experiment::{cmd_compare, cmd_prune, cmd_stats, cmd_sweep, cmd_train, Overrides};

/// Evolve, prune and fault-test spiking neural networks.
#[derive(Parser, Debug)]
#[command(name = "snnres", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replaces the master seed and the sweep seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve one network and write best_network.json, generations.csv and manifest.json.
    Train,
    /// Remove low-frequency hidden neurons from trained networks.
    Prune {
        #[arg(required = true)]
        networks: Vec<PathBuf>,
    },
    /// Fault k synapses per trial and record the resulting performance.
    Sweep {
        #[arg(required = true)]
        networks: Vec<PathBuf>,
    },
    /// Compare the sweep outputs of two run directories.
    Compare { run_a: PathBuf, run_b: PathBuf },
    /// Spiking-frequency and size statistics of networks.
    Stats {
        #[arg(required = true)]
        networks: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
    };
    let config = || {
        cli.config.clone().ok_or_else(|| {
            eprintln!("error: --config is required for this command");
            ExitCode::from(1)
        })
    };
    let result = match &cli.command {
        Command::Train => match config() {
            Ok(c) => cmd_train(&c, &overrides),
            Err(code) => return code,
        },
        Command::Prune { networks } => match config() {
            Ok(c) => cmd_prune(&c, networks, &overrides),
            Err(code) => return code,
        },
        Command::Sweep { networks } => match config() {
            Ok(c) => cmd_sweep(&c, networks, &overrides),
            Err(code) => return code,
        },
        Command::Stats { networks } => match config() {
            Ok(c) => cmd_stats(&c, networks, &overrides),
            Err(code) => return code,
        },
        Command::Compare { run_a, run_b } => cmd_compare(run_a, run_b, &overrides),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
