//! Command-line front end for the coherent-SFG simulator.
//!
//! Exit codes: 0 success (warnings go into the JSON summary), 2 configuration
//! error (message names the offending field), 3 artifact write failure.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RawConfig;
use crate::error::CliError;
use crate::run::{execute, resolve_scan_range, Experiment};

#[derive(Parser)]
#[command(
    name = "sfg",
    version,
    about = "Simulator for coherent sum-frequency detection of broadband entangled photon pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for scan points and Monte Carlo draws (0 = automatic).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// RNG seed override for Monte Carlo experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the quadratic spectral phase and record the lock-in signal.
    GddScan,
    /// Sweep the shaper transmission (optionally seed-compensated).
    LossScan,
    /// Sweep the residue phase.
    ResidueScan,
    /// Emit the two-pass spectral interferogram.
    Su11Spectrum,
    /// Compare the perturbative pump corrections against exact evolution.
    OracleValidate,
    /// Run the classical matched-filter baseline.
    MatchedFilter,
    /// Evaluate the time/frequency separability product.
    Separability,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::GddScan => Experiment::GddScan,
            Command::LossScan => Experiment::LossScan,
            Command::ResidueScan => Experiment::ResidueScan,
            Command::Su11Spectrum => Experiment::Su11Spectrum,
            Command::OracleValidate => Experiment::OracleValidate,
            Command::MatchedFilter => Experiment::MatchedFilter,
            Command::Separability => Experiment::Separability,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match try_run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn try_run(cli: &Cli) -> Result<(), CliError> {
    let experiment = cli.command.experiment();
    let raw = RawConfig::load(cli.config.as_deref())?;
    let mut config = raw.resolve()?;

    if let Some(out) = &cli.out {
        config.output.directory = out.display().to_string();
    }
    if let Some(seed) = cli.seed {
        config.run.rng_seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.run.workers = workers;
    }
    if config.run.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.run.workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("run.workers: {e}")))?;
    }

    resolve_scan_range(&raw, &mut config, experiment)?;
    let out_dir = PathBuf::from(&config.output.directory);
    execute(experiment, &mut config, &out_dir)
}
