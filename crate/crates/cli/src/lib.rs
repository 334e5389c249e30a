//! Command-line front end for `thermal-designs`.
//!
//! Every subcommand reads a JSON [`RunConfig`](config::RunConfig), lets flags
//! override it, and writes one CSV file. See [`error::exit`] for exit codes.

pub mod check;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "thermal-designs",
    version,
    about = "Distances of thermal ensembles from quantum state t-designs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; overrides `ensemble.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of sampled Hamiltonians; overrides `ensemble.samples`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Worker threads (falls back to the config, then THERMAL_DESIGNS_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output CSV; overrides `output_path` from the config.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> CliResult<RunConfig> {
        RunConfig::load(&self.config)?.apply(&Overrides {
            seed: self.seed,
            samples: self.samples,
            threads: self.threads,
            output: self.output.clone(),
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance estimators over a β grid.
    Sweep(RunArgs),
    /// β-derivative of a sweep file plus a kink estimate.
    Derivative {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Threshold temperatures from the ground-state bound (global ensemble only).
    Threshold {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated design orders.
        #[arg(long = "t", value_delimiter = ',', required = true)]
        ts: Vec<usize>,
        /// Comma-separated accuracies in (0, 1).
        #[arg(long = "epsilon", value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
    /// Pooled density of states against the semicircle or a Gaussian.
    Dos {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Reduced-scale self-test of the numerical invariants.
    Check {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

pub fn run(cli: Cli, log: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Sweep(args) => commands::sweep(&args.load()?, log),
        Command::Derivative { input, output } => commands::derivative(&input, &output, log),
        Command::Threshold { run, ts, epsilons } => {
            commands::threshold(&run.load()?, &ts, &epsilons, log)
        }
        Command::Dos { run, bins } => commands::dos(&run.load()?, bins, log),
        Command::Check { samples } => check::run_checks(samples, log),
    }
}
