//! Command-line front end: scenario files, operator cache, output formats
//! and the subcommands.

// `!(x > 0.0)` style checks are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod model;
pub mod output;

use clap::{Args, Parser, Subcommand};
use commands::cache::CacheAction;
use commands::Run;
use config::{Format, Scenario};
use error::CliError;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "spinfluid", version, about = "Rigid body with a fluid-filled spherical cavity: equilibria, spectra, simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides `initial.seed`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=config::MAX_SEED))]
    pub seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides `output.format`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct CacheArgs {
    #[arg(value_enum)]
    pub action: CacheAction,
    /// Scenario whose operators to build; its `basis.cache_dir` wins over `--out`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cache directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Permanent rotations and their variational verdicts.
    Equilibria(Common),
    /// Linearized spectra at the selected axes.
    Spectrum(Common),
    /// Time integration from the scenario's initial data.
    Simulate(Common),
    /// The scenario's `[sweep]`: crossing, inertia panel or refinement.
    Sweep(Common),
    /// Manage the operator cache.
    Cache(CacheArgs),
}

fn threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs a parsed command line and returns lines for the terminal.
pub fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    type Execute = fn(&Run) -> Result<Vec<PathBuf>, CliError>;
    let (common, execute): (Common, Execute) = match cli.command {
        Command::Equilibria(c) => (c, commands::equilibria::execute),
        Command::Spectrum(c) => (c, commands::spectrum::execute),
        Command::Simulate(c) => (c, commands::simulate::execute),
        Command::Sweep(c) => (c, commands::sweep::execute),
        Command::Cache(args) => {
            threads(args.threads)?;
            let scenario = args.config.as_deref().map(Scenario::load).transpose()?;
            let dir = commands::cache::cache_dir(scenario.as_ref(), &args.out);
            return commands::cache::execute(args.action, scenario, &dir);
        }
    };
    threads(common.threads)?;
    let scenario = Scenario::load(&common.config)?;
    let run = Run::new(scenario, common.out, common.seed, common.format);
    Ok(execute(&run)?.into_iter().map(|p| p.display().to_string()).collect())
}
