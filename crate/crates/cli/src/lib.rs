//! Command-line front end: configuration, parameter sweeps and file emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::format::{Emitter, Format};

#[derive(Debug, Parser)]
#[command(
    name = "sqzcool",
    version,
    about = "Sideband cooling with squeezed light: closed forms, spectra, thermometry"
)]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format (overrides [output] format).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived rates, limits and detunings for the configured system.
    Derive,
    /// Bath-occupancy maps over cavity linewidth and detuning.
    Map,
    /// Detected output spectra around the mechanical sidebands.
    Spectra,
    /// Phonon occupancy against injected squeezing.
    Coolcurve,
    /// Fit measured sidebands and retrieve the drive state and occupancy.
    Fit {
        /// Extra inputs as `<upper|lower>_<theta0|theta0_minus_pi>=<path>`.
        inputs: Vec<String>,
    },
}

pub struct Context {
    pub config: RunConfig,
    pub emitter: Emitter,
}

/// Runs one invocation; returns the paths written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let config = RunConfig::load(path)?;
    let dir = cli.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let default = match cli.command {
        Command::Derive | Command::Fit { .. } => Format::Json,
        _ => Format::Csv,
    };
    let format = cli.format.or(config.format).unwrap_or(default);
    let mut cx = Context { emitter: Emitter::new(&dir, format)?, config };
    let mut work = || match &cli.command {
        Command::Derive => commands::derive::run(&mut cx),
        Command::Map => commands::map::run(&mut cx),
        Command::Spectra => commands::spectra::run(&mut cx),
        Command::Coolcurve => commands::coolcurve::run(&mut cx),
        Command::Fit { inputs } => commands::fit::run(&mut cx, inputs),
    };
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("--threads {n}: {e}")))?;
            pool.install(work)?;
        }
        None => work()?,
    }
    Ok(cx.emitter.written().to_vec())
}
