//! `panelar`: batch runner for panel AR(1) simulations, Monte Carlo
//! experiments and inference.
//!
//! Configuration is layered: built-in defaults, then an optional TOML file
//! (`--config`), then dotted overrides (`--set regime.c=1.5`), then the
//! dedicated flags `--seed`, `--out` and `--emit`. The resolved configuration
//! is embedded in every JSON report, so a report can be re-run from itself.

pub mod commands;
pub mod config;
pub mod emit;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::execute;
pub use config::{resolve_config, Command, EmitFormat, RunConfig};
pub use emit::{emit_report, Envelope, Tabular, SCHEMA_VERSION};
pub use error::{CliError, CliResult};

/// Environment variable fixing the number of worker threads.
pub const THREADS_ENV: &str = "PANELAR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "panelar",
    version,
    about = "Panel AR(1) Monte Carlo laboratory and inference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Simulate one panel and write it as CSV.
    Simulate(CommonArgs),
    /// Replicate the scaled estimator error and compare with its limit law.
    Mc(CommonArgs),
    /// KS distance of S/R to the normal along a grid of N.
    BerryEsseen(CommonArgs),
    /// Empirical variance of the scaled error along a grid of T.
    VarianceCurve(CommonArgs),
    /// Confidence interval and unit-root test for a panel read from CSV.
    Infer(CommonArgs),
    /// Sample the Wiener functionals of the univariate limits.
    Wiener(CommonArgs),
    /// Run the command named in the configuration file.
    Run(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set regime.c=1.5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output stem: writes `<stem>.json`, `<stem>_stats.csv`, `<stem>_quantiles.csv`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats.
    #[arg(long, value_delimiter = ',', value_name = "FORMATS")]
    pub emit: Option<Vec<EmitFormat>>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CliCommand {
    fn split(self) -> (Option<Command>, CommonArgs) {
        match self {
            CliCommand::Simulate(a) => (Some(Command::Simulate), a),
            CliCommand::Mc(a) => (Some(Command::Mc), a),
            CliCommand::BerryEsseen(a) => (Some(Command::BerryEsseen), a),
            CliCommand::VarianceCurve(a) => (Some(Command::VarianceCurve), a),
            CliCommand::Infer(a) => (Some(Command::Infer), a),
            CliCommand::Wiener(a) => (Some(Command::Wiener), a),
            CliCommand::Run(a) => (None, a),
        }
    }
}

/// Resolves the configuration for a parsed command line.
pub fn resolve(command: CliCommand) -> CliResult<(Command, RunConfig)> {
    let (requested, args) = command.split();
    let mut cfg = resolve_config(args.config.as_deref(), &args.set)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output = Some(out);
    }
    if let Some(emit) = args.emit {
        cfg.emit = emit;
    }
    let command = match (requested, cfg.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Config(format!(
                "command line asks for {} but the configuration names {}",
                a.name(),
                b.name()
            )))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            return Err(CliError::Config(
                "the configuration names no command".into(),
            ))
        }
    };
    cfg.command = Some(command);
    Ok((command, cfg))
}

pub fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let (command, cfg) = resolve(cli.command)?;
    execute(command, &cfg)
}
