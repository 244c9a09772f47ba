mod axioms;
mod basel;
mod config;
mod measures;
mod output;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use scenrisk::RiskError;

use crate::output::CliError;

#[derive(Debug, Parser)]
#[command(name = "scenrisk", version, about = "Scenario-based risk measures")]
struct Cli {
    /// TOML or JSON file with per-command sections; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized probe.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scenario risk measures of one variable.
    Measures(measures::Args),
    /// Brute-force axiom checks on a distortion or set function.
    Axioms(axioms::Args),
    /// Stressed ES, stress ratio and IMCC on a price panel.
    Basel(basel::Args),
    /// Economic scenarios from target, VIX and index series.
    Scenarios(scenarios::Args),
}

/// Options shared by every command after merging the config file.
pub struct Globals {
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub config: Option<config::ConfigFile>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.config.as_deref().map(config::ConfigFile::load).transpose()?;
    let seed = cli.seed.or(config.as_ref().and_then(|c| c.seed)).unwrap_or(0);
    let g = Globals {
        seed,
        output: cli.output,
        format: cli.format,
        config,
    };
    match cli.command {
        Command::Measures(a) => measures::run(a, &g),
        Command::Axioms(a) => axioms::run(a, &g),
        Command::Basel(a) => basel::run(a, &g),
        Command::Scenarios(a) => scenarios::run(a, &g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return CliError::usage(e.to_string().trim_end()).report();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}

impl From<RiskError> for CliError {
    fn from(e: RiskError) -> Self {
        CliError::Risk(e)
    }
}
