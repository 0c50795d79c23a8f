//! `hjm-levy`: classify, solve, simulate and verify forward-rate fields from a TOML config.
//!
//! Exit codes: `0` success or pass, `1` failure, divergence or numerical abort, `2` config error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hjm-levy", version, about = "Forward-rate fields driven by Lévy noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; every key has a default.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set model.p=0.5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Random seed (overrides `mc.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Decide whether a bounded solution exists and print the evidence.
    Classify,
    /// Simulate one path, solve the fixed point and write the field.
    Solve,
    /// Simulate one jump path and write it as CSV.
    Simulate,
    /// Monte Carlo check of discounted bond prices.
    Martingale,
    /// Classify the built-in examples against their known verdicts.
    Examples,
}

pub enum Status {
    Success,
    Failure,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Run(String),
    Io(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("mc.seed={seed}"));
    }
    let mut cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Classify => commands::classify_cmd(&cfg),
        Command::Solve => commands::solve_cmd(&cfg),
        Command::Simulate => commands::simulate_cmd(&cfg),
        Command::Martingale => commands::martingale_cmd(&cfg),
        Command::Examples => commands::examples_cmd(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Failure) => ExitCode::from(1),
        Err(CliError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(1)
        }
    }
}
