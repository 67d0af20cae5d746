mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use config::{FileConfig, RunConfig};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<mbot::Error> for CliError {
    fn from(e: mbot::Error) -> Self {
        use mbot::Error as E;
        match e {
            E::Io(_) | E::Csv(_) | E::Image(_) | E::UnsupportedFormat(_) => CliError::Io(e.to_string()),
            E::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let cfg = RunConfig::resolve(cli.seed, cli.workers, cli.out, file)?;
    match cfg.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Validation(format!("cannot start {n} workers: {e}")))?;
            pool.install(|| commands::dispatch(&cli.command, &cfg))
        }
        None => commands::dispatch(&cli.command, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbot: {e}");
            ExitCode::from(e.code())
        }
    }
}
