#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fluid_morph::Error;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] Error),

    #[error("cannot read {0}: {1}")]
    Read(PathBuf, io::Error),

    #[error("cannot write {0}: {1}")]
    Write(PathBuf, io::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(e) if !e.is_validation() => 3,
            CliError::Write(..) => 3,
            _ => 2,
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (artifacts, passed, cfg) = match &cli.command {
        Command::Solve(cfg) => (commands::solve(cfg)?, true, cfg),
        Command::Fluid(cfg) => (commands::fluid(cfg)?, true, cfg),
        Command::Morph(cfg) => (commands::morph(cfg)?, true, cfg),
        Command::Simulate(cfg) => (commands::simulate(cfg)?, true, cfg),
        Command::Check(cfg) => {
            let (a, ok) = commands::check(cfg)?;
            (a, ok, cfg)
        }
    };
    artifacts.emit(cfg)?;
    Ok(passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
