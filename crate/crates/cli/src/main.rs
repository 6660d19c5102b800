mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Unphysical(String),
    CheckFailed(String),
    Io(std::io::Error),
    Library(cvsteer::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Unphysical(_) => 2,
            CliError::Usage(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Io(_) => 1,
            CliError::Library(e) => match e {
                cvsteer::Error::NotAState(_) => 2,
                cvsteer::Error::OutOfRange { .. }
                | cvsteer::Error::InvalidCombo(_)
                | cvsteer::Error::InvalidPartition(_)
                | cvsteer::Error::ModeOutOfRange { .. }
                | cvsteer::Error::TooFewSamples { .. } => 3,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "argument error: {m}"),
            CliError::Unphysical(m) => write!(f, "unphysical state: {m}"),
            CliError::CheckFailed(name) => write!(f, "check failed: {name}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<cvsteer::Error> for CliError {
    fn from(e: cvsteer::Error) -> Self {
        CliError::Library(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    let result = match &cli.command {
        Command::Build(a) => commands::build(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Tomo(a) => commands::tomo(a),
        Command::Check(a) => commands::check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvsteer: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
