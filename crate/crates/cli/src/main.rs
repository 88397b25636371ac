use std::fmt;
use std::fs;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod input;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input; exit code 2.
    Usage(String),
    /// Evaluation or numerical breakdown; exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CATAFIND_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("CATAFIND_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let (text, out) = match &cli.command {
        Command::Find(a) => (commands::find(a, echo)?, &a.out),
        Command::Check(a) => (commands::check(a, echo)?, &a.out),
        Command::Scan(a) => (commands::scan_grid(a, echo)?, &a.out),
        Command::CountMinors(a) => (commands::count_minors(a, echo)?, &a.out),
        Command::Boardman(a) => (commands::boardman(a, echo)?, &a.out),
    };
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("catafind: {e}");
            ExitCode::from(e.code())
        }
    }
}
