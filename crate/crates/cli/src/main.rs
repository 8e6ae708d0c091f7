//! `naimark`: decompose networks, simulate outcome statistics, run the Fock
//! space oracle and analyse the heterodyne application.
//!
//! Exit codes: 0 success, 2 configuration or domain error, 3 numerical
//! failure.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunArgs;

#[derive(Debug, Parser)]
#[command(name = "naimark", version, about = "Naimark-extended joint measurement of a1 + gamma a2^dag")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce gamma, build the mixing matrix and factor it into two-mode stages.
    Decompose {
        #[command(flatten)]
        args: RunArgs,
        /// Print the JSON document instead of the text report.
        #[arg(long)]
        json: bool,
    },
    /// Outcome density, moments and optional samples for a preparation.
    Simulate {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Truncated Fock-space checks of the network and of T.
    Verify {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Frequency-asymmetric heterodyne: gamma_C, noise budget, phase distribution.
    Heterodyne {
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<naimark::Error> for CliError {
    fn from(e: naimark::Error) -> Self {
        use naimark::Error as E;
        match e {
            E::Mass { .. } | E::RescalingOverflow { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<naimark_oracle::Error> for CliError {
    fn from(e: naimark_oracle::Error) -> Self {
        use naimark_oracle::Error as E;
        match e {
            E::Core(inner) => inner.into(),
            E::Domain(_) | E::Representability { .. } => CliError::Config(e.to_string()),
            E::Accuracy { .. } | E::MassDeficit { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Decompose { args, json } => commands::decompose(args, *json),
        Command::Simulate { args } => commands::simulate(args),
        Command::Verify { args } => commands::verify(args),
        Command::Heterodyne { args } => commands::heterodyne(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
