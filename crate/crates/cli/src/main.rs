//! `esid`: command-line driver for the esid-core toolkit.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use esid_core::{Error, LogBase};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "esid", version, about = "Capacity bounds and code evaluation for effectively-secret identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Base {
    Bits,
    Nats,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Bits => LogBase::Two,
            Base::Nats => LogBase::Natural,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Serialize)]
struct Common {
    /// Logarithm base of reported values.
    #[arg(long, value_enum, default_value_t = Base::Bits)]
    base: Base,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random restarts of the bound optimizers.
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    /// Numerical tolerance; each command documents its default.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; stdout when omitted. Written atomically.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every capacity bound on a wiretap channel.
    Bounds(commands::BoundsArgs),
    /// Reproduce the reversely degraded BEC/BSC example and its sweep.
    Example(commands::ExampleArgs),
    /// Decide whether the eavesdropper channel is degraded w.r.t. the legitimate one.
    Degraded(commands::DegradedArgs),
    /// Search for an input law on which the legitimate channel is worse.
    MoreCapable(commands::MoreCapableArgs),
    /// Hypothesis-testing divergence between two laws.
    Dalpha(commands::DalphaArgs),
    /// Identification code tools.
    #[command(subcommand)]
    Idcode(commands::IdcodeCommand),
    /// Run randomized property suites.
    Check(commands::CheckArgs),
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Numerical(String),
    Input(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } | Error::AlphabetTooLarge { .. } => Failure::Cap(e.to_string()),
            Error::InfeasibleStealth { .. } | Error::LinearProgram(_) | Error::NoAdmissibleGamma => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => commands::bounds(a),
        Command::Example(a) => commands::example(a),
        Command::Degraded(a) => commands::degraded(a),
        Command::MoreCapable(a) => commands::more_capable(a),
        Command::Dalpha(a) => commands::dalpha(a),
        Command::Idcode(c) => commands::idcode(c),
        Command::Check(a) => commands::check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
