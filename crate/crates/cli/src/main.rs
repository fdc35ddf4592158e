//! `seqpovm` command-line front end.
//!
//! Exit codes: 0 success, 1 domain violation, 2 I/O or parse error.

mod commands;
mod omega;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use seqpovm::{ScenarioKind, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "seqpovm",
    version,
    about = "Sequential single-ancilla realization of POVMs"
)]
pub struct Cli {
    /// Tolerance for POVM and state validation.
    #[arg(long, global = true, default_value_t = seqpovm::linalg::DEFAULT_TOL)]
    pub tol: f64,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; defaults to json for validate/plan and csv for simulate/usd.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    ConclusivenessFirst,
    StateFirst,
    Both,
}

impl ScenarioArg {
    pub fn kinds(self) -> Vec<ScenarioKind> {
        match self {
            ScenarioArg::ConclusivenessFirst => vec![ScenarioKind::ConclusivenessFirst],
            ScenarioArg::StateFirst => vec![ScenarioKind::StateFirst],
            ScenarioArg::Both => ScenarioKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a POVM file describes a valid measurement.
    Validate { file: PathBuf },

    /// Build a measurement tree and print it with its circuits.
    Plan {
        file: PathBuf,
        #[arg(long, default_value = "binary-search", value_parser = parse_strategy)]
        strategy: Strategy,
    },

    /// Run a POVM file on a state: exact probabilities, optional sampling.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value = "binary-search", value_parser = parse_strategy)]
        strategy: Strategy,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Unambiguous discrimination sweep over angles.
    Usd {
        /// Comma-separated angles in radians; `pi/4`, `pi/6`, `0.1*pi` are accepted.
        #[arg(long, value_delimiter = ',', value_parser = omega::parse_angle, required = true)]
        omega: Vec<f64>,
        #[arg(long, value_enum, default_value = "both")]
        scenario: ScenarioArg,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
