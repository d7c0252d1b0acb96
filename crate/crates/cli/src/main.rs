//! `grover`: HOM delay scans, Grover–Mach–Zehnder rates, phase retrieval
//! and three-axis rotation reconstruction from the command line.
//!
//! Exit codes: 0 success, 1 I/O, 2 usage, 3 numerical, 4 inversion,
//! 5 geometry.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use grover_optics::inversion::InversionError;
use grover_optics::sagnac::SagnacError;
use grover_optics::spectral::SpectralError;
use thiserror::Error;

use config::ConfigFile;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Inversion(String),
    #[error("{0}")]
    Geometry(String),
    #[error("{0}")]
    Io(String),
    /// The report is still written, then the run fails with `source`.
    #[error("{source}")]
    WithReport { report: String, source: Box<Failure> },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Inversion(_) => 4,
            Failure::Geometry(_) => 5,
            Failure::WithReport { source, .. } => source.exit_code(),
        }
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NotConverged { .. } | SpectralError::Unnormalized { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<InversionError> for Failure {
    fn from(e: InversionError) -> Self {
        match e {
            InversionError::InvalidRates => Failure::Usage(e.to_string()),
            _ => Failure::Inversion(e.to_string()),
        }
    }
}

impl From<SagnacError> for Failure {
    fn from(e: SagnacError) -> Self {
        match e {
            SagnacError::Inversion(inner) => inner.into(),
            _ => Failure::Geometry(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Pretty,
}

impl std::str::FromStr for Format {
    type Err = Failure;

    fn from_str(s: &str) -> Result<Self, Failure> {
        <Format as ValueEnum>::from_str(s, true)
            .map_err(|_| Failure::Usage(format!("unknown format `{s}` (csv or pretty)")))
    }
}

#[derive(Parser, Debug)]
#[command(name = "grover", version, about = "Two-photon interferometry with Grover four-ports")]
struct Cli {
    /// Flat TOML file supplying defaults for the subcommand's flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the result to this file instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coincidence probability versus delay for the tunable HOM setup
    HomScan(commands::hom_scan::HomScanArgs),
    /// Coincidence rates of the Grover–Mach–Zehnder interferometer
    Mz(commands::mz::MzArgs),
    /// Recover the three phases from measured coincidence rates
    Invert(commands::invert::InvertArgs),
    /// Map rotation rates to phases and back
    Sagnac(commands::sagnac::SagnacArgs),
}

/// Settings every subcommand accepts in its config file.
const COMMON_KEYS: [&str; 2] = ["format", "output"];

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let format = match cli.format {
        Some(f) => f,
        None => config
            .string("format")?
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or_default(),
    };
    let output = cli
        .output
        .or(config.string("output")?.map(PathBuf::from));
    let with_common = |keys: &[&'static str]| -> Vec<&'static str> {
        keys.iter().chain(COMMON_KEYS.iter()).copied().collect()
    };
    let result = match cli.command {
        Command::HomScan(args) => {
            config.check_keys(&with_common(commands::hom_scan::KEYS))?;
            commands::hom_scan::run(args, &config, format)
        }
        Command::Mz(args) => {
            config.check_keys(&with_common(commands::mz::KEYS))?;
            commands::mz::run(args, &config, format)
        }
        Command::Invert(args) => {
            config.check_keys(&with_common(commands::invert::KEYS))?;
            commands::invert::run(args, &config, format)
        }
        Command::Sagnac(args) => {
            config.check_keys(&with_common(commands::sagnac::KEYS))?;
            commands::sagnac::run(args, &config, format)
        }
    };
    match result {
        Ok(text) => output::emit(&text, output.as_deref()),
        Err(Failure::WithReport { report, source }) => {
            output::emit(&report, output.as_deref())?;
            Err(*source)
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
