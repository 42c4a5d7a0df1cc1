//! Command-line front end: JSON system files in, reports and files out.

pub mod commands;
pub mod format;
pub mod io;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use hinf_core::pencil::REGULARITY_SEED;
use num_complex::Complex64;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or inconsistent input.
    Input(String),
    /// The requested property does not hold.
    Failure(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::INPUT,
            CliError::Failure(_) => exit::FAILURE,
            CliError::Numerical(_) => exit::NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Failure(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<hinf_core::Error> for CliError {
    fn from(e: hinf_core::Error) -> Self {
        use hinf_core::Error::*;
        let msg = e.to_string();
        match e {
            DimensionMismatch(_) | CenterMismatch | InvalidCenter(_) | NotHermitian(_) => CliError::Input(msg),
            ReorderingFailure(_) | SteinSingular | NoConvergence => CliError::Numerical(msg),
            _ => CliError::Failure(msg),
        }
    }
}

/// Seed for sampled checks: `HINF_SEED` (decimal or `0x` hex) when set.
pub fn seed() -> u64 {
    std::env::var("HINF_SEED")
        .ok()
        .and_then(|s| {
            let s = s.trim();
            match s.strip_prefix("0x") {
                Some(hex) => u64::from_str_radix(hex, 16).ok(),
                None => s.parse().ok(),
            }
        })
        .unwrap_or(REGULARITY_SEED)
}

#[derive(Debug, Parser)]
#[command(name = "hinf", version, about = "H-infinity analysis and synthesis for descriptor systems")]
pub struct Cli {
    /// Center used when a descriptor file has to be converted
    #[arg(long, global = true, value_parser = io::parse_complex, default_value = "1,0", allow_hyphen_values = true)]
    pub z0: Complex64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rewrite a system as a centered realization at --z0
    Convert {
        input: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Check the regularity hypotheses of a partitioned plant
    Check { plant: PathBuf },
    /// Synthesize the controller generator for a closed-loop bound gamma
    Synth {
        plant: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Generator file
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Central controller file
        #[arg(long)]
        central: Option<PathBuf>,
        /// Also bisect for the smallest feasible gamma up to --gamma
        #[arg(long)]
        bisect: bool,
    },
    /// Close the loop and check stability and the norm bound
    Verify {
        plant: PathBuf,
        controller: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Closed-loop file
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Singular values on the unit circle as CSV
    Sigma {
        system: PathBuf,
        #[arg(long, default_value_t = 512)]
        points: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// H-infinity norm of a stable system
    Norm {
        system: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Transfer matrix at one point
    Eval {
        system: PathBuf,
        #[arg(long, value_parser = io::parse_complex, allow_hyphen_values = true)]
        point: Complex64,
    },
    /// Generalized eigenvalues of the pole pencil
    Poles { system: PathBuf },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    exit::SUCCESS
                }
                _ => {
                    let _ = write!(err, "{e}");
                    exit::INPUT
                }
            };
        }
    };
    match commands::dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}
