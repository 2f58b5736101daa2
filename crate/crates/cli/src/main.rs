mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aluthge_core::error::Error;
use clap::{Parser, Subcommand, ValueEnum};

/// Exit statuses, one per failure class.
pub mod exit {
    pub const OK: u8 = 0;
    pub const PROPERTY_FAILURE: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const BREAKDOWN: u8 = 3;
    pub const SHAPE: u8 = 4;
    pub const NOT_COMMUTING: u8 = 5;
}

pub const THREADS_ENV: &str = "ALUTHGE_LAB_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(exit::INPUT, message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::input(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Input(_) | Error::Precondition(_) => exit::INPUT,
            Error::Dimension(_) => exit::SHAPE,
            Error::NotPsd { .. } | Error::Breakdown(_) | Error::OracleUnavailable(_) => exit::BREAKDOWN,
            Error::NotCommuting { .. } => exit::NOT_COMMUTING,
        };
        Self::new(code, e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "aluthge-lab", version)]
#[command(about = "Spherical Aluthge transform, joint radii and inequality checks for matrix tuples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RadiusKind {
    Joint,
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpectralKind {
    Gelfand,
    Aluthge,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the spherical Aluthge transform
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        iters: usize,
        /// Stop once the joint norm decreases by less than this
        #[arg(long, default_value_t = 1e-14)]
        conv_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV trace (step,value,rank); defaults to the --out path with .csv
        #[arg(long, num_args = 0..=1)]
        csv: Option<Option<PathBuf>>,
    },
    /// Numerical radius of a matrix or joint numerical radius of a tuple
    Radius {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = RadiusKind::Joint)]
        method: RadiusKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint spectral radius of a commuting tuple
    Spectral {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SpectralKind::Gelfand)]
        method: SpectralKind,
        #[arg(long, default_value_t = 64)]
        n_max: usize,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-14)]
        conv_tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, num_args = 0..=1)]
        csv: Option<Option<PathBuf>>,
    },
    /// Run the property suite
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Samples per property
        #[arg(long)]
        count: Option<usize>,
        /// Keep only properties whose family is listed (comma separated)
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
        /// Keep only the listed property ids (comma separated)
        #[arg(long, value_delimiter = ',')]
        properties: Vec<String>,
        #[arg(long)]
        max_d: Option<usize>,
        #[arg(long)]
        max_n: Option<usize>,
        /// Replace every property's slack
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for failure witnesses; defaults next to --out
        #[arg(long)]
        witness_dir: Option<PathBuf>,
    },
    /// Reproduce the non-commuting 2×2 fixture
    Example {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::input(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Transform {
            input,
            iters,
            conv_tol,
            out,
            csv,
        } => commands::transform(&input, iters, conv_tol, out.as_deref(), &csv),
        Command::Radius {
            input,
            method,
            seed,
            out,
        } => commands::radius(&input, method, seed, out.as_deref()),
        Command::Spectral {
            input,
            method,
            n_max,
            max_iter,
            conv_tol,
            seed,
            out,
            csv,
        } => commands::spectral(&input, method, n_max, max_iter, conv_tol, seed, out.as_deref(), &csv),
        Command::Verify {
            seed,
            count,
            families,
            properties,
            max_d,
            max_n,
            slack,
            out,
            witness_dir,
        } => commands::verify(
            commands::VerifyArgs {
                seed,
                count,
                families,
                properties,
                max_d,
                max_n,
                slack,
            },
            out.as_deref(),
            witness_dir.as_deref(),
        ),
        Command::Example { seed, out } => commands::example(seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
