//! Experiment drivers behind the `soav` binary: single solves, Gaussian
//! NSR sweeps, the DFT image pipeline and randomized consistency checks.
//!
//! Every command is a pure function of its arguments and master seed.

pub mod image;
pub mod reconstruct;
pub mod solve;
pub mod sweep;
pub mod verify;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const SOLVER: u8 = 2;
    pub const INCONSISTENT: u8 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Solver,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Input, message: message.into() }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Solver, message: message.into() }
    }

    pub fn inconsistent(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Inconsistent, message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Input => exit::INPUT,
            ErrorKind::Solver => exit::SOLVER,
            ErrorKind::Inconsistent => exit::INCONSISTENT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Library errors reaching the CLI are problems with the input.
impl From<soav::Error> for CliError {
    fn from(e: soav::Error) -> Self {
        CliError::input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))
}

/// Runs `f` on a rayon pool with `threads` workers (rayon's default when `None`).
pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::input("--threads must be at least 1"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::input(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Parser)]
#[command(name = "soav", version, about = "Discrete-valued signal reconstruction by sums of weighted absolute values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reconstruct one signal from a matrix file and a measurement file.
    Solve(solve::SolveArgs),
    /// Gaussian-matrix NSR sweep over a probability grid, written as CSV.
    Sweep(sweep::SweepArgs),
    /// Recover a binary image from randomly subsampled 2-D DFT coefficients.
    Image(image::ImageArgs),
    /// Cross-check uniqueness, the enumeration oracle and both solvers.
    Verify(verify::VerifyArgs),
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve(args) => solve::cmd_solve(&args),
        Command::Sweep(args) => sweep::cmd_sweep(&args),
        Command::Image(args) => image::cmd_image(&args),
        Command::Verify(args) => verify::cmd_verify(&args),
    }
}

/// Output target: a file when given, stdout otherwise.
pub(crate) fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::input(format!("cannot write to stdout: {e}")))
        }
    }
}
