//! `soav solve`: one reconstruction from files.

use std::path::PathBuf;

use clap::Args;
use soav::io::{format_real_vector, parse_complex_vector, parse_matrix, parse_real_vector, MatrixFile};
use soav::measurement::realify;
use soav::solvers::{solve, Method, SolveResult, SolveStatus};
use soav::{Alphabet, SolverOptions};

use crate::{create_dir, read_file, write_file, CliError, CliResult};

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Measurement matrix (real CSV, or complex entries written `a+bi`).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Measurement vector, one value per line.
    #[arg(long)]
    pub measurements: PathBuf,
    /// Alphabet as `symbol:prob` pairs, e.g. `-1:0.25,0:0.5,1:0.25`.
    #[arg(long)]
    pub alphabet: Alphabet,
    #[arg(long, default_value = "lp")]
    pub solver: Method,
    /// Directory receiving `z.csv` and `rounded.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Solves the system described by `args`; complex systems are realified first.
pub fn solve_files(args: &SolveArgs) -> CliResult<SolveResult> {
    let matrix = parse_matrix(&read_file(&args.matrix)?)?;
    let measurements = read_file(&args.measurements)?;
    let (phi, y) = match matrix {
        MatrixFile::Real(phi) => (phi, parse_real_vector(&measurements)?),
        MatrixFile::Complex(phi) => realify(&phi, &parse_complex_vector(&measurements)?)?,
    };
    if y.len() != phi.rows() {
        return Err(CliError::input(format!("{} measurements for a matrix with {} rows", y.len(), phi.rows())));
    }
    Ok(solve(&args.alphabet, &phi, &y, args.solver, &SolverOptions::default())?)
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let res = solve_files(args)?;
    println!("status: {}", res.status);
    println!("objective: {}", res.objective);
    println!("residual: {:e}", res.feasibility_residual);
    println!("iterations: {}", res.iterations);
    match res.status {
        SolveStatus::Infeasible => return Err(CliError::input("measurements are inconsistent with the matrix")),
        SolveStatus::Unbounded | SolveStatus::NumericalFailure => {
            return Err(CliError::solver(format!("solver stopped with status {}", res.status)))
        }
        SolveStatus::Optimal | SolveStatus::IterationLimit => {}
    }
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(&dir.join("z.csv"), &format_real_vector(&res.z))?;
        write_file(&dir.join("rounded.csv"), &format_real_vector(&args.alphabet.round(&res.z)))?;
    }
    match res.status {
        SolveStatus::Optimal => Ok(()),
        status => Err(CliError::solver(format!("solver stopped with status {status}"))),
    }
}
