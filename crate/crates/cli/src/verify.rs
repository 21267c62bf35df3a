//! `soav verify`: randomized internal-consistency checks.
//!
//! Each instance draws `Φ` (Gaussian unless a fixture matrix is given) and a
//! signal `x`, then compares uniqueness, the enumeration oracle, both solvers
//! and the null-space search. Only contradictions between these count as
//! violations; a non-unique instance or a non-discrete solver output is a
//! legitimate outcome.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};
use soav::analysis::{check_uniqueness, kernel_defect, nsp_falsify, UNIQUENESS_TOL};
use soav::io::{parse_matrix, MatrixFile};
use soav::measurement::gaussian_matrix;
use soav::rng::{derive_seed, SeededRng};
use soav::solvers::{exhaustive_oracle, solve, Method, SolveResult, SolveStatus};
use soav::{Alphabet, RealMatrix, SolverOptions};

use crate::{emit, read_file, CliError, CliResult};

/// Solver outputs within this distance of a symbol count as discrete.
pub const DISCRETE_TOL: f64 = 1e-6;
/// Residual below which a discrete solver output is trusted as feasible.
pub const RESIDUAL_TOL: f64 = 1e-7;
/// Relative objective agreement required between the two solvers.
pub const OBJECTIVE_TOL: f64 = 1e-5;
/// Relative residual accepted by the enumeration oracle.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: &'static str,
    pub instance_seed: u64,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    /// False marks an internal-consistency violation.
    pub consistent: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub n: usize,
    pub m: usize,
    pub alphabet: Alphabet,
    pub trials: usize,
    pub seed: u64,
    /// Fixed matrix replacing the Gaussian draw.
    pub matrix: Option<RealMatrix>,
    pub nsp_samples: usize,
    pub options: SolverOptions,
}

fn verdict(check: &'static str, seed: u64, result: Value, consistent: bool) -> Verdict {
    Verdict { check, instance_seed: seed, result, counterexample: None, consistent }
}

fn solver_check(
    check: &'static str,
    seed: u64,
    alphabet: &Alphabet,
    res: &soav::Result<SolveResult>,
    unique: Option<&[f64]>,
) -> Verdict {
    let r = match res {
        Ok(r) if r.status == SolveStatus::Optimal => r,
        Ok(r) => return verdict(check, seed, json!(format!("status {}", r.status)), true),
        Err(e) => return verdict(check, seed, json!(format!("error: {e}")), true),
    };
    let rounded = alphabet.round(&r.z);
    let discrete = r.z.iter().zip(&rounded).all(|(z, s)| (z - s).abs() <= DISCRETE_TOL) && r.feasibility_residual <= RESIDUAL_TOL;
    match (discrete, unique) {
        (false, _) => verdict(check, seed, json!("not_discrete"), true),
        (true, None) => verdict(check, seed, json!("discrete"), true),
        (true, Some(x)) if rounded == x => verdict(check, seed, json!("matches_oracle"), true),
        (true, Some(_)) => verdict(check, seed, json!({ "mismatch": rounded }), false),
    }
}

/// Verdicts for one instance, in a fixed order.
pub fn verify_instance(cfg: &VerifyConfig, trial: usize) -> CliResult<Vec<Verdict>> {
    let seed = derive_seed(cfg.seed, &[trial as u64]);
    let phi = match &cfg.matrix {
        Some(m) => m.clone(),
        None => gaussian_matrix(cfg.m, cfg.n, seed)?,
    };
    let mut rng = SeededRng::new(derive_seed(seed, &[0]));
    let symbols = cfg.alphabet.symbols();
    let x: Vec<f64> = (0..phi.cols()).map(|_| symbols[rng.categorical(cfg.alphabet.probs())]).collect();
    let y = phi.matvec(&x)?;
    let mut out = Vec::new();

    let unique = check_uniqueness(&cfg.alphabet, &phi, UNIQUENESS_TOL)?;
    out.push(verdict("uniqueness", seed, json!(unique), true));

    let preimages = exhaustive_oracle(&cfg.alphabet, &phi, &y, ORACLE_TOL)?;
    let oracle_ok = preimages.contains(&x) && (!unique || preimages.len() == 1);
    out.push(verdict("oracle", seed, json!({ "preimages": preimages.len() }), oracle_ok));
    let oracle_unique = (unique && preimages.len() == 1).then(|| preimages[0].as_slice());

    let lp = solve(&cfg.alphabet, &phi, &y, Method::Lp, &cfg.options);
    let admm = solve(&cfg.alphabet, &phi, &y, Method::Admm, &cfg.options);
    out.push(solver_check("solver_lp", seed, &cfg.alphabet, &lp, oracle_unique));
    out.push(solver_check("solver_admm", seed, &cfg.alphabet, &admm, oracle_unique));

    out.push(match (&lp, &admm) {
        (Ok(a), Ok(b)) if a.is_optimal() && b.is_optimal() => {
            let gap = (a.objective - b.objective).abs() / (1.0 + a.objective.abs());
            verdict("objective_agreement", seed, json!({ "lp": a.objective, "admm": b.objective }), gap <= OBJECTIVE_TOL)
        }
        _ => verdict("objective_agreement", seed, json!("skipped"), true),
    });

    out.push(match nsp_falsify(&cfg.alphabet, &phi, cfg.nsp_samples, derive_seed(seed, &[1]))? {
        None => verdict("nsp", seed, json!("no_counterexample"), true),
        Some(ce) => {
            let valid = kernel_defect(&phi, &ce.v) <= UNIQUENESS_TOL && ce.margin <= 1e-9;
            let mut v = verdict("nsp", seed, json!("counterexample"), valid);
            v.counterexample = Some(Counterexample { v: ce.v, x: ce.x, margin: ce.margin });
            v
        }
    });
    Ok(out)
}

pub fn run_verify(cfg: &VerifyConfig) -> CliResult<Vec<Verdict>> {
    if cfg.matrix.is_none() && (cfg.n == 0 || cfg.m == 0) {
        return Err(CliError::input("n and m must be positive"));
    }
    let mut all = Vec::new();
    for trial in 0..cfg.trials {
        all.extend(verify_instance(cfg, trial)?);
    }
    Ok(all)
}

pub fn to_json_lines(verdicts: &[Verdict]) -> CliResult<String> {
    let mut out = String::new();
    for v in verdicts {
        out.push_str(&serde_json::to_string(v).map_err(|e| CliError::input(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[arg(long, default_value = "0:0.5,1:0.5")]
    pub alphabet: Alphabet,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Real matrix file used for every instance instead of a Gaussian draw.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Random kernel directions tried by the null-space search.
    #[arg(long, default_value_t = 32)]
    pub nsp_samples: usize,
    /// JSON-lines destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let matrix = match &args.matrix {
        None => None,
        Some(path) => match parse_matrix(&read_file(path)?)? {
            MatrixFile::Real(m) => Some(m),
            MatrixFile::Complex(_) => return Err(CliError::input("verify needs a real matrix")),
        },
    };
    let cfg = VerifyConfig {
        n: args.n,
        m: args.m,
        alphabet: args.alphabet.clone(),
        trials: args.trials,
        seed: args.seed,
        matrix,
        nsp_samples: args.nsp_samples,
        options: SolverOptions::default(),
    };
    let verdicts = run_verify(&cfg)?;
    emit(args.out.as_ref(), &to_json_lines(&verdicts)?)?;
    let violations = verdicts.iter().filter(|v| !v.consistent).count();
    if violations > 0 {
        return Err(CliError::inconsistent(format!("{violations} consistency violation(s)")));
    }
    Ok(())
}
