//! Shared SOAV / basis-pursuit reconstruction on one measurement system.

use soav::solvers::{admm_solve_with_projector, soav_lp_solve, Method, SolveResult, SolveStatus};
use soav::{AffineProjector, Alphabet, RealMatrix, Result, SolverOptions};

/// Solves SOAV with `alphabet` and plain basis pursuit on `Φz = y`. With the
/// splitting method both solves share one factorization of `Φ`.
pub fn soav_and_bp(
    alphabet: &Alphabet,
    phi: &RealMatrix,
    y: &[f64],
    method: Method,
    opts: &SolverOptions,
) -> (Result<SolveResult>, Result<SolveResult>) {
    let soav_obj = alphabet.objective();
    let bp_obj = Alphabet::zero().objective();
    match method {
        Method::Lp => (soav_lp_solve(&soav_obj, phi, y, opts), soav_lp_solve(&bp_obj, phi, y, opts)),
        Method::Admm => match AffineProjector::new(phi, y) {
            Ok(projector) => (
                admm_solve_with_projector(&soav_obj, phi, y, &projector, None, opts),
                admm_solve_with_projector(&bp_obj, phi, y, &projector, None, opts),
            ),
            Err(e) => (Err(e.clone()), Err(e)),
        },
    }
}

/// Feasibility required of an iteration-limited estimate before it is used.
pub const USABLE_RESIDUAL: f64 = 1e-6;

/// A result whose `z` is a usable estimate: optimal, or stopped at the
/// iteration limit while still feasible.
pub fn usable(res: &Result<SolveResult>) -> Option<&SolveResult> {
    match res {
        Ok(r) if r.status == SolveStatus::Optimal => Some(r),
        Ok(r) if r.status == SolveStatus::IterationLimit && r.feasibility_residual <= USABLE_RESIDUAL => Some(r),
        _ => None,
    }
}

pub fn status_label(res: &Result<SolveResult>) -> String {
    match res {
        Ok(r) => r.status.to_string(),
        Err(e) => format!("error ({e})"),
    }
}
