//! Reconstruction routes: the exact epigraph LP via a dense simplex, a
//! Douglas–Rachford splitting solver working on `F` directly, the
//! exhaustive enumeration oracle and the basis-pursuit baseline.

mod oracle;
mod simplex;
mod splitting;

use std::time::{Duration, Instant};

pub(crate) use oracle::{check_budget as check_enumeration_budget, enumerate as oracle_enumerate};
pub use oracle::{exhaustive_oracle, ENUMERATION_LIMIT};
pub use simplex::{simplex_solve, soav_lp_solve, solve_lp, LpOutcome};
pub use splitting::{admm_solve, admm_solve_with_projector};

use crate::alphabet::{Alphabet, PiecewiseLinearObjective};
use crate::error::Result;
use crate::measurement::{relative_residual, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    IterationLimit,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index entering and leaving variables; never cycles.
    Bland,
    /// Most negative reduced cost, falling back to Bland after a run of
    /// degenerate pivots.
    Dantzig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub feasibility_tol: f64,
    pub objective_tol: f64,
    /// Douglas–Rachford step `γ`.
    pub step: f64,
    pub pivot_rule: PivotRule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 20_000,
            feasibility_tol: 1e-7,
            objective_tol: 1e-7,
            step: 1.0,
            pivot_rule: PivotRule::Dantzig,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub z: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// `‖Φz − y‖₂ / (1 + ‖y‖₂)`.
    pub feasibility_residual: f64,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    fn assemble(
        obj: &PiecewiseLinearObjective,
        phi: &RealMatrix,
        y: &[f64],
        z: Vec<f64>,
        status: SolveStatus,
        iterations: usize,
        start: Instant,
    ) -> Self {
        SolveResult {
            objective: obj.eval_sum(&z),
            feasibility_residual: relative_residual(phi, y, &z),
            z,
            status,
            iterations,
            wall_time: start.elapsed(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Exact epigraph LP through the dense simplex.
    Lp,
    /// Douglas–Rachford splitting.
    Admm,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lp" | "simplex" => Ok(Method::Lp),
            "admm" | "dr" | "splitting" => Ok(Method::Admm),
            other => Err(crate::Error::Parse(format!("unknown solver `{other}`"))),
        }
    }
}

/// Minimizes `F` for `alphabet` subject to `Φz = y` with the chosen method.
pub fn solve(alphabet: &Alphabet, phi: &RealMatrix, y: &[f64], method: Method, opts: &SolverOptions) -> Result<SolveResult> {
    let obj = alphabet.objective();
    match method {
        Method::Lp => soav_lp_solve(&obj, phi, y, opts),
        Method::Admm => admm_solve(&obj, phi, y, opts),
    }
}

/// `min ‖z‖₁ s.t. Φz = y`, i.e. SOAV with the alphabet `{0}`.
pub fn basis_pursuit(phi: &RealMatrix, y: &[f64], method: Method, opts: &SolverOptions) -> Result<SolveResult> {
    solve(&Alphabet::zero(), phi, y, method, opts)
}
