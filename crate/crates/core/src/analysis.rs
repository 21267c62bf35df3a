//! Uniqueness and null-space checks, plus recovery metrics.
//!
//! Uniqueness of the discrete solution is decided exactly (up to `tol`) by
//! enumerating the difference lattice `𝒳̃^N`. The null space property is
//! only ever *falsified*: the kernel is a continuum, so finding no
//! counterexample among the sampled directions is evidence, not proof.

use std::ops::ControlFlow;

use crate::alphabet::{Alphabet, PiecewiseLinearObjective};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::measurement::{kernel_basis, RealMatrix};
use crate::rng::SeededRng;
use crate::solvers::{oracle_enumerate, ENUMERATION_LIMIT};

/// Default relative tolerance for treating `Φv` as zero.
pub const UNIQUENESS_TOL: f64 = 1e-8;

/// Largest `L^N` [`nsp_falsify`] will enumerate per direction.
pub const NSP_SIGNAL_LIMIT: f64 = 1e6;

/// Cap on difference-lattice kernel members reused as NSP directions.
const MAX_LATTICE_DIRECTIONS: usize = 1024;

/// A kernel direction `v` and signal `x ∈ 𝒳^N` with `F(x − v) ≤ F(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NspCounterexample {
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    /// `F(x − v) − F(x)`; non-positive at a violation.
    pub margin: f64,
}

/// Nonzero members of `ker Φ ∩ 𝒳̃^N` (relative tolerance `tol`), in
/// odometer order, stopping after `limit` hits. Only the representative of
/// each `±v` pair whose first nonzero entry is positive is returned.
pub fn lattice_kernel_members(alphabet: &Alphabet, phi: &RealMatrix, tol: f64, limit: usize) -> Result<Vec<Vec<f64>>> {
    let diffs = alphabet.difference_set();
    crate::solvers::check_enumeration_budget(diffs.len(), phi.cols(), ENUMERATION_LIMIT)?;
    let mut found = Vec::new();
    if limit == 0 {
        return Ok(found);
    }
    oracle_enumerate::<()>(&diffs, phi, |v, pv| {
        let nv = norm2(v);
        let canonical = v.iter().find(|c| **c != 0.0).is_some_and(|c| *c > 0.0);
        if canonical && norm2(pv) <= tol * nv {
            found.push(v.to_vec());
            if found.len() >= limit {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    Ok(found)
}

/// True iff no nonzero `v ∈ 𝒳̃^N` has `‖Φv‖₂ ≤ tol·‖v‖₂`, i.e. every
/// `x ∈ 𝒳^N` is determined by `Φx`.
pub fn check_uniqueness(alphabet: &Alphabet, phi: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(lattice_kernel_members(alphabet, phi, tol, 1)?.is_empty())
}

/// Searches for a violation of `F(x) < F(x − v)` over `x ∈ 𝒳^N` and kernel
/// directions `±v`: first the difference-lattice kernel members, then
/// `samples` random unit directions in the kernel.
///
/// Every direction is tested twice per `x`: the full step `x − v`, and the
/// one-sided directional derivative of `F` at `x` along `−v`. A non-positive
/// derivative yields a counterexample `(t·v, x)` with `t` small enough that
/// `x − t·v` stays on the active linear pieces.
pub fn nsp_falsify(alphabet: &Alphabet, phi: &RealMatrix, samples: usize, seed: u64) -> Result<Option<NspCounterexample>> {
    let n = phi.cols();
    crate::solvers::check_enumeration_budget(alphabet.len(), n, NSP_SIGNAL_LIMIT)?;
    let kernel = kernel_basis(phi);
    if kernel.is_empty() {
        return Ok(None);
    }
    let obj = alphabet.objective();

    let mut directions = match lattice_kernel_members(alphabet, phi, UNIQUENESS_TOL, MAX_LATTICE_DIRECTIONS) {
        Ok(d) => d,
        Err(Error::BudgetExceeded { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    let mut rng = SeededRng::new(seed);
    for _ in 0..samples {
        let coeffs: Vec<f64> = kernel.iter().map(|_| rng.normal()).collect();
        let mut v = vec![0.0; n];
        for (c, q) in coeffs.iter().zip(&kernel) {
            v.iter_mut().zip(q).for_each(|(vi, qi)| *vi += c * qi);
        }
        let nv = norm2(&v);
        if nv == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|vi| *vi /= nv);
        directions.push(v);
    }

    let symbols = alphabet.symbols();
    let mut digits = vec![0usize; n];
    let signed = directions.iter().flat_map(|v| [v.clone(), v.iter().map(|c| -c).collect()]);
    for v in signed {
        let v = &v;
        digits.iter_mut().for_each(|d| *d = 0);
        loop {
            let x: Vec<f64> = digits.iter().map(|&d| symbols[d]).collect();
            if let Some(found) = test_pair(&obj, alphabet, &x, &digits, v) {
                return Ok(Some(found));
            }
            if !advance(&mut digits, symbols.len()) {
                break;
            }
        }
    }
    Ok(None)
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn test_pair(
    obj: &PiecewiseLinearObjective,
    alphabet: &Alphabet,
    x: &[f64],
    digits: &[usize],
    v: &[f64],
) -> Option<NspCounterexample> {
    let fx = obj.eval_sum(x);
    let moved: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - b).collect();
    let margin = obj.eval_sum(&moved) - fx;
    if margin <= 1e-12 * (1.0 + fx.abs()) {
        return Some(NspCounterexample { v: v.to_vec(), x: x.to_vec(), margin });
    }

    // One-sided derivative of F at x along d = −v; symbol index k sits
    // between pieces k (left) and k + 1 (right).
    let slopes = obj.slopes();
    let symbols = alphabet.symbols();
    let mut derivative = 0.0;
    let mut step = 1.0f64;
    for (&k, &vn) in digits.iter().zip(v) {
        let d = -vn;
        if d > 0.0 {
            derivative += d * slopes[k + 1];
            if let Some(next) = symbols.get(k + 1) {
                step = step.min((next - symbols[k]) / d);
            }
        } else if d < 0.0 {
            derivative += d * slopes[k];
            if k > 0 {
                step = step.min((symbols[k] - symbols[k - 1]) / -d);
            }
        }
    }
    if derivative <= 1e-12 * (1.0 + v.iter().map(|c| c.abs()).sum::<f64>()) {
        let scaled: Vec<f64> = v.iter().map(|c| c * step).collect();
        let moved: Vec<f64> = x.iter().zip(&scaled).map(|(a, b)| a - b).collect();
        let margin = obj.eval_sum(&moved) - fx;
        return Some(NspCounterexample { v: scaled, x: x.to_vec(), margin });
    }
    None
}

/// `‖x − x̂‖₂ / ‖x‖₂`.
pub fn nsr(x: &[f64], xhat: &[f64]) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::DimensionMismatch(format!("signal length {} vs estimate length {}", x.len(), xhat.len())));
    }
    let nx = norm2(x);
    if nx == 0.0 {
        return Err(Error::InvalidArgument("NSR is undefined for the zero signal".into()));
    }
    let diff: Vec<f64> = x.iter().zip(xhat).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / nx)
}

/// True iff rounding `xhat` to the alphabet reproduces `x` exactly.
pub fn exact_recovery(x: &[f64], xhat: &[f64], alphabet: &Alphabet) -> Result<bool> {
    if x.len() != xhat.len() {
        return Err(Error::DimensionMismatch(format!("signal length {} vs estimate length {}", x.len(), xhat.len())));
    }
    Ok(x.iter().zip(xhat).all(|(&a, &b)| alphabet.nearest(b) == a))
}

/// Relative size of `Φv`, used to confirm kernel membership.
pub fn kernel_defect(phi: &RealMatrix, v: &[f64]) -> f64 {
    let pv: f64 = phi.row_iter().map(|row| dot(row, v).powi(2)).sum::<f64>().sqrt();
    pv / norm2(v).max(f64::MIN_POSITIVE)
}
