//! Douglas–Rachford splitting between the coordinatewise prox of `γL` and
//! the projection onto `{z : Φz = y}`:
//!
//! ```text
//! x_k     = P(w_k)
//! u_k     = prox_{γL}(2x_k − w_k)
//! w_{k+1} = w_k + u_k − x_k
//! ```
//!
//! The iterate `x_k` is feasible by construction and `g_k = (x_k − w_k)/γ`
//! lies in the row space of `Φ`, so `g_k` is a dual candidate: for any
//! feasible `z`, `Σ_n g_n z_n − L*(g_n)` bounds `min F` from below.
//!
//! The iteration stops at the first of:
//! * fixed-point residual `‖u_k − x_k‖` below [`CHANGE_TOL`];
//! * certified duality gap of `x_k` within the objective tolerance;
//! * objective stall: the spread of `F(x_k)` over [`STALL_WINDOW`]
//!   iterations is within the objective tolerance while the residual is
//!   below [`STALL_CHANGE_TOL`];
//! * a polished point passes the duality-gap check. Polishing pins the
//!   coordinates that `u_k` places exactly on symbols, keeps every other
//!   coordinate on its current linear piece and solves the reduced equality
//!   system; it is attempted once the pattern has held for
//!   [`POLISH_STABLE_RUN`] iterations, and at geometrically spaced
//!   checkpoints for patterns that keep flickering.

use std::collections::VecDeque;
use std::time::Instant;

use super::{SolveResult, SolveStatus, SolverOptions};
use crate::alphabet::PiecewiseLinearObjective;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::measurement::{relative_residual, AffineProjector, ProjectorBasis, RealMatrix};

/// Relative fixed-point residual at which the iteration stops.
pub const CHANGE_TOL: f64 = 1e-9;

/// Number of iterations over which the objective spread is measured.
pub const STALL_WINDOW: usize = 100;

/// Relative fixed-point residual required before a stall may end the run.
pub const STALL_CHANGE_TOL: f64 = 1e-5;

/// Iterations the symbol/piece pattern must hold before polishing.
pub const POLISH_STABLE_RUN: usize = 20;

/// First iteration at which polishing is attempted regardless of pattern
/// stability; later checkpoints are spaced geometrically by 3/2.
const FIRST_CHECKPOINT: usize = 100;

/// Iterations between duality-gap evaluations.
const GAP_INTERVAL: usize = 10;

/// Relative residual a polished point must meet.
const POLISH_RESIDUAL_TOL: f64 = 1e-9;

/// Builds the projector for `(Φ, y)` and runs the splitting iteration from
/// the minimum-norm feasible point.
pub fn admm_solve(obj: &PiecewiseLinearObjective, phi: &RealMatrix, y: &[f64], opts: &SolverOptions) -> Result<SolveResult> {
    let start = Instant::now();
    match AffineProjector::new(phi, y) {
        Ok(projector) => {
            let mut res = admm_solve_with_projector(obj, phi, y, &projector, None, opts)?;
            res.wall_time = start.elapsed();
            Ok(res)
        }
        Err(Error::Inconsistent { .. }) => {
            Ok(SolveResult::assemble(obj, phi, y, vec![0.0; phi.cols()], SolveStatus::Infeasible, 0, start))
        }
        Err(e) => Err(e),
    }
}

/// Runs the splitting iteration with a prebuilt projector, optionally
/// starting from `init` instead of the minimum-norm feasible point.
pub fn admm_solve_with_projector(
    obj: &PiecewiseLinearObjective,
    phi: &RealMatrix,
    y: &[f64],
    projector: &AffineProjector,
    init: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    let start = Instant::now();
    let n = phi.cols();
    if projector.dim() != n {
        return Err(Error::DimensionMismatch(format!("projector acts on {} coordinates, matrix has {n}", projector.dim())));
    }
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::InvalidArgument(format!("splitting step must be positive, got {}", opts.step)));
    }
    let mut w = match init {
        Some(z) if z.len() != n => {
            return Err(Error::DimensionMismatch(format!("initial point has length {}, expected {n}", z.len())))
        }
        Some(z) => z.to_vec(),
        None => projector.feasible_point().to_vec(),
    };

    let gamma = opts.step;
    let vertex_values: Vec<f64> = obj.breakpoints().iter().map(|&r| obj.eval(r)).collect();
    let mut x = vec![0.0; n];
    let mut dual = vec![0.0; n];
    let mut pattern = vec![0usize; n];
    let mut previous_pattern = vec![usize::MAX; n];
    let mut polished_pattern: Option<Vec<usize>> = None;
    let mut polished_released: Option<Vec<usize>> = None;
    let mut stable = 0usize;
    let mut next_checkpoint = FIRST_CHECKPOINT;
    let mut history = VecDeque::with_capacity(STALL_WINDOW + 1);
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        projector.project_into(&w, &mut x);
        let mut change_sq = 0.0;
        for (k, (wi, &xi)) in w.iter_mut().zip(&x).enumerate() {
            dual[k] = (xi - *wi) / gamma;
            let u = obj.prox_unchecked(gamma, 2.0 * xi - *wi);
            pattern[k] = piece_code(obj, u);
            let d = u - xi;
            *wi += d;
            change_sq += d * d;
        }
        iterations += 1;
        if !change_sq.is_finite() {
            return Ok(SolveResult::assemble(obj, phi, y, x, SolveStatus::NumericalFailure, iterations, start));
        }
        let scale = 1.0 + norm2(&x);
        let change = change_sq.sqrt();
        if change <= CHANGE_TOL * scale {
            projector.project_into(&w, &mut x);
            return Ok(SolveResult::assemble(obj, phi, y, x, SolveStatus::Optimal, iterations, start));
        }

        let f = obj.eval_sum(&x);
        if iterations % GAP_INTERVAL == 0 {
            let lower = dual_bound(obj, &vertex_values, &dual, &x);
            if f - lower <= opts.objective_tol * (1.0 + f.abs()) {
                return Ok(SolveResult::assemble(obj, phi, y, x, SolveStatus::Optimal, iterations, start));
            }
        }
        if history.len() == STALL_WINDOW {
            history.pop_front();
        }
        history.push_back(f);
        if history.len() == STALL_WINDOW && change <= STALL_CHANGE_TOL * scale {
            let (lo, hi) = history.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if hi - lo <= opts.objective_tol * (1.0 + f.abs()) {
                return Ok(SolveResult::assemble(obj, phi, y, x, SolveStatus::Optimal, iterations, start));
            }
        }

        if pattern == previous_pattern {
            stable += 1;
        } else {
            stable = 0;
            previous_pattern.copy_from_slice(&pattern);
        }
        let checkpoint = iterations >= next_checkpoint;
        if checkpoint {
            next_checkpoint += next_checkpoint / 2;
        }
        let fresh = polished_pattern.as_ref() != Some(&pattern);
        if (stable >= POLISH_STABLE_RUN && fresh) || checkpoint {
            let released = release_pinned(obj, &pattern, &dual, projector.rank());
            let mut candidates = Vec::new();
            if fresh {
                polished_pattern = Some(pattern.clone());
                candidates.push(&pattern);
            }
            if released != pattern && polished_released.as_ref() != Some(&released) {
                candidates.push(&released);
            }
            for candidate in candidates {
                if let Some(z) = polish(obj, phi, y, projector, &x, candidate, &dual, &vertex_values, opts)? {
                    return Ok(SolveResult::assemble(obj, phi, y, z, SolveStatus::Optimal, iterations, start));
                }
            }
            if released != pattern {
                polished_released = Some(released);
            }
        }
    }
    projector.project_into(&w, &mut x);
    Ok(SolveResult::assemble(obj, phi, y, x, SolveStatus::IterationLimit, iterations, start))
}

/// `2k + 1` when `t` is exactly symbol `k`, otherwise `2k` for the index `k`
/// of the linear piece holding `t`.
fn piece_code(obj: &PiecewiseLinearObjective, t: f64) -> usize {
    let k = obj.segment(t);
    if obj.breakpoints().get(k) == Some(&t) {
        2 * k + 1
    } else {
        2 * k
    }
}

/// Lower bound `Σ_n s g_n x_n − L*(s g_n)` on `min F`, with `g` scaled by
/// `s ≤ 1` into the domain `[−1, 1]` of `L*`. Valid for feasible `x` and `g`
/// in the row space of `Φ`.
fn dual_bound(obj: &PiecewiseLinearObjective, vertex_values: &[f64], g: &[f64], x: &[f64]) -> f64 {
    let peak = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = if peak > 1.0 { 1.0 / peak } else { 1.0 };
    let symbols = obj.breakpoints();
    g.iter()
        .zip(x)
        .map(|(&gn, &xn)| {
            let gn = s * gn;
            let conj = symbols.iter().zip(vertex_values).map(|(r, l)| gn * r - l).fold(f64::NEG_INFINITY, f64::max);
            gn * xn - conj
        })
        .sum()
}

/// Frees the pinned coordinates whose dual estimates lie closest to an end
/// of their subgradient interval, onto the piece on that side, until
/// `target` coordinates are free.
fn release_pinned(obj: &PiecewiseLinearObjective, pattern: &[usize], g: &[f64], target: usize) -> Vec<usize> {
    let slopes = obj.slopes();
    let mut released = pattern.to_vec();
    let free = pattern.iter().filter(|c| *c % 2 == 0).count();
    if free >= target {
        return released;
    }
    // (distance to the nearer end, coordinate, piece on that side)
    let mut pinned: Vec<(f64, usize, usize)> = pattern
        .iter()
        .zip(g)
        .enumerate()
        .filter(|(_, (code, _))| *code % 2 == 1)
        .map(|(n, (&code, &gn))| {
            let k = code / 2;
            let (left, right) = ((gn - slopes[k]).abs(), (slopes[k + 1] - gn).abs());
            if left <= right {
                (left, n, k)
            } else {
                (right, n, k + 1)
            }
        })
        .collect();
    pinned.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for &(_, n, piece) in pinned.iter().take(target - free) {
        released[n] = 2 * piece;
    }
    released
}

/// Minimum-norm solution of `Az = b`, or `None` when the system is inconsistent.
fn min_norm_solution(a: &RealMatrix, b: &[f64]) -> Result<Option<Vec<f64>>> {
    match AffineProjector::new(a, b) {
        Ok(p) => Ok(Some(p.feasible_point().to_vec())),
        Err(Error::Inconsistent { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Point of `{a : Ma = b}` nearest to `a0`, or `None` when inconsistent.
fn nearest_solution(m: &RealMatrix, b: &[f64], a0: &[f64]) -> Result<Option<Vec<f64>>> {
    match AffineProjector::new(m, b) {
        Ok(p) => Ok(Some(p.project(a0))),
        Err(Error::Inconsistent { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Rows `q[cols]` for each basis vector `q` (one per `n`-chunk of `basis`).
fn restrict(basis: &[f64], n: usize, cols: &[usize]) -> Result<RealMatrix> {
    let rows = basis.len() / n;
    RealMatrix::new(rows, cols.len(), basis.chunks(n).flat_map(|q| cols.iter().map(move |&k| q[k])).collect())
}

/// Solves the reduced system for `pattern` and returns the point if a
/// duality gap within the objective tolerance certifies it.
///
/// Pinned coordinates sit on their symbols and the free ones are solved for
/// within the feasible set. The dual candidate is first the splitting
/// estimate `g`, then the row-space vector nearest to `g` whose free entries
/// equal the slope of their piece, which is where an exact optimum's dual
/// lives. Both steps work in the basis already held by `projector`, so only
/// matrices of size (pinned or free) × (basis dimension) are factored.
#[allow(clippy::too_many_arguments)]
fn polish(
    obj: &PiecewiseLinearObjective,
    phi: &RealMatrix,
    y: &[f64],
    projector: &AffineProjector,
    x: &[f64],
    pattern: &[usize],
    g: &[f64],
    vertex_values: &[f64],
    opts: &SolverOptions,
) -> Result<Option<Vec<f64>>> {
    let n = phi.cols();
    let symbols = obj.breakpoints();
    let slopes = obj.slopes();
    let (pinned, free): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| pattern[k] % 2 == 1);
    let pinned_values: Vec<f64> = pinned.iter().map(|&k| symbols[pattern[k] / 2]).collect();
    let free_slopes: Vec<f64> = free.iter().map(|&k| slopes[pattern[k] / 2]).collect();

    let mut z = x.to_vec();
    match projector.basis() {
        ProjectorBasis::Kernel { rows } if !pinned.is_empty() && !rows.is_empty() => {
            // z = x + Kc with (Kc)_P = s_P − x_P.
            let rhs: Vec<f64> = pinned.iter().zip(&pinned_values).map(|(&k, s)| s - x[k]).collect();
            let Some(c) = min_norm_solution(&restrict(rows, n, &pinned)?.transpose(), &rhs)? else {
                return Ok(None);
            };
            for (q, cj) in rows.chunks(n).zip(&c) {
                z.iter_mut().zip(q).for_each(|(zi, qi)| *zi += cj * qi);
            }
        }
        ProjectorBasis::Kernel { .. } => {}
        ProjectorBasis::Range { rows, coords } => {
            if !free.is_empty() && !rows.is_empty() {
                // Q_Fᵀ z_F = coords − Q_Pᵀ s_P.
                let rhs: Vec<f64> = rows
                    .chunks(n)
                    .zip(coords)
                    .map(|(q, c)| c - pinned.iter().zip(&pinned_values).map(|(&k, s)| q[k] * s).sum::<f64>())
                    .collect();
                let Some(zf) = min_norm_solution(&restrict(rows, n, &free)?, &rhs)? else {
                    return Ok(None);
                };
                free.iter().zip(&zf).for_each(|(&k, &v)| z[k] = v);
            }
        }
    }
    pinned.iter().zip(&pinned_values).for_each(|(&k, &s)| z[k] = s);
    if !(relative_residual(phi, y, &z) <= POLISH_RESIDUAL_TOL) {
        return Ok(None);
    }

    let f = obj.eval_sum(&z);
    let certified = |h: &[f64]| f - dual_bound(obj, vertex_values, h, &z) <= opts.objective_tol * (1.0 + f.abs());
    if certified(g) {
        return Ok(Some(z));
    }
    if free.is_empty() {
        return Ok(None);
    }
    let mut h = g.to_vec();
    match projector.basis() {
        ProjectorBasis::Kernel { rows } => {
            if rows.is_empty() {
                free.iter().zip(&free_slopes).for_each(|(&k, &t)| h[k] = t);
            } else if pinned.is_empty() {
                return Ok(None);
            } else {
                // K_Pᵀ h_P = −K_Fᵀ t_F, nearest to g_P.
                let rhs: Vec<f64> =
                    rows.chunks(n).map(|q| -free.iter().zip(&free_slopes).map(|(&k, t)| q[k] * t).sum::<f64>()).collect();
                let g_pinned: Vec<f64> = pinned.iter().map(|&k| g[k]).collect();
                let Some(hp) = nearest_solution(&restrict(rows, n, &pinned)?, &rhs, &g_pinned)? else {
                    return Ok(None);
                };
                pinned.iter().zip(&hp).for_each(|(&k, &v)| h[k] = v);
                free.iter().zip(&free_slopes).for_each(|(&k, &t)| h[k] = t);
            }
        }
        ProjectorBasis::Range { rows: [], .. } => h.iter_mut().for_each(|v| *v = 0.0),
        ProjectorBasis::Range { rows, .. } => {
            // h = Qa with (Qa)_F = t_F, a nearest to Qᵀg.
            let a0: Vec<f64> = rows.chunks(n).map(|q| dot(q, g)).collect();
            let Some(a) = nearest_solution(&restrict(rows, n, &free)?.transpose(), &free_slopes, &a0)? else {
                return Ok(None);
            };
            h.iter_mut().for_each(|v| *v = 0.0);
            for (q, aj) in rows.chunks(n).zip(&a) {
                h.iter_mut().zip(q).for_each(|(hi, qi)| *hi += aj * qi);
            }
        }
    }
    Ok(certified(&h).then_some(z))
}
