//! Dense two-phase tableau simplex.
//!
//! Free variables are split as `x = x⁺ − x⁻`, inequalities receive slacks,
//! and rows without a natural starting basic variable receive artificials.
//! The final basic solution is recomputed from the original data with an LU
//! solve so round-off accumulated over many pivots does not leak into the
//! reported point.

use std::time::Instant;

use super::{PivotRule, SolveResult, SolveStatus, SolverOptions};
use crate::alphabet::PiecewiseLinearObjective;
use crate::error::{Error, Result};
use crate::lp_form::{build_soav_lp, extract_solution, LinearProgram};
use crate::measurement::RealMatrix;
use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-9;
const DRIVE_OUT_TOL: f64 = 1e-7;
/// Degenerate pivots tolerated under Dantzig's rule before switching to Bland's.
const DEGENERATE_RUN: usize = 50;

/// Full outcome of an LP solve, including the complementary-slackness check.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// `max_j |x_j d_j|` over the standard-form variables, with `d` the
    /// reduced costs recomputed from the final basis.
    pub complementary_slackness: f64,
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(r, q);
        let (before, rest) = self.data.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        pivot_row.iter_mut().for_each(|x| *x *= inv);
        pivot_row[q] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                row.iter_mut().zip(pivot_row.iter()).for_each(|(x, p)| *x -= f * p);
                row[q] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        eliminate(&mut self.obj);
        self.basis[r] = q;
    }

    fn entering(&self, rule: PivotRule) -> Option<usize> {
        let candidates = self.obj[..self.first_artificial].iter().enumerate().filter(|(_, &d)| d < -REDUCED_COST_TOL);
        match rule {
            PivotRule::Bland => candidates.map(|(j, _)| j).next(),
            PivotRule::Dantzig => candidates.min_by(|a, b| a.1.total_cmp(b.1)).map(|(j, _)| j),
        }
    }

    /// Minimum-ratio row for column `q`; ties go to the smallest basic index.
    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, q);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(i).max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br);
                    if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    /// Runs simplex iterations until optimality. Returns the terminal status.
    fn run(&mut self, opts: &SolverOptions, iterations: &mut usize) -> SolveStatus {
        let mut degenerate = 0;
        loop {
            let rule = if opts.pivot_rule == PivotRule::Dantzig && degenerate < DEGENERATE_RUN {
                PivotRule::Dantzig
            } else {
                PivotRule::Bland
            };
            let Some(q) = self.entering(rule) else {
                return SolveStatus::Optimal;
            };
            let Some(r) = self.leaving(q) else {
                return SolveStatus::Unbounded;
            };
            if *iterations >= opts.max_iterations {
                return SolveStatus::IterationLimit;
            }
            if self.rhs(r) <= PIVOT_TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q);
            *iterations += 1;
        }
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width;
        self.obj = vec![0.0; w];
        self.obj[..cost.len()].copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let row = &self.data[i * w..(i + 1) * w];
                self.obj.iter_mut().zip(row).for_each(|(o, a)| *o -= cb * a);
            }
        }
    }
}

/// Solves `lp` and reports the LP-level outcome.
pub fn solve_lp(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpOutcome> {
    if !(opts.feasibility_tol > 0.0 && opts.objective_tol > 0.0) {
        return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
    }
    let n = lp.num_vars();
    let eqs = lp.equalities();
    let ineqs = lp.inequalities();
    let rows = eqs.len() + ineqs.len();
    let structural = 2 * n + ineqs.len();

    // Standard-form rows over the structural columns, with nonnegative rhs.
    let mut std_rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rows);
    let mut needs_artificial = Vec::with_capacity(rows);
    let mut natural_basis = Vec::with_capacity(rows);
    for (k, c) in eqs.iter().chain(ineqs).enumerate() {
        let mut row = vec![0.0; structural];
        for &(j, v) in &c.coeffs {
            row[j] += v;
            row[n + j] -= v;
        }
        let slack = (k >= eqs.len()).then(|| 2 * n + (k - eqs.len()));
        if let Some(s) = slack {
            row[s] = 1.0;
        }
        let mut rhs = c.rhs;
        if rhs < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
            rhs = -rhs;
        }
        let natural = slack.filter(|_| c.rhs >= 0.0);
        needs_artificial.push(natural.is_none());
        natural_basis.push(natural);
        std_rows.push((row, rhs));
    }
    let artificials = needs_artificial.iter().filter(|&&a| a).count();
    let total = structural + artificials;
    let width = total + 1;

    let mut data = vec![0.0; rows * width];
    let mut basis = vec![0; rows];
    let mut next_art = structural;
    for (i, (row, rhs)) in std_rows.iter().enumerate() {
        let dst = &mut data[i * width..(i + 1) * width];
        dst[..structural].copy_from_slice(row);
        dst[total] = *rhs;
        basis[i] = match natural_basis[i] {
            Some(s) => s,
            None => {
                dst[next_art] = 1.0;
                next_art += 1;
                next_art - 1
            }
        };
    }
    let original = data.clone();

    let mut t = Tableau { rows, width, data, obj: Vec::new(), basis, first_artificial: structural };
    let mut iterations = 0;

    if artificials > 0 {
        let mut phase1 = vec![0.0; total];
        phase1[structural..].iter_mut().for_each(|c| *c = 1.0);
        t.set_objective(&phase1);
        let status = t.run(opts, &mut iterations);
        if status == SolveStatus::IterationLimit {
            return Ok(incomplete(&t, n, status, iterations, lp));
        }
        let infeasibility = -t.obj[total];
        let scale = 1.0 + std_rows.iter().fold(0.0f64, |m, r| m.max(r.1));
        if infeasibility > opts.feasibility_tol * scale {
            return Ok(LpOutcome {
                x: vec![0.0; n],
                objective: f64::NAN,
                status: SolveStatus::Infeasible,
                iterations,
                complementary_slackness: f64::NAN,
            });
        }
        for r in 0..rows {
            if t.basis[r] >= structural {
                let pick = (0..structural).find(|&j| t.at(r, j).abs() > DRIVE_OUT_TOL);
                if let Some(q) = pick {
                    t.pivot(r, q);
                }
                // Otherwise the row is redundant and its artificial stays basic at zero.
            }
        }
    }

    let mut cost = vec![0.0; total];
    for (j, &c) in lp.cost().iter().enumerate() {
        cost[j] = c;
        cost[n + j] = -c;
    }
    t.set_objective(&cost);
    let status = t.run(opts, &mut iterations);
    if status != SolveStatus::Optimal {
        return Ok(incomplete(&t, n, status, iterations, lp));
    }

    let mut x_std = vec![0.0; total];
    for i in 0..rows {
        x_std[t.basis[i]] = t.rhs(i);
    }
    let mut cs = f64::NAN;
    if let Some((refined, reduced)) = refine(&original, width, rows, &t.basis, &cost) {
        // Accept the refined point only if it stayed primal feasible.
        if refined.iter().all(|&v| v >= -opts.feasibility_tol) {
            for (i, &b) in t.basis.iter().enumerate() {
                x_std[b] = refined[i].max(0.0);
            }
        }
        cs = x_std.iter().zip(&reduced).fold(0.0f64, |m, (x, d)| m.max((x * d).abs()));
    }

    let x: Vec<f64> = (0..n).map(|j| x_std[j] - x_std[n + j]).collect();
    Ok(LpOutcome { objective: lp.objective_value(&x), x, status, iterations, complementary_slackness: cs })
}

fn incomplete(t: &Tableau, n: usize, status: SolveStatus, iterations: usize, lp: &LinearProgram) -> LpOutcome {
    let mut x_std = vec![0.0; t.width - 1];
    for i in 0..t.rows {
        x_std[t.basis[i]] = t.rhs(i);
    }
    let x: Vec<f64> = (0..n).map(|j| x_std[j] - x_std[n + j]).collect();
    LpOutcome { objective: lp.objective_value(&x), x, status, iterations, complementary_slackness: f64::NAN }
}

/// Recomputes the basic solution `B x_B = b` and the reduced costs
/// `d = c − Aᵀ B⁻ᵀ c_B` from the original standard-form data.
fn refine(original: &[f64], width: usize, rows: usize, basis: &[usize], cost: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let total = width - 1;
    let b_mat = DMatrix::from_fn(rows, rows, |i, k| original[i * width + basis[k]]);
    let rhs = DVector::from_fn(rows, |i, _| original[i * width + total]);
    let c_b = DVector::from_fn(rows, |k, _| cost[basis[k]]);
    let x_b = b_mat.clone().lu().solve(&rhs)?;
    let duals = b_mat.transpose().lu().solve(&c_b)?;
    if !x_b.iter().chain(duals.iter()).all(|v| v.is_finite()) {
        return None;
    }
    let mut reduced = cost.to_vec();
    for (i, &yi) in duals.iter().enumerate() {
        if yi != 0.0 {
            let row = &original[i * width..i * width + total];
            reduced.iter_mut().zip(row).for_each(|(d, a)| *d -= yi * a);
        }
    }
    Some((x_b.iter().copied().collect(), reduced))
}

/// Solves a general LP with the dense simplex. `z` holds all LP variables,
/// `objective` is `cᵀx` and the residual covers the equality rows.
pub fn simplex_solve(lp: &LinearProgram, opts: &SolverOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let out = solve_lp(lp, opts)?;
    let eq = lp.equalities();
    let residual: f64 =
        eq.iter().map(|c| (c.coeffs.iter().map(|&(j, v)| v * out.x[j]).sum::<f64>() - c.rhs).powi(2)).sum::<f64>().sqrt();
    let rhs_norm = eq.iter().map(|c| c.rhs * c.rhs).sum::<f64>().sqrt();
    Ok(SolveResult {
        objective: out.objective,
        feasibility_residual: residual / (1.0 + rhs_norm),
        z: out.x,
        status: out.status,
        iterations: out.iterations,
        wall_time: start.elapsed(),
    })
}

/// Minimizes `F(z)` subject to `Φz = y` through the epigraph LP.
pub fn soav_lp_solve(obj: &PiecewiseLinearObjective, phi: &RealMatrix, y: &[f64], opts: &SolverOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let n = phi.cols();
    let lp = build_soav_lp(obj, phi, y)?;
    let out = solve_lp(&lp, opts)?;
    let (z, status) = match out.status {
        SolveStatus::Optimal => match extract_solution(obj, &out.x, n) {
            Ok((z, _)) => (z, SolveStatus::Optimal),
            Err(_) => (out.x[..n].to_vec(), SolveStatus::NumericalFailure),
        },
        SolveStatus::Infeasible => (vec![0.0; n], SolveStatus::Infeasible),
        other => (out.x[..n].to_vec(), other),
    };
    Ok(SolveResult::assemble(obj, phi, y, z, status, out.iterations, start))
}
