//! Epigraph linear program for the SOAV objective.
//!
//! With `L(t) = max_i (a_i t + b_i)`, minimizing `Σ_n L(z_n)` subject to
//! `Φz = y` is the LP
//!
//! ```text
//! minimize   1ᵀθ
//! subject to Φz = y,   (I_N ⊗ a) z + 1_N ⊗ b ≤ (I_N ⊗ 1_{L+1}) θ
//! ```
//!
//! over the joint free variables `(z, θ)`.

use std::fmt::Write as _;

use crate::alphabet::PiecewiseLinearObjective;
use crate::error::{Error, Result};
use crate::measurement::RealMatrix;

/// Slack allowed when checking `θ_n ≥ L(z_n)` on a returned solution.
pub const EPIGRAPH_TOL: f64 = 1e-7;

/// A sparse linear constraint `Σ coeff·x[index] (= or ≤) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `minimize cᵀx  s.t.  A_eq x = b_eq,  G x ≤ h`, all variables free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    cost: Vec<f64>,
    equalities: Vec<Constraint>,
    inequalities: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>, equalities: Vec<Constraint>, inequalities: Vec<Constraint>) -> Result<Self> {
        let n = cost.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("LP needs at least one variable".into()));
        }
        for c in equalities.iter().chain(&inequalities) {
            if let Some(&(j, _)) = c.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(Error::DimensionMismatch(format!("constraint touches variable {j} of {n}")));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|(_, v)| !v.is_finite()) {
                return Err(Error::InvalidArgument("LP data must be finite".into()));
            }
        }
        Ok(LinearProgram { cost, equalities, inequalities })
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn equalities(&self) -> &[Constraint] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Constraint] {
        &self.inequalities
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Plain-text dump with `minimize`, `subject-to-eq` and
    /// `subject-to-ineq` sections; constraint rows are dense CSV with the
    /// right-hand side as the last field.
    pub fn dump(&self) -> String {
        let n = self.num_vars();
        let mut out = String::from("minimize\n");
        out.push_str(&join(&self.cost));
        out.push('\n');
        for (title, rows) in [("subject-to-eq", &self.equalities), ("subject-to-ineq", &self.inequalities)] {
            out.push_str(title);
            out.push('\n');
            for c in rows {
                let mut dense = vec![0.0; n + 1];
                for &(j, v) in &c.coeffs {
                    dense[j] += v;
                }
                dense[n] = c.rhs;
                let _ = writeln!(out, "{}", join(&dense));
            }
        }
        out
    }

    /// Parses the output of [`dump`](Self::dump).
    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("minimize") {
            return Err(Error::Parse("LP dump must start with `minimize`".into()));
        }
        let cost = split_row(lines.next().ok_or_else(|| Error::Parse("missing cost row".into()))?)?;
        let n = cost.len();
        let mut equalities = Vec::new();
        let mut inequalities = Vec::new();
        let mut section: Option<bool> = None;
        for line in lines {
            match line {
                "subject-to-eq" => section = Some(true),
                "subject-to-ineq" => section = Some(false),
                row => {
                    let values = split_row(row)?;
                    if values.len() != n + 1 {
                        return Err(Error::Parse(format!("expected {} fields, got {}", n + 1, values.len())));
                    }
                    let coeffs = values[..n].iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j, v)).collect();
                    let c = Constraint { coeffs, rhs: values[n] };
                    match section {
                        Some(true) => equalities.push(c),
                        Some(false) => inequalities.push(c),
                        None => return Err(Error::Parse("constraint row outside a section".into())),
                    }
                }
            }
        }
        LinearProgram::new(cost, equalities, inequalities)
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn split_row(line: &str) -> Result<Vec<f64>> {
    line.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("invalid number `{s}`")))).collect()
}

/// Builds the epigraph LP over `(z, θ) ∈ R^{2N}`.
pub fn build_soav_lp(obj: &PiecewiseLinearObjective, phi: &RealMatrix, y: &[f64]) -> Result<LinearProgram> {
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch(format!("{} measurements for a matrix with {} rows", y.len(), phi.rows())));
    }
    let n = phi.cols();
    let mut cost = vec![0.0; 2 * n];
    cost[n..].iter_mut().for_each(|c| *c = 1.0);

    let equalities = phi
        .row_iter()
        .zip(y)
        .map(|(row, &rhs)| Constraint {
            coeffs: row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j, v)).collect(),
            rhs,
        })
        .collect();

    // Row (n, i): a_i z_n − θ_n ≤ −b_i, i.e. the tiled intercepts move to the right.
    let intercepts = obj.intercepts();
    let mut inequalities = Vec::with_capacity(n * obj.num_pieces());
    for k in 0..n {
        for (&a, &b) in obj.slopes().iter().zip(intercepts) {
            inequalities.push(Constraint { coeffs: vec![(k, a), (n + k, -1.0)], rhs: -b });
        }
    }
    LinearProgram::new(cost, equalities, inequalities)
}

/// Splits an LP solution into `(z, θ)` and checks `θ_n ≥ L(z_n) − EPIGRAPH_TOL`.
pub fn extract_solution(obj: &PiecewiseLinearObjective, x: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != 2 * n {
        return Err(Error::DimensionMismatch(format!("expected {} LP variables, got {}", 2 * n, x.len())));
    }
    let (z, theta) = x.split_at(n);
    for (index, (&zn, &tn)) in z.iter().zip(theta).enumerate() {
        let value = obj.eval(zn);
        if tn < value - EPIGRAPH_TOL {
            return Err(Error::EpigraphViolation { index, theta: tn, value });
        }
    }
    Ok((z.to_vec(), theta.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;

    fn binary() -> PiecewiseLinearObjective {
        Alphabet::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap().objective()
    }

    #[test]
    fn dimensions() {
        let phi = RealMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let lp = build_soav_lp(&binary(), &phi, &[2.0]).unwrap();
        assert_eq!(lp.num_vars(), 4);
        assert_eq!(lp.inequalities().len(), 6);
        assert_eq!(lp.equalities().len(), 1);
        assert_eq!(lp.cost(), &[0.0, 0.0, 1.0, 1.0]);
        for c in lp.inequalities() {
            assert_eq!(c.coeffs.len(), 2);
            assert!(c.coeffs[0].0 < 2);
            assert_eq!(c.coeffs[1], (c.coeffs[0].0 + 2, -1.0));
        }
        assert!(build_soav_lp(&binary(), &phi, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn extracts_solutions() {
        let (z, t) = extract_solution(&binary(), &[0.0, 1.0, 0.5, 0.5], 2).unwrap();
        assert_eq!(z, vec![0.0, 1.0]);
        assert_eq!(t, vec![0.5, 0.5]);
        assert!(matches!(extract_solution(&binary(), &[0.0, 1.0, 0.5], 2), Err(Error::DimensionMismatch(_))));
        assert!(extract_solution(&binary(), &[0.0, 1.0, 0.5 + 1e-3, 0.5 - 5e-8], 2).is_ok());
        assert!(matches!(extract_solution(&binary(), &[0.0, 1.0, 0.4, 0.5], 2), Err(Error::EpigraphViolation { index: 0, .. })));
    }

    #[test]
    fn dump_round_trip() {
        let phi = RealMatrix::from_rows(&[vec![1.0, -2.5], vec![0.0, 3.0]]).unwrap();
        let lp = build_soav_lp(&binary(), &phi, &[2.0, 0.125]).unwrap();
        let text = lp.dump();
        assert!(text.starts_with("minimize\n0,0,1,1\nsubject-to-eq\n1,-2.5,0,0,2\n"));
        assert_eq!(LinearProgram::from_dump(&text).unwrap().dump(), text);
        assert!(LinearProgram::from_dump("maximize\n1\n").is_err());
    }
}
