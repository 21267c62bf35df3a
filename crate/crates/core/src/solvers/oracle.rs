//! Brute-force enumeration over `V^N` for a finite value set `V`.

use std::ops::ControlFlow;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::measurement::RealMatrix;

/// Largest number of candidates any enumeration may visit.
pub const ENUMERATION_LIMIT: f64 = 1e7;

pub(crate) fn check_budget(values: usize, n: usize, limit: f64) -> Result<()> {
    let count = (values as f64).powi(n as i32);
    if count > limit {
        return Err(Error::BudgetExceeded { count, limit });
    }
    Ok(())
}

/// Visits every `x ∈ values^N` in odometer order (last coordinate fastest)
/// together with `Φx`. Prefix products are cached so each step costs
/// `O(M)` amortized and `Φx` never accumulates update drift.
pub(crate) fn enumerate<B>(
    values: &[f64],
    phi: &RealMatrix,
    mut visit: impl FnMut(&[f64], &[f64]) -> ControlFlow<B>,
) -> Option<B> {
    let n = phi.cols();
    let m = phi.rows();
    let columns = phi.transpose();
    let mut digits = vec![0usize; n];
    let mut x = vec![values[0]; n];
    // prefix[k] = Φ restricted to the first k coordinates applied to x.
    let mut prefix = vec![0.0; (n + 1) * m];
    let refresh = |prefix: &mut [f64], x: &[f64], from: usize| {
        for k in from..n {
            let (head, tail) = prefix.split_at_mut((k + 1) * m);
            let prev = &head[k * m..];
            let next = &mut tail[..m];
            let col = columns.row(k);
            for ((nx, pv), c) in next.iter_mut().zip(prev).zip(col) {
                *nx = pv + x[k] * c;
            }
        }
    };
    refresh(&mut prefix, &x, 0);
    loop {
        if let ControlFlow::Break(b) = visit(&x, &prefix[n * m..]) {
            return Some(b);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < values.len() {
                x[k] = values[digits[k]];
                break;
            }
            digits[k] = 0;
            x[k] = values[0];
        }
        refresh(&mut prefix, &x, k);
    }
}

/// Every `x ∈ 𝒳^N` with `‖Φx − y‖₂ ≤ tol·(1 + ‖y‖₂)`, in odometer order.
pub fn exhaustive_oracle(alphabet: &Alphabet, phi: &RealMatrix, y: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch(format!("{} measurements for a matrix with {} rows", y.len(), phi.rows())));
    }
    check_budget(alphabet.len(), phi.cols(), ENUMERATION_LIMIT)?;
    let threshold = tol * (1.0 + norm2(y));
    let mut found = Vec::new();
    enumerate::<()>(alphabet.symbols(), phi, |x, px| {
        let r: f64 = px.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        if r.sqrt() <= threshold {
            found.push(x.to_vec());
        }
        ControlFlow::Continue(())
    });
    Ok(found)
}
