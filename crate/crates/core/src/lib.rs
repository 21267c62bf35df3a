//! Reconstruction of discrete-valued signals from underdetermined linear
//! measurements.
//!
//! A signal `x` with entries drawn from a known finite alphabet
//! `r_1 < ... < r_L` (with probabilities `p_i`) is recovered from `y = Φx`
//! by minimizing the sum of weighted absolute values
//!
//! ```text
//! F(z) = Σ_i p_i ‖z − r_i‖₁   subject to   Φz = y.
//! ```
//!
//! The crate provides the objective and its proximal operator
//! ([`alphabet`]), measurement operators ([`measurement`]), the exact
//! epigraph linear program ([`lp_form`]), three solver routes
//! ([`solvers`]) and uniqueness / null-space checks plus recovery metrics
//! ([`analysis`]).

// `!(x <= tol)` is used on purpose so that NaN fails tolerance checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alphabet;
pub mod analysis;
pub mod error;
pub mod io;
mod linalg;
pub mod lp_form;
pub mod measurement;
pub mod rng;
pub mod solvers;

pub use alphabet::{Alphabet, PiecewiseLinearObjective, Preset};
pub use error::{Error, Result};
pub use lp_form::LinearProgram;
pub use measurement::{AffineProjector, ComplexMatrix, Matrix, RealMatrix};
pub use num_complex::Complex64;
pub use solvers::{SolveResult, SolveStatus, SolverOptions};
