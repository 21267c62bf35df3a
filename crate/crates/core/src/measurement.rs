//! Measurement operators: dense real/complex matrices, Gaussian ensembles,
//! DFT and Kronecker operators, row subsampling, complex-to-real lifting and
//! projection onto the affine set `{z : Φz = y}`.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, RowSpaceQr};
use crate::rng::SeededRng;

/// Relative pivot threshold below which constraint rows count as dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Relative least-squares residual above which a system is inconsistent.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Entry types usable in a [`Matrix`].
pub trait Entry: Copy + PartialEq + std::fmt::Debug + Add<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_finite(&self) -> bool;
}

impl Entry for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Entry for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Entry> Matrix<T> {
    /// Wraps row-major `data`. Requires at least one row and column and
    /// finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("matrix must be non-empty, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok(self.row_iter().map(|row| row.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b)).collect())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.rows) {
            return Err(Error::InvalidArgument(format!("row index {bad} out of range for {} rows", self.rows)));
        }
        let data = indices.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Ok(Matrix { rows: indices.len(), cols: self.cols, data })
    }

    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.cols) {
            return Err(Error::InvalidArgument(format!("column index {bad} out of range for {} columns", self.cols)));
        }
        let data = self.row_iter().flat_map(|row| indices.iter().map(move |&j| row[j])).collect();
        Ok(Matrix { rows: self.rows, cols: indices.len(), data })
    }

    /// Column-major stacking.
    pub fn vec(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Inverse of [`vec`](Self::vec).
    pub fn unvec(v: &[T], rows: usize, cols: usize) -> Result<Self> {
        if v.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("cannot reshape {} entries to {rows}x{cols}", v.len())));
        }
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[i * cols + j] = v[j * rows + i];
            }
        }
        Ok(m)
    }
}

impl RealMatrix {
    pub fn to_complex(&self) -> ComplexMatrix {
        self.map(|x| Complex64::new(x, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl ComplexMatrix {
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}

/// `m × n` matrix of i.i.d. standard normals drawn from [`SeededRng`].
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<RealMatrix> {
    let mut rng = SeededRng::new(seed);
    let data = (0..m * n).map(|_| rng.normal()).collect();
    RealMatrix::new(m, n, data)
}

/// `K × K` DFT matrix `W[m][n] = ω^{mn}` with `ω = exp(−j2π/K)`.
pub fn dft_matrix(k: usize) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("DFT size must be positive".into()));
    }
    let mut data = Vec::with_capacity(k * k);
    for m in 0..k {
        for n in 0..k {
            // Reduce the exponent first so large products keep full accuracy.
            let e = (m * n) % k;
            let w = match (4 * e).is_multiple_of(k) {
                // quarter turns are exact
                true => {
                    [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)]
                        [4 * e / k]
                }
                false => Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * e as f64 / k as f64),
            };
            data.push(w);
        }
    }
    ComplexMatrix::new(k, k, data)
}

/// Row `row` of `A ⊗ B` without forming the product.
pub fn kron_row<T: Entry>(a: &Matrix<T>, b: &Matrix<T>, row: usize) -> Vec<T> {
    let (i, k) = (row / b.rows, row % b.rows);
    let b_row = b.row(k);
    let mut out = Vec::with_capacity(a.cols * b.cols);
    for &aij in a.row(i) {
        out.extend(b_row.iter().map(|&bkl| aij * bkl));
    }
    out
}

/// Dense Kronecker product `A ⊗ B`, with blocks `A_ij B`.
pub fn kron<T: Entry>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let rows = a.rows * b.rows;
    let data = (0..rows).flat_map(|r| kron_row(a, b, r)).collect();
    Matrix { rows, cols: a.cols * b.cols, data }
}

/// Rows of `A ⊗ B` selected by `indices`, materialized on demand.
pub fn kron_select_rows<T: Entry>(a: &Matrix<T>, b: &Matrix<T>, indices: &[usize]) -> Result<Matrix<T>> {
    let total = a.rows * b.rows;
    if let Some(&bad) = indices.iter().find(|&&i| i >= total) {
        return Err(Error::InvalidArgument(format!("row index {bad} out of range for {total} rows")));
    }
    let data = indices.iter().flat_map(|&r| kron_row(a, b, r)).collect();
    Ok(Matrix { rows: indices.len(), cols: a.cols * b.cols, data })
}

/// Uniform `keep`-subset of `0..total` drawn by a seeded Fisher–Yates
/// prefix, returned sorted.
pub fn sample_indices(total: usize, keep: usize, seed: u64) -> Result<Vec<usize>> {
    if keep == 0 || keep > total {
        return Err(Error::InvalidArgument(format!("keep must lie in 1..={total}, got {keep}")));
    }
    let mut rng = SeededRng::new(seed);
    let mut idx: Vec<usize> = (0..total).collect();
    for i in 0..keep {
        let j = i + rng.below(total - i);
        idx.swap(i, j);
    }
    idx.truncate(keep);
    idx.sort_unstable();
    Ok(idx)
}

/// Keeps a uniformly random `keep`-subset of the rows of `m`.
pub fn subsample_rows<T: Entry>(m: &Matrix<T>, keep: usize, seed: u64) -> Result<(Matrix<T>, Vec<usize>)> {
    let idx = sample_indices(m.rows, keep, seed)?;
    Ok((m.select_rows(&idx)?, idx))
}

/// Lifts `Φz = y` (complex `Φ`, real `z`) to `[Re Φ; Im Φ] z = [Re y; Im y]`.
pub fn realify(phi: &ComplexMatrix, y: &[Complex64]) -> Result<(RealMatrix, Vec<f64>)> {
    if y.len() != phi.rows {
        return Err(Error::DimensionMismatch(format!("{} measurements for a matrix with {} rows", y.len(), phi.rows)));
    }
    let mut data = Vec::with_capacity(2 * phi.data.len());
    data.extend(phi.data.iter().map(|z| z.re));
    data.extend(phi.data.iter().map(|z| z.im));
    let mut y_r: Vec<f64> = y.iter().map(|z| z.re).collect();
    y_r.extend(y.iter().map(|z| z.im));
    Ok((Matrix { rows: 2 * phi.rows, cols: phi.cols, data }, y_r))
}

/// `‖Φz − y‖₂ / (1 + ‖y‖₂)`.
pub fn relative_residual(phi: &RealMatrix, y: &[f64], z: &[f64]) -> f64 {
    let r: f64 = phi.row_iter().zip(y).map(|(row, yi)| (dot(row, z) - yi).powi(2)).sum();
    r.sqrt() / (1.0 + norm2(y))
}

/// Orthonormal basis of `ker Φ` (each vector of length `cols`), using the
/// same rank threshold as [`AffineProjector`].
pub fn kernel_basis(phi: &RealMatrix) -> Vec<Vec<f64>> {
    let qr = RowSpaceQr::new(&phi.data, phi.cols, RANK_TOL);
    qr.q_columns(qr.rank()..phi.cols)
}

/// Numerical rank of `Φ` under [`RANK_TOL`].
pub fn numerical_rank(phi: &RealMatrix) -> usize {
    RowSpaceQr::new(&phi.data, phi.cols, RANK_TOL).rank()
}

#[derive(Debug, Clone)]
enum Basis {
    /// `P(z) = z − Q_r (Q_rᵀ z − c)`.
    Range { rows: Vec<f64>, coords: Vec<f64> },
    /// `P(z) = z₀ + Q_k Q_kᵀ z`.
    Kernel { rows: Vec<f64>, offset: Vec<f64> },
}

/// The orthonormal basis held by an [`AffineProjector`], one length-`N`
/// vector per chunk.
#[derive(Debug, Clone, Copy)]
pub(crate) enum ProjectorBasis<'a> {
    /// Row space of `Φ`; feasible points satisfy `Qᵀz = coords`.
    Range { rows: &'a [f64], coords: &'a [f64] },
    /// Kernel of `Φ`.
    Kernel { rows: &'a [f64] },
}

/// Euclidean projection onto `{z : Φz = y}` for a consistent, possibly
/// rank-deficient real system.
///
/// Whichever of the row-space or kernel bases is smaller is stored
/// explicitly, so a projection costs `2·N·min(rank, N − rank)` flops.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    n: usize,
    rank: usize,
    basis: Basis,
    feasible_point: Vec<f64>,
}

impl AffineProjector {
    pub fn new(phi: &RealMatrix, y: &[f64]) -> Result<Self> {
        if y.len() != phi.rows {
            return Err(Error::DimensionMismatch(format!("{} measurements for a matrix with {} rows", y.len(), phi.rows)));
        }
        let n = phi.cols;
        let qr = RowSpaceQr::new(&phi.data, n, RANK_TOL);
        let rank = qr.rank();
        let coords = qr.row_space_coords(y);

        let mut feasible_point = vec![0.0; n];
        feasible_point[..rank].copy_from_slice(&coords);
        qr.apply_q(&mut feasible_point);

        let residual = relative_residual(phi, y, &feasible_point);
        if !(residual <= CONSISTENCY_TOL) {
            return Err(Error::Inconsistent { residual });
        }

        let basis = if rank <= n - rank {
            Basis::Range { rows: qr.q_columns(0..rank).concat(), coords }
        } else {
            Basis::Kernel { rows: qr.q_columns(rank..n).concat(), offset: feasible_point.clone() }
        };
        Ok(AffineProjector { n, rank, basis, feasible_point })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub(crate) fn basis(&self) -> ProjectorBasis<'_> {
        match &self.basis {
            Basis::Range { rows, coords } => ProjectorBasis::Range { rows, coords },
            Basis::Kernel { rows, .. } => ProjectorBasis::Kernel { rows },
        }
    }

    /// Minimum-norm feasible point.
    pub fn feasible_point(&self) -> &[f64] {
        &self.feasible_point
    }

    /// Writes `P(z)` into `out`.
    pub fn project_into(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), self.n);
        assert_eq!(out.len(), self.n);
        match &self.basis {
            Basis::Range { rows, coords } => {
                out.copy_from_slice(z);
                if self.rank == 0 {
                    return;
                }
                for (q, c) in rows.chunks(self.n).zip(coords) {
                    let w = dot(q, z) - c;
                    out.iter_mut().zip(q).for_each(|(o, qi)| *o -= w * qi);
                }
            }
            Basis::Kernel { rows, offset } => {
                out.copy_from_slice(offset);
                for q in rows.chunks(self.n) {
                    let w = dot(q, z);
                    out.iter_mut().zip(q).for_each(|(o, qi)| *o += w * qi);
                }
            }
        }
    }

    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.project_into(z, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a = gaussian_matrix(100, 200, 9).unwrap();
        assert_eq!((a.rows(), a.cols()), (100, 200));
        assert_eq!(a, gaussian_matrix(100, 200, 9).unwrap());
        assert_ne!(a, gaussian_matrix(100, 200, 10).unwrap());
    }

    #[test]
    fn gaussian_moments() {
        let a = gaussian_matrix(1, 1000, 42).unwrap();
        let n = 1000.0;
        let mean = a.data().iter().sum::<f64>() / n;
        let std = (a.data().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 0.1, "{mean}");
        assert!((std - 1.0).abs() < 0.1, "{std}");
    }

    #[test]
    fn small_dft_matrices() {
        let w = dft_matrix(2).unwrap();
        assert_eq!(w.data(), &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        let w = dft_matrix(4).unwrap();
        assert_abs_diff_eq!(w.get(1, 1).re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.get(1, 1).im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn dft_is_unitary_up_to_scale() {
        for k in [1, 2, 3, 8, 37, 64] {
            let w = dft_matrix(k).unwrap();
            assert_eq!(w, w.transpose());
            let p = w.matmul(&w.conj()).unwrap();
            for i in 0..k {
                for j in 0..k {
                    let expected = if i == j { k as f64 } else { 0.0 };
                    assert!((p.get(i, j) - c(expected, 0.0)).norm() <= 1e-9 * k as f64, "k={k}");
                }
            }
        }
    }

    #[test]
    fn kron_blocks() {
        let i2 = RealMatrix::identity(2);
        let two = RealMatrix::new(1, 1, vec![2.0]).unwrap();
        assert_eq!(kron(&i2, &two), RealMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap());

        let a = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = RealMatrix::from_rows(&[vec![0.0, 5.0], vec![6.0, 7.0]]).unwrap();
        let k = kron(&a, &b);
        assert_eq!(k.row(0), &[0.0, 5.0, 0.0, 10.0]);
        assert_eq!(k.row(3), &[18.0, 21.0, 24.0, 28.0]);
        for r in 0..4 {
            assert_eq!(kron_row(&a, &b, r), k.row(r));
        }
    }

    #[test]
    fn kron_of_37_point_dft() {
        let w = dft_matrix(37).unwrap();
        let rows = kron_select_rows(&w, &w, &[0, 1368]).unwrap();
        assert_eq!((rows.rows(), rows.cols()), (2, 1369));
    }

    #[test]
    fn vec_is_column_major() {
        let x = RealMatrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(x.vec(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(RealMatrix::unvec(&x.vec(), 2, 2).unwrap(), x);
        assert_eq!(gaussian_matrix(37, 37, 1).unwrap().vec().len(), 1369);
        assert!(RealMatrix::unvec(&[1.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn subsampling() {
        let m = gaussian_matrix(1369, 3, 5).unwrap();
        let (s, idx) = subsample_rows(&m, 685, 11).unwrap();
        assert_eq!((s.rows(), s.cols()), (685, 3));
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(idx, subsample_rows(&m, 685, 11).unwrap().1);
        for (k, &i) in idx.iter().enumerate() {
            assert_eq!(s.row(k), m.row(i));
        }

        let small = gaussian_matrix(4, 2, 1).unwrap();
        let (all, idx) = subsample_rows(&small, 4, 3).unwrap();
        assert_eq!(all, small);
        assert_eq!(idx, vec![0, 1, 2, 3]);
        assert!(subsample_rows(&small, 0, 3).is_err());
        assert!(subsample_rows(&small, 5, 3).is_err());
    }

    #[test]
    fn realify_examples() {
        let phi = ComplexMatrix::new(1, 1, vec![c(1.0, 1.0)]).unwrap();
        let (pr, yr) = realify(&phi, &[c(2.0, 3.0)]).unwrap();
        assert_eq!(pr.data(), &[1.0, 1.0]);
        assert_eq!(yr, vec![2.0, 3.0]);

        let real = gaussian_matrix(3, 4, 2).unwrap().to_complex();
        let (pr, _) = realify(&real, &[c(0.0, 0.0); 3]).unwrap();
        assert!(pr.data()[12..].iter().all(|&x| x == 0.0));
        assert!(realify(&real, &[c(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn projector_coordinate_constraint() {
        let phi = RealMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let p = AffineProjector::new(&phi, &[1.0]).unwrap();
        let z = p.project(&[5.0, -3.0]);
        assert_abs_diff_eq!(z[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z[1], -3.0, epsilon = 1e-15);
    }

    #[test]
    fn projector_rejects_inconsistent_system() {
        let phi = RealMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(AffineProjector::new(&phi, &[1.0, 3.0]), Err(Error::Inconsistent { .. })));
        let p = AffineProjector::new(&phi, &[1.0, 2.0]).unwrap();
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn projector_uses_both_representations() {
        // rank 4 of 5 columns uses the kernel form, rank 1 the range form
        for m in [1, 4] {
            let phi = gaussian_matrix(m, 5, 77).unwrap();
            let y = phi.matvec(&[1.0, -2.0, 0.5, 0.0, 3.0]).unwrap();
            let p = AffineProjector::new(&phi, &y).unwrap();
            let z = p.project(&[0.3; 5]);
            assert!(relative_residual(&phi, &y, &z) < 1e-12);
            let zz = p.project(&z);
            for (a, b) in z.iter().zip(&zz) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn kernel_basis_of_all_ones_row() {
        let phi = RealMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let k = kernel_basis(&phi);
        assert_eq!(k.len(), 1);
        assert_abs_diff_eq!(k[0][0] + k[0][1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(norm2(&k[0]), 1.0, epsilon = 1e-15);
        assert!(kernel_basis(&RealMatrix::identity(3)).is_empty());
    }
}
