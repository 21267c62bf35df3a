//! Rank-revealing Householder QR used by the affine projector and the
//! kernel-basis routines.

/// Pivoted QR of `Aᵀ` where the rows of `A` are the constraint rows.
///
/// With `AᵀΠ = QR`, the first `rank` columns of `Q` span the row space of
/// `A` and the remaining `n − rank` columns span its kernel.
#[derive(Debug, Clone)]
pub(crate) struct RowSpaceQr {
    n: usize,
    rank: usize,
    /// Reflector `k` acts on coordinates `k..n`; `v[0]` corresponds to index `k`.
    reflectors: Vec<(Vec<f64>, f64)>,
    /// Row indices of `A` in pivot order.
    perm: Vec<usize>,
    /// Leading `rank × rank` block of `R`, row-major.
    r11: Vec<f64>,
}

impl RowSpaceQr {
    /// Factors the `rows` (each of length `n`). Pivots whose remaining norm
    /// falls below `rel_tol` times the first pivot norm are treated as
    /// numerically dependent and dropped.
    pub(crate) fn new(rows: &[f64], n: usize, rel_tol: f64) -> Self {
        assert!(n > 0 && rows.len().is_multiple_of(n));
        let m = rows.len() / n;
        let mut cols: Vec<Vec<f64>> = rows.chunks(n).map(|c| c.to_vec()).collect();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut reflectors = Vec::new();
        let mut first_norm = 0.0;
        let steps = m.min(n);

        for k in 0..steps {
            let (mut best, mut best_sq) = (k, -1.0);
            for (j, col) in cols.iter().enumerate().skip(k) {
                let sq: f64 = col[k..].iter().map(|x| x * x).sum();
                if sq > best_sq {
                    best = j;
                    best_sq = sq;
                }
            }
            let norm = best_sq.sqrt();
            if k == 0 {
                first_norm = norm;
            }
            if norm == 0.0 || norm <= rel_tol * first_norm {
                break;
            }
            cols.swap(k, best);
            perm.swap(k, best);

            let x = &cols[k][k..];
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };

            cols[k][k] = alpha;
            cols[k][k + 1..].iter_mut().for_each(|x| *x = 0.0);
            for col in cols.iter_mut().skip(k + 1) {
                let seg = &mut col[k..];
                let w = beta * dot(&v, seg);
                if w != 0.0 {
                    seg.iter_mut().zip(&v).for_each(|(s, vi)| *s -= w * vi);
                }
            }
            reflectors.push((v, beta));
        }

        let rank = reflectors.len();
        let mut r11 = vec![0.0; rank * rank];
        for j in 0..rank {
            for i in 0..=j {
                r11[i * rank + j] = cols[j][i];
            }
        }
        RowSpaceQr { n, rank, reflectors, perm, r11 }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// `z ← Q z`.
    pub(crate) fn apply_q(&self, z: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            reflect(&mut z[k..], v, *beta);
        }
    }

    /// Columns `j ∈ range` of `Q`, each of length `n`.
    pub(crate) fn q_columns(&self, range: std::ops::Range<usize>) -> Vec<Vec<f64>> {
        range
            .map(|j| {
                let mut e = vec![0.0; self.n];
                e[j] = 1.0;
                self.apply_q(&mut e);
                e
            })
            .collect()
    }

    /// Coordinates `c` in the row-space basis of the point satisfying the
    /// independent rows: solves `R11ᵀ c = y[perm[..rank]]`.
    pub(crate) fn row_space_coords(&self, y: &[f64]) -> Vec<f64> {
        let r = self.rank;
        let mut c = vec![0.0; r];
        for i in 0..r {
            let mut s = y[self.perm[i]];
            for (k, ck) in c.iter().enumerate().take(i) {
                s -= self.r11[k * r + i] * ck;
            }
            c[i] = s / self.r11[i * r + i];
        }
        c
    }
}

fn reflect(seg: &mut [f64], v: &[f64], beta: f64) {
    let w = beta * dot(v, seg);
    if w != 0.0 {
        seg.iter_mut().zip(v).for_each(|(s, vi)| *s -= w * vi);
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
