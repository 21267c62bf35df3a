#![allow(dead_code)]

use soav::measurement::gaussian_matrix;
use soav::rng::SeededRng;
use soav::{Alphabet, Preset, RealMatrix};

/// `Σ p_i |t − r_i|` straight from the definition.
pub fn direct_l(alphabet: &Alphabet, t: f64) -> f64 {
    alphabet.symbols().iter().zip(alphabet.probs()).map(|(r, p)| p * (t - r).abs()).sum()
}

pub fn direct_f(alphabet: &Alphabet, z: &[f64]) -> f64 {
    z.iter().map(|&t| direct_l(alphabet, t)).sum()
}

/// Golden-section minimizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iters {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Random alphabet with `1..=max_len` symbols in `[-5, 5]`, gaps at least 0.05.
pub fn random_alphabet(rng: &mut SeededRng, max_len: usize) -> Alphabet {
    let len = 1 + rng.below(max_len);
    let mut symbols: Vec<f64> = Vec::new();
    while symbols.len() < len {
        let s = -5.0 + 10.0 * rng.uniform();
        if symbols.iter().all(|r| (r - s).abs() >= 0.05) {
            symbols.push(s);
        }
    }
    let weights: Vec<f64> = (0..len).map(|_| 0.05 + rng.uniform()).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    Alphabet::new(&symbols, &probs).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormalizes `vectors` by modified Gram–Schmidt.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let c = dot(q, &w);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
        }
        let n = norm(&w);
        w.iter_mut().for_each(|wi| *wi /= n);
        out.push(w);
    }
    out
}

/// A full-row-rank `(N − d) × N` matrix whose kernel is spanned by the
/// returned orthonormal vectors.
pub fn matrix_with_kernel(n: usize, d: usize, seed: u64) -> (RealMatrix, Vec<Vec<f64>>) {
    let mut rng = SeededRng::new(seed);
    let raw: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.normal()).collect()).collect();
    let q = gram_schmidt(&raw);
    let (kernel, range) = q.split_at(d);
    // Rows are random combinations of the range basis.
    let rows: Vec<Vec<f64>> = (0..n - d)
        .map(|_| {
            let mut row = vec![0.0; n];
            for b in range {
                let c = rng.normal();
                row.iter_mut().zip(b).for_each(|(r, bi)| *r += c * bi);
            }
            row
        })
        .collect();
    (RealMatrix::from_rows(&rows).unwrap(), kernel.to_vec())
}

/// Draws `x` i.i.d. from `probs` over `symbols`.
pub fn draw_signal(symbols: &[f64], probs: &[f64], n: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..n).map(|_| symbols[rng.categorical(probs)]).collect()
}

/// Seeded Gaussian instance `(Φ, x, y = Φx)` for a preset at parameter `p`.
pub fn preset_instance(preset: Preset, p: f64, m: usize, n: usize, seed: u64) -> (RealMatrix, Vec<f64>, Vec<f64>) {
    let phi = gaussian_matrix(m, n, seed).unwrap();
    let mut rng = SeededRng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let x = draw_signal(&preset.symbols(), &preset.sampling_probs(p), n, &mut rng);
    let y = phi.matvec(&x).unwrap();
    (phi, x, y)
}
