//! Instance builders shared by the criterion benchmarks in `benches/`.

use soav::measurement::gaussian_matrix;
use soav::rng::SeededRng;
use soav::{Alphabet, Preset, RealMatrix};

/// A seeded Gaussian `M × N` system with `x` drawn from preset `preset` at `p`.
pub struct Instance {
    pub alphabet: Alphabet,
    pub phi: RealMatrix,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn gaussian_instance(preset: Preset, p: f64, m: usize, n: usize, seed: u64) -> Instance {
    let phi = gaussian_matrix(m, n, seed).expect("positive dimensions");
    let mut rng = SeededRng::new(seed ^ 0x5eed);
    let symbols = preset.symbols();
    let probs = preset.sampling_probs(p);
    let x: Vec<f64> = (0..n).map(|_| symbols[rng.categorical(&probs)]).collect();
    let y = phi.matvec(&x).expect("matching dimensions");
    Instance { alphabet: preset.objective_alphabet(p).expect("valid preset"), phi, x, y }
}
