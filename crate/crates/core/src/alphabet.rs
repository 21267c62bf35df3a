//! Finite alphabets and the sum-of-weighted-absolute-values objective
//! `L(t) = Σ_i p_i |t − r_i|`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance on `Σ p_i = 1` accepted from user input.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Smallest probability kept in an objective built from a sampling
/// distribution that contains zero-probability symbols.
pub const MIN_OBJECTIVE_PROB: f64 = 1e-6;

/// A finite set of real symbols `r_1 < ... < r_L` with strictly positive
/// probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    symbols: Vec<f64>,
    probs: Vec<f64>,
}

impl Alphabet {
    /// Validates and sorts the symbols, permuting `probs` in lockstep.
    ///
    /// Probabilities must be positive and sum to one within
    /// [`PROB_SUM_TOL`]; they are renormalized afterwards.
    pub fn new(symbols: &[f64], probs: &[f64]) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must contain at least one symbol".into()));
        }
        if symbols.len() != probs.len() {
            return Err(Error::InvalidAlphabet(format!("{} symbols but {} probabilities", symbols.len(), probs.len())));
        }
        if let Some(s) = symbols.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidAlphabet(format!("non-finite symbol {s}")));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidAlphabet(format!("non-positive probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidAlphabet(format!("probabilities sum to {total}, expected 1")));
        }

        let mut pairs: Vec<(f64, f64)> = symbols.iter().copied().zip(probs.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidAlphabet(format!("duplicate symbol {}", w[0].0)));
        }
        Ok(Alphabet { symbols: pairs.iter().map(|p| p.0).collect(), probs: pairs.iter().map(|p| p.1 / total).collect() })
    }

    /// The single-symbol alphabet `{0}`; its objective is `‖z‖₁`.
    pub fn zero() -> Self {
        Alphabet { symbols: vec![0.0], probs: vec![1.0] }
    }

    /// Builds an objective alphabet from a sampling distribution that may
    /// contain zero probabilities: each probability is clamped to at least
    /// [`MIN_OBJECTIVE_PROB`] and the result renormalized.
    pub fn from_sampling(symbols: &[f64], probs: &[f64]) -> Result<Self> {
        let clamped: Vec<f64> = probs.iter().map(|p| p.max(MIN_OBJECTIVE_PROB)).collect();
        let total: f64 = clamped.iter().sum();
        let normalized: Vec<f64> = clamped.iter().map(|p| p / total).collect();
        Alphabet::new(symbols, &normalized)
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of symbols `L`.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `r̄ = Σ p_i r_i`.
    pub fn mean(&self) -> f64 {
        self.symbols.iter().zip(&self.probs).map(|(r, p)| r * p).sum()
    }

    pub fn contains(&self, value: f64) -> bool {
        self.symbols.contains(&value)
    }

    pub fn objective(&self) -> PiecewiseLinearObjective {
        PiecewiseLinearObjective::new(self)
    }

    /// Nearest symbol to `t`. Ties go to the smaller symbol; values outside
    /// `[r_1, r_L]` clamp to the extreme symbols.
    pub fn nearest(&self, t: f64) -> f64 {
        let s = &self.symbols;
        let upper = s.partition_point(|&r| r < t);
        if upper == 0 {
            return s[0];
        }
        if upper == s.len() {
            return s[s.len() - 1];
        }
        let (lo, hi) = (s[upper - 1], s[upper]);
        if t - lo <= hi - t {
            lo
        } else {
            hi
        }
    }

    /// Rounds every entry of `z` to its nearest symbol.
    pub fn round(&self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|&t| self.nearest(t)).collect()
    }

    /// Sorted, deduplicated set of pairwise differences `r_i − r_j`.
    /// Always contains 0 and is exactly symmetric about it.
    pub fn difference_set(&self) -> Vec<f64> {
        let mut positive: Vec<f64> = Vec::new();
        for (i, &ri) in self.symbols.iter().enumerate() {
            for &rj in &self.symbols[..i] {
                positive.push(ri - rj);
            }
        }
        positive.sort_by(f64::total_cmp);
        let scale = positive.last().copied().unwrap_or(0.0).max(1.0);
        positive.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);

        let mut out: Vec<f64> = positive.iter().rev().map(|d| -d).collect();
        out.push(0.0);
        out.extend_from_slice(&positive);
        out
    }
}

impl FromStr for Alphabet {
    type Err = Error;

    /// Parses comma-separated `symbol:prob` pairs, e.g. `-1:0.25,0:0.5,1:0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let mut symbols = Vec::new();
        let mut probs = Vec::new();
        for item in s.split(',') {
            let item = item.trim();
            let (sym, prob) =
                item.split_once(':').ok_or_else(|| Error::Parse(format!("expected `symbol:prob`, got `{item}`")))?;
            symbols.push(parse_f64(sym)?);
            probs.push(parse_f64(prob)?);
        }
        Alphabet::new(&symbols, &probs)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (r, p)) in self.symbols.iter().zip(&self.probs).enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}:{p}")?;
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("invalid number `{}`", s.trim())))
}

/// The alphabets used in the Gaussian sweep, parameterized by the
/// probability `p` of the zero symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `{0, 1}` with `P(0) = p`, `P(1) = 1 − p`.
    X2,
    /// `{−1, 0, 1}` with `P(0) = p`, `P(±1) = (1 − p)/2`.
    X3,
    /// `{−2, −1, 0, 1, 2}` with `P(0) = p` and `(1 − p)/4` elsewhere.
    X5,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::X2 => "x2",
            Preset::X3 => "x3",
            Preset::X5 => "x5",
        }
    }

    pub fn symbols(&self) -> Vec<f64> {
        match self {
            Preset::X2 => vec![0.0, 1.0],
            Preset::X3 => vec![-1.0, 0.0, 1.0],
            Preset::X5 => vec![-2.0, -1.0, 0.0, 1.0, 2.0],
        }
    }

    /// Sampling probabilities aligned with [`Preset::symbols`]; entries may be zero.
    pub fn sampling_probs(&self, p: f64) -> Vec<f64> {
        match self {
            Preset::X2 => vec![p, 1.0 - p],
            Preset::X3 => {
                let q = (1.0 - p) / 2.0;
                vec![q, p, q]
            }
            Preset::X5 => {
                let q = (1.0 - p) / 4.0;
                vec![q, q, p, q, q]
            }
        }
    }

    /// Objective alphabet for parameter `p`, clamped at the grid endpoints.
    pub fn objective_alphabet(&self, p: f64) -> Result<Alphabet> {
        Alphabet::from_sampling(&self.symbols(), &self.sampling_probs(p))
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x2" => Ok(Preset::X2),
            "x3" => Ok(Preset::X3),
            "x5" => Ok(Preset::X5),
            other => Err(Error::Parse(format!("unknown alphabet preset `{other}`"))),
        }
    }
}

/// `L(t) = max_{i=0..L} (a_i t + b_i)`, with breakpoints at the symbols.
///
/// Piece `i` is active on `(r_i, r_{i+1}]` (1-based symbols, with
/// `r_0 = −∞` and `r_{L+1} = +∞`).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearObjective {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
    mean: f64,
}

impl PiecewiseLinearObjective {
    pub fn new(alphabet: &Alphabet) -> Self {
        let r = alphabet.symbols();
        let p = alphabet.probs();
        let l = r.len();
        let mean = alphabet.mean();

        let mut slopes = Vec::with_capacity(l + 1);
        let mut intercepts = Vec::with_capacity(l + 1);
        slopes.push(-1.0);
        intercepts.push(mean);
        for i in 1..l {
            let (head_p, tail_p) = (&p[..i], &p[i..]);
            let a: f64 = head_p.iter().sum::<f64>() - tail_p.iter().sum::<f64>();
            let b: f64 = -head_p.iter().zip(&r[..i]).map(|(p, r)| p * r).sum::<f64>()
                + tail_p.iter().zip(&r[i..]).map(|(p, r)| p * r).sum::<f64>();
            slopes.push(a);
            intercepts.push(b);
        }
        slopes.push(1.0);
        intercepts.push(-mean);

        PiecewiseLinearObjective { breakpoints: r.to_vec(), slopes, intercepts, mean }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `a_0 … a_L`.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// `b_0 … b_L`.
    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Number of linear pieces, `L + 1`.
    pub fn num_pieces(&self) -> usize {
        self.slopes.len()
    }

    /// Index of the piece whose half-open interval `(r_i, r_{i+1}]` holds `t`.
    pub fn segment(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&r| r < t)
    }

    /// `L(t)` through the max over all pieces.
    pub fn eval(&self, t: f64) -> f64 {
        self.slopes.iter().zip(&self.intercepts).map(|(a, b)| a * t + b).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `L(t)` through the active piece only.
    pub fn eval_segment(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.slopes[i] * t + self.intercepts[i]
    }

    /// `F(z) = Σ_n L(z_n)`.
    pub fn eval_sum(&self, z: &[f64]) -> f64 {
        z.iter().map(|&t| self.eval(t)).sum()
    }

    /// Convex conjugate `L*(s) = max_k (s r_k − L(r_k))` on `[−1, 1]`,
    /// `+∞` outside.
    pub fn conjugate(&self, s: f64) -> f64 {
        if !(-1.0..=1.0).contains(&s) {
            return f64::INFINITY;
        }
        self.breakpoints.iter().map(|&r| s * r - self.eval(r)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimizer of `λ L(t) + ½ (t − v)²`.
    ///
    /// Around symbol `r_i` the prox is flat on `[r_i + λ a_{i−1}, r_i + λ a_i]`;
    /// between those windows it is the shift `v − λ a_i` of the active piece.
    pub fn prox(&self, lambda: f64, v: f64) -> Result<f64> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("prox step must be positive, got {lambda}")));
        }
        Ok(self.prox_unchecked(lambda, v))
    }

    /// [`prox`](Self::prox) without validating `lambda`.
    #[inline]
    pub fn prox_unchecked(&self, lambda: f64, v: f64) -> f64 {
        for (i, &r) in self.breakpoints.iter().enumerate() {
            let lo = r + lambda * self.slopes[i];
            if v < lo {
                return v - lambda * self.slopes[i];
            }
            if v <= r + lambda * self.slopes[i + 1] {
                return r;
            }
        }
        v - lambda * self.slopes[self.slopes.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn binary() -> Alphabet {
        Alphabet::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap()
    }

    fn ternary() -> Alphabet {
        Alphabet::new(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25]).unwrap()
    }

    #[test]
    fn constructs_valid_alphabets() {
        let a = binary();
        assert_eq!(a.symbols(), &[0.0, 1.0]);
        let single = Alphabet::new(&[0.0], &[1.0]).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn sorts_symbols_with_probabilities() {
        let a = Alphabet::new(&[1.0, -1.0, 0.0], &[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(a.symbols(), &[-1.0, 0.0, 1.0]);
        assert_eq!(a.probs(), &[0.3, 0.5, 0.2]);
    }

    #[test]
    fn rejects_bad_alphabets() {
        let err = Alphabet::new(&[0.0, 1.0], &[0.5, 0.6]).unwrap_err();
        assert!(err.to_string().contains("1.1"), "{err}");
        assert!(Alphabet::new(&[0.0, 0.0], &[0.5, 0.5]).is_err());
        assert!(Alphabet::new(&[0.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(Alphabet::new(&[0.0, 1.0], &[-0.5, 1.5]).is_err());
        assert!(Alphabet::new(&[], &[]).is_err());
        assert!(Alphabet::new(&[0.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let a = Alphabet::new(&[0.0, 1.0], &[0.5 + 4e-10, 0.5]).unwrap();
        assert_eq!(a.probs().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn mean_values() {
        assert_eq!(ternary().mean(), 0.0);
        let a = Alphabet::new(&[0.0, 1.0], &[0.6, 0.4]).unwrap();
        assert_abs_diff_eq!(a.mean(), 0.4, epsilon = 1e-15);
        assert_eq!(Alphabet::zero().mean(), 0.0);
    }

    #[test]
    fn objective_coefficients() {
        let obj = ternary().objective();
        assert_eq!(obj.slopes(), &[-1.0, -0.5, 0.5, 1.0]);
        assert_eq!(obj.intercepts(), &[0.0, 0.5, 0.5, 0.0]);

        let obj = binary().objective();
        assert_eq!(obj.slopes(), &[-1.0, 0.0, 1.0]);
        assert_eq!(obj.intercepts(), &[0.5, 0.5, -0.5]);

        let obj = Alphabet::zero().objective();
        assert_eq!(obj.slopes(), &[-1.0, 1.0]);
        assert_eq!(obj.intercepts(), &[0.0, 0.0]);
    }

    #[test]
    fn evaluates_l_and_f() {
        let obj = binary().objective();
        assert_abs_diff_eq!(obj.eval(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(obj.eval(-2.0), 2.5, epsilon = 1e-15);
        assert_eq!(Alphabet::zero().objective().eval(3.0), 3.0);

        assert_abs_diff_eq!(obj.eval_sum(&[0.0, 1.0, 1.0]), 1.5, epsilon = 1e-15);
        let x = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        assert_abs_diff_eq!(obj.eval_sum(&x), 0.5 * x.len() as f64, epsilon = 1e-14);
        assert_eq!(Alphabet::zero().objective().eval_sum(&[0.0; 4]), 0.0);
    }

    #[test]
    fn segment_lookup_is_half_open() {
        let obj = ternary().objective();
        assert_eq!(obj.segment(-1.0), 0);
        assert_eq!(obj.segment(-0.5), 1);
        assert_eq!(obj.segment(0.0), 1);
        assert_eq!(obj.segment(1e-9), 2);
        assert_eq!(obj.segment(2.0), 3);
    }

    #[test]
    fn prox_examples() {
        let bp = Alphabet::zero().objective();
        assert_eq!(bp.prox(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(bp.prox(1.0, 0.5).unwrap(), 0.0);
        assert_eq!(bp.prox(1.0, -3.0).unwrap(), -2.0);

        let obj = binary().objective();
        assert_eq!(obj.prox(0.5, 1.2).unwrap(), 1.0);
        assert_abs_diff_eq!(obj.prox(0.5, 0.7).unwrap(), 0.7, epsilon = 1e-15);
        assert!(obj.prox(0.0, 1.0).is_err());
        assert!(obj.prox(-1.0, 1.0).is_err());
    }

    #[test]
    fn rounding() {
        let a = ternary();
        assert_eq!(a.round(&[0.4, 0.5, 3.7, -0.5, -9.0]), vec![0.0, 0.0, 1.0, -1.0, -1.0]);
        let x = vec![1.0, -1.0, 0.0, 0.0];
        assert_eq!(a.round(&a.round(&x)), x);
    }

    #[test]
    fn difference_sets() {
        assert_eq!(binary().difference_set(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(ternary().difference_set(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(Alphabet::new(&[5.0], &[1.0]).unwrap().difference_set(), vec![0.0]);
    }

    #[test]
    fn parses_text_syntax() {
        let a: Alphabet = "-1:0.25,0:0.5,1:0.25".parse().unwrap();
        assert_eq!(a, ternary());
        let a: Alphabet = " 0 : 1 ".parse().unwrap();
        assert_eq!(a, Alphabet::zero());
        assert!("0:0.5;1:0.5".parse::<Alphabet>().is_err());
        assert!("0,1".parse::<Alphabet>().is_err());
        assert!("0:0,5".parse::<Alphabet>().is_err());
        let round: Alphabet = ternary().to_string().parse().unwrap();
        assert_eq!(round, ternary());
    }

    #[test]
    fn presets() {
        assert_eq!(Preset::X3.sampling_probs(0.5), vec![0.25, 0.5, 0.25]);
        let a = Preset::X2.objective_alphabet(1.0).unwrap();
        assert!(a.probs().iter().all(|&p| p > 0.0));
        assert_abs_diff_eq!(a.probs()[1], 1e-6 / (1.0 + 1e-6), epsilon = 1e-18);
        assert_eq!("X5".parse::<Preset>().unwrap(), Preset::X5);
        assert!("x4".parse::<Preset>().is_err());
    }
}
