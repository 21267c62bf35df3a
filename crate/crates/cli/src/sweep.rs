//! `soav sweep`: averaged-NSR experiment over a probability grid.
//!
//! Each `(p, trial)` pair draws a Gaussian `Φ` and a signal `x` from a seed
//! derived from the master seed, `p` and the trial number, so adding or
//! removing grid points leaves the other trials unchanged. Rows are emitted
//! in `(p, trial, method)` order whatever the thread count.

use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use soav::analysis::{exact_recovery, nsr};
use soav::measurement::gaussian_matrix;
use soav::rng::{derive_seed, SeededRng};
use soav::solvers::{Method, SolveResult};
use soav::{Alphabet, Preset, SolverOptions};

use crate::reconstruct::{soav_and_bp, usable};
use crate::{emit, with_threads, CliError, CliResult};

/// `start:step:end`, inclusive of `end` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct PGrid(pub Vec<f64>);

/// Grid values are rounded to this many decimals so `0.1 + 0.05·k` prints cleanly.
const GRID_DECIMALS: i32 = 12;

impl FromStr for PGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("invalid grid value `{t}`")))
            .collect::<Result<_, _>>()?;
        let [start, step, end] = parts[..] else {
            return Err("grid must be start:step:end".into());
        };
        if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || start > end {
            return Err(format!("grid endpoints must satisfy 0 <= start <= end <= 1, got {start}:{end}"));
        }
        if start == end {
            return Ok(PGrid(vec![start]));
        }
        if step.is_nan() || step <= 0.0 {
            return Err("grid step must be positive".into());
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        let scale = 10f64.powi(GRID_DECIMALS);
        Ok(PGrid((0..count).map(|i| ((start + i as f64 * step) * scale).round() / scale).map(|p| p.min(1.0)).collect()))
    }
}

/// The signal distribution and objective alphabet of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphabetSource {
    /// Preset family indexed by the grid value `p`.
    Preset(Preset),
    /// A fixed alphabet; the grid is ignored and `p` is recorded as NaN.
    Literal(Alphabet),
}

impl AlphabetSource {
    pub fn name(&self) -> String {
        match self {
            AlphabetSource::Preset(p) => p.name().to_string(),
            AlphabetSource::Literal(a) => a.to_string(),
        }
    }

    fn grid(&self, grid: &[f64]) -> Vec<f64> {
        match self {
            AlphabetSource::Preset(_) => grid.to_vec(),
            AlphabetSource::Literal(_) => vec![f64::NAN],
        }
    }

    /// `(symbols, sampling probabilities, objective alphabet)` at `p`.
    fn at(&self, p: f64) -> soav::Result<(Vec<f64>, Vec<f64>, Alphabet)> {
        match self {
            AlphabetSource::Preset(preset) => Ok((preset.symbols(), preset.sampling_probs(p), preset.objective_alphabet(p)?)),
            AlphabetSource::Literal(a) => Ok((a.symbols().to_vec(), a.probs().to_vec(), a.clone())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub alphabet: AlphabetSource,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub grid: Vec<f64>,
    pub solver: Method,
    pub seed: u64,
    pub record_runtime: bool,
    pub options: SolverOptions,
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.n == 0 || self.m == 0 || self.m > self.n {
            return Err(CliError::input(format!("need 1 <= M <= N, got M = {}, N = {}", self.m, self.n)));
        }
        if self.trials == 0 {
            return Err(CliError::input("trials must be at least 1"));
        }
        if self.grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CliError::input("grid values must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One CSV row. `nsr` is measured on the raw SOAV estimate and on the
/// rounded basis-pursuit estimate; it is NaN when the solve failed or the
/// drawn signal is zero (where the ratio is undefined).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub alphabet: String,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
    pub method: &'static str,
    pub nsr: f64,
    pub exact_recovery: bool,
    pub objective: f64,
    pub iterations: usize,
    /// Wall-clock time; left empty unless requested, so output stays reproducible.
    pub runtime_ms: Option<f64>,
}

pub const METHOD_SOAV: &str = "soav";
pub const METHOD_BP: &str = "bp_round";

/// Seed of trial `trial` at grid value `p`; keyed by `p` in millionths.
pub fn trial_seed(master: u64, p: f64, trial: usize) -> u64 {
    let key = if p.is_nan() { u64::MAX } else { (p * 1e6).round() as u64 };
    derive_seed(master, &[key, trial as u64])
}

/// `(Φ, x)` for one trial: `Φ` from `seed`, `x` from a derived sub-stream.
pub fn draw_instance(
    n: usize,
    m: usize,
    symbols: &[f64],
    probs: &[f64],
    seed: u64,
) -> soav::Result<(soav::RealMatrix, Vec<f64>)> {
    let phi = gaussian_matrix(m, n, seed)?;
    let mut rng = SeededRng::new(derive_seed(seed, &[0]));
    let x = (0..n).map(|_| symbols[rng.categorical(probs)]).collect();
    Ok((phi, x))
}

#[allow(clippy::too_many_arguments)]
fn record(
    cfg: &SweepConfig,
    p: f64,
    trial: usize,
    seed: u64,
    method: &'static str,
    x: &[f64],
    alphabet: &Alphabet,
    res: &soav::Result<SolveResult>,
) -> SweepRecord {
    let mut rec = SweepRecord {
        alphabet: cfg.alphabet.name(),
        p,
        trial,
        seed,
        method,
        nsr: f64::NAN,
        exact_recovery: false,
        objective: f64::NAN,
        iterations: res.as_ref().map_or(0, |r| r.iterations),
        runtime_ms: cfg.record_runtime.then(|| res.as_ref().map_or(f64::NAN, |r| r.wall_time.as_secs_f64() * 1e3)),
    };
    if let Some(r) = usable(res) {
        let estimate = if method == METHOD_BP { alphabet.round(&r.z) } else { r.z.clone() };
        rec.nsr = nsr(x, &estimate).unwrap_or(f64::NAN);
        rec.exact_recovery = exact_recovery(x, &r.z, alphabet).unwrap_or(false);
        rec.objective = r.objective;
    }
    rec
}

fn run_trial(cfg: &SweepConfig, p: f64, trial: usize) -> CliResult<[SweepRecord; 2]> {
    let seed = trial_seed(cfg.seed, p, trial);
    let (symbols, probs, objective_alphabet) = cfg.alphabet.at(p)?;
    let (phi, x) = draw_instance(cfg.n, cfg.m, &symbols, &probs, seed)?;
    let y = phi.matvec(&x)?;
    let (soav_res, bp_res) = soav_and_bp(&objective_alphabet, &phi, &y, cfg.solver, &cfg.options);
    // Both estimates are judged against the signal alphabet.
    let rounding = Alphabet::new(&symbols, &vec![1.0 / symbols.len() as f64; symbols.len()])?;
    Ok([
        record(cfg, p, trial, seed, METHOD_SOAV, &x, &rounding, &soav_res),
        record(cfg, p, trial, seed, METHOD_BP, &x, &rounding, &bp_res),
    ])
}

/// All records in `(p, trial, method)` order. Runs on the current rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> CliResult<Vec<SweepRecord>> {
    cfg.validate()?;
    let jobs: Vec<(f64, usize)> =
        cfg.alphabet.grid(&cfg.grid).into_iter().flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let rows: Vec<[SweepRecord; 2]> = jobs.par_iter().map(|&(p, t)| run_trial(cfg, p, t)).collect::<CliResult<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn to_csv(records: &[SweepRecord]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| CliError::input(format!("cannot encode CSV: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::input(format!("cannot encode CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::input(e.to_string()))
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_name = "x2|x3|x5", conflicts_with = "alphabet")]
    pub alphabet_preset: Option<Preset>,
    /// Fixed alphabet as `symbol:prob` pairs; the grid is then ignored.
    #[arg(long)]
    pub alphabet: Option<Alphabet>,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value = "0:0.05:1")]
    pub p_grid: PGrid,
    #[arg(long, default_value = "admm")]
    pub solver: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fill the `runtime_ms` column (makes the output run-dependent).
    #[arg(long)]
    pub record_runtime: bool,
}

impl SweepArgs {
    pub fn config(&self) -> SweepConfig {
        let alphabet = match &self.alphabet {
            Some(a) => AlphabetSource::Literal(a.clone()),
            None => AlphabetSource::Preset(self.alphabet_preset.unwrap_or(Preset::X3)),
        };
        SweepConfig {
            alphabet,
            n: self.n,
            m: self.m,
            trials: self.trials,
            grid: self.p_grid.0.clone(),
            solver: self.solver,
            seed: self.seed,
            record_runtime: self.record_runtime,
            options: SolverOptions::default(),
        }
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let cfg = args.config();
    let records = with_threads(args.threads, || run_sweep(&cfg))??;
    emit(args.out.as_ref(), &to_csv(&records)?)
}
