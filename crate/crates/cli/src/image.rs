//! `soav image`: binary image recovery from subsampled 2-D DFT coefficients.
//!
//! The noisy image `X` (`R × C`) is transformed to `X̂ = W_R X W_C`, so that
//! `vec X̂ = (W_C ⊗ W_R) vec X` with column-major `vec`. A seeded subset of
//! `keep` rows of the Kronecker product is materialized, the complex system
//! is realified and solved as an exact equality constraint, even though the
//! measurements are noisy.

use std::path::PathBuf;

use clap::Args;
use soav::analysis::nsr;
use soav::io::{format_binary_grid, format_index_list, format_pgm, parse_binary_grid};
use soav::measurement::{dft_matrix, kron_select_rows, realify, sample_indices};
use soav::rng::{derive_seed, SeededRng};
use soav::solvers::{Method, SolveResult};
use soav::{Alphabet, Complex64, RealMatrix, SolverOptions};

use crate::reconstruct::{soav_and_bp, status_label, usable};
use crate::{create_dir, read_file, write_file, CliError, CliResult};

#[derive(Debug, Clone)]
pub struct ImageConfig {
    pub image: RealMatrix,
    pub sigma: f64,
    /// Defaults to half the pixel count, rounded up.
    pub keep: Option<usize>,
    pub seed: u64,
    pub solver: Method,
    pub options: SolverOptions,
}

/// Reconstruction by one method.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub status: String,
    /// Estimate reshaped to the image; `None` when the solve failed.
    pub estimate: Option<RealMatrix>,
    /// Pixels differing from the clean image after rounding to `{0, 1}`.
    pub pixel_errors: Option<usize>,
    /// NSR of the unrounded estimate against the clean image.
    pub nsr: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct ImageReport {
    pub keep: usize,
    /// Retained rows of `W_C ⊗ W_R`, ascending.
    pub indices: Vec<usize>,
    pub noisy: RealMatrix,
    pub soav: MethodOutcome,
    pub bp: MethodOutcome,
}

fn binary_alphabet() -> Alphabet {
    Alphabet::new(&[0.0, 1.0], &[0.5, 0.5]).expect("valid alphabet")
}

fn outcome(clean: &RealMatrix, res: &soav::Result<SolveResult>) -> CliResult<MethodOutcome> {
    let iterations = res.as_ref().map_or(0, |r| r.iterations);
    let Some(r) = usable(res) else {
        return Ok(MethodOutcome { status: status_label(res), estimate: None, pixel_errors: None, nsr: None, iterations });
    };
    let estimate = RealMatrix::unvec(&r.z, clean.rows(), clean.cols())?;
    let truth = clean.vec();
    let rounded = binary_alphabet().round(&r.z);
    let errors = rounded.iter().zip(&truth).filter(|(a, b)| a != b).count();
    Ok(MethodOutcome {
        status: status_label(res),
        estimate: Some(estimate),
        pixel_errors: Some(errors),
        nsr: nsr(&truth, &r.z).ok(),
        iterations,
    })
}

pub fn run_image(cfg: &ImageConfig) -> CliResult<ImageReport> {
    let (rows, cols) = (cfg.image.rows(), cfg.image.cols());
    let total = rows * cols;
    if !cfg.sigma.is_finite() || cfg.sigma < 0.0 {
        return Err(CliError::input(format!("noise sigma must be finite and non-negative, got {}", cfg.sigma)));
    }
    let keep = cfg.keep.unwrap_or(total.div_ceil(2));
    if keep == 0 || keep > total {
        return Err(CliError::input(format!("keep must lie in 1..={total}, got {keep}")));
    }

    let mut noise = SeededRng::new(derive_seed(cfg.seed, &[0]));
    let noisy = RealMatrix::new(rows, cols, cfg.image.data().iter().map(|v| v + cfg.sigma * noise.normal()).collect())?;

    let idx = sample_indices(total, keep, derive_seed(cfg.seed, &[1]))?;
    let phi_c = kron_select_rows(&dft_matrix(cols)?, &dft_matrix(rows)?, &idx)?;
    let x_c: Vec<Complex64> = noisy.vec().into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let y_c = phi_c.matvec(&x_c)?;
    let (phi, y) = realify(&phi_c, &y_c)?;

    let (soav_res, bp_res) = soav_and_bp(&binary_alphabet(), &phi, &y, cfg.solver, &cfg.options);
    Ok(ImageReport { keep, indices: idx, soav: outcome(&cfg.image, &soav_res)?, bp: outcome(&cfg.image, &bp_res)?, noisy })
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    /// Binary grid: rows of space-separated 0/1.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub noise_sigma: f64,
    /// Number of DFT coefficients kept; half the pixels, rounded up, by default.
    #[arg(long)]
    pub keep: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "admm")]
    pub solver: Method,
    /// Directory receiving `noisy.pgm`, `indices.txt` and per-method `.pgm` / `.txt` outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn describe(name: &str, o: &MethodOutcome) -> String {
    match (o.pixel_errors, o.nsr) {
        (Some(e), nsr) => format!(
            "{name}: status {} pixel_errors {e} nsr {} iterations {}",
            o.status,
            nsr.map_or("nan".into(), |v| format!("{v:.6e}")),
            o.iterations
        ),
        (None, _) => format!("{name}: status {}", o.status),
    }
}

pub fn cmd_image(args: &ImageArgs) -> CliResult<()> {
    let image = parse_binary_grid(&read_file(&args.input)?)?;
    let cfg = ImageConfig {
        image,
        sigma: args.noise_sigma,
        keep: args.keep,
        seed: args.seed,
        solver: args.solver,
        options: SolverOptions::default(),
    };
    let report = run_image(&cfg)?;
    println!("measurements: {} of {}", report.keep, cfg.image.rows() * cfg.image.cols());
    println!("{}", describe("soav", &report.soav));
    println!("{}", describe("bp_round", &report.bp));
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(&dir.join("noisy.pgm"), &format_pgm(&report.noisy))?;
        write_file(&dir.join("indices.txt"), &format_index_list(&report.indices))?;
        for (name, o) in [("soav", &report.soav), ("bp_round", &report.bp)] {
            if let Some(est) = &o.estimate {
                write_file(&dir.join(format!("{name}.pgm")), &format_pgm(est))?;
                write_file(&dir.join(format!("{name}.txt")), &format_binary_grid(est))?;
            }
        }
    }
    if report.soav.estimate.is_none() || report.bp.estimate.is_none() {
        return Err(CliError::solver("a reconstruction failed"));
    }
    Ok(())
}
