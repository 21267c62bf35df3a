mod common;

use common::{direct_f, gram_schmidt};
use soav::analysis::{check_uniqueness, exact_recovery, kernel_defect, nsp_falsify, nsr, UNIQUENESS_TOL};
use soav::measurement::gaussian_matrix;
use soav::rng::SeededRng;
use soav::solvers::{soav_lp_solve, SolveStatus};
use soav::{Alphabet, RealMatrix, SolverOptions};

fn binary() -> Alphabet {
    Alphabet::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap()
}

/// Every `x ∈ 𝒳^N` in odometer order.
fn all_signals(symbols: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|x: Vec<f64>| symbols.iter().map(move |&s| [x.clone(), vec![s]].concat())).collect();
    }
    out
}

#[test]
fn all_ones_row_fixture() {
    let a = binary();
    let phi = RealMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
    assert!(!check_uniqueness(&a, &phi, UNIQUENESS_TOL).unwrap());
    let ce = nsp_falsify(&a, &phi, 16, 0).unwrap().expect("counterexample");
    assert_eq!(ce.v, vec![1.0, -1.0]);
    assert_eq!(ce.x, vec![1.0, 0.0]);
    let obj = a.objective();
    assert_eq!(obj.eval_sum(&ce.x), 1.0);
    assert_eq!(obj.eval_sum(&[0.0, 1.0]), 1.0);

    let phi = RealMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
    assert!(check_uniqueness(&a, &phi, UNIQUENESS_TOL).unwrap());
}

/// A counterexample `(v, x)` means `x` is not the unique optimizer: `x − v`
/// is feasible for `y = Φx` and no worse, and the LP optimum is at most `F(x)`.
#[test]
fn counterexamples_are_confirmed_by_the_simplex() {
    let alphabets = [binary(), Alphabet::new(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25]).unwrap()];
    let mut found = 0;
    for seed in 0..12 {
        let a = &alphabets[seed as usize % 2];
        let obj = a.objective();
        let phi = gaussian_matrix(2, 5, seed).unwrap();
        let Some(ce) = nsp_falsify(a, &phi, 8, seed).unwrap() else { continue };
        found += 1;
        assert!(kernel_defect(&phi, &ce.v) <= 1e-8);
        assert!(ce.v.iter().any(|&c| c != 0.0));
        assert!(ce.x.iter().all(|&c| a.contains(c)));
        assert!(ce.margin <= 1e-9);
        let fx = direct_f(a, &ce.x);
        let alternate: Vec<f64> = ce.x.iter().zip(&ce.v).map(|(x, v)| x - v).collect();
        assert!(direct_f(a, &alternate) <= fx + 1e-9);
        let y = phi.matvec(&ce.x).unwrap();
        let res = soav_lp_solve(&obj, &phi, &y, &SolverOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!(res.objective <= fx + 1e-9);
    }
    assert!(found > 0, "wide Gaussian matrices should violate the property");
}

/// Without a counterexample, the simplex recovers every `x ∈ 𝒳^N`; with one,
/// the LP optimum for that `x` is at most `F(x)`. Over all of `𝒳^N` a
/// nonzero kernel always admits a violation at extreme symbols, so square
/// matrices are mixed in to exercise both outcomes.
#[test]
fn falsification_agrees_with_exhaustive_recovery() {
    let a = binary();
    let obj = a.objective();
    let mut outcomes = (0, 0);
    for seed in 0..30 {
        let phi = gaussian_matrix(3 + (seed as usize % 2), 4, 50 + seed).unwrap();
        let verdict = nsp_falsify(&a, &phi, 64, seed).unwrap();
        let mut all_recovered = true;
        for x in all_signals(a.symbols(), 4) {
            let y = phi.matvec(&x).unwrap();
            let res = soav_lp_solve(&obj, &phi, &y, &SolverOptions::default()).unwrap();
            assert_eq!(res.status, SolveStatus::Optimal);
            let fx = obj.eval_sum(&x);
            let dist: f64 = res.z.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if !(dist <= 1e-6 && res.objective >= fx - 1e-9) {
                all_recovered = false;
                assert!(res.objective <= fx + 1e-9);
            }
        }
        match verdict {
            None => {
                outcomes.0 += 1;
                assert!(all_recovered, "seed {seed}: no counterexample but some x is not recovered");
            }
            Some(ce) => {
                outcomes.1 += 1;
                let fx = obj.eval_sum(&ce.x);
                let y = phi.matvec(&ce.x).unwrap();
                let res = soav_lp_solve(&obj, &phi, &y, &SolverOptions::default()).unwrap();
                assert!(res.objective <= fx + 1e-9);
            }
        }
    }
    assert!(outcomes.0 > 0 && outcomes.1 > 0, "{outcomes:?}");
}

#[test]
fn trivial_kernel_has_no_counterexample() {
    let phi = RealMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]).unwrap();
    assert_eq!(nsp_falsify(&binary(), &phi, 32, 5).unwrap(), None);
    let ternary = Alphabet::new(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25]).unwrap();
    assert!(check_uniqueness(&ternary, &RealMatrix::identity(5), UNIQUENESS_TOL).unwrap());
}

#[test]
fn nsr_is_orthogonally_invariant() {
    let mut rng = SeededRng::new(4);
    for _ in 0..20 {
        let n = 6;
        let raw: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.normal()).collect()).collect();
        let q = RealMatrix::from_rows(&gram_schmidt(&raw)).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let xhat: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let direct = nsr(&x, &xhat).unwrap();
        let rotated = nsr(&q.matvec(&x).unwrap(), &q.matvec(&xhat).unwrap()).unwrap();
        assert!((direct - rotated).abs() <= 1e-12 * (1.0 + direct));
    }
}

#[test]
fn exact_recovery_uses_nearest_symbol_rounding() {
    let a = Alphabet::new(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25]).unwrap();
    assert!(exact_recovery(&[-1.0, 0.0, 1.0], &[-1.2, 0.5, 0.51], &a).unwrap());
    // Ties go to the smaller symbol.
    assert!(exact_recovery(&[-1.0, 0.0, 1.0], &[-0.5, 0.0, 1.0], &a).unwrap());
    assert!(!exact_recovery(&[-1.0, 0.0, 1.0], &[-0.4, 0.0, 1.0], &a).unwrap());
}
