mod common;

use common::{direct_l, golden_section};
use proptest::prelude::*;
use soav::Alphabet;

fn alphabet_strategy() -> impl Strategy<Value = Alphabet> {
    (1usize..=6)
        .prop_flat_map(|len| (prop::collection::vec(-5.0f64..5.0, len), prop::collection::vec(0.05f64..1.0, len)))
        .prop_filter("symbols must be separated", |(s, _)| {
            let mut sorted = s.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.windows(2).all(|w| w[1] - w[0] >= 1e-3)
        })
        .prop_map(|(s, w)| {
            let total: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|x| x / total).collect();
            Alphabet::new(&s, &p).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn segment_formula_matches_definition(a in alphabet_strategy(), t in -8.0f64..8.0) {
        let obj = a.objective();
        let expected = direct_l(&a, t);
        prop_assert!((obj.eval_segment(t) - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        prop_assert!((obj.eval(t) - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn pieces_agree_at_breakpoints(a in alphabet_strategy()) {
        let obj = a.objective();
        let (s, b) = (obj.slopes(), obj.intercepts());
        prop_assert_eq!(s[0], -1.0);
        prop_assert_eq!(s[s.len() - 1], 1.0);
        prop_assert_eq!(b[0], a.mean());
        prop_assert_eq!(b[b.len() - 1], -a.mean());
        for (i, &r) in obj.breakpoints().iter().enumerate() {
            let left = s[i] * r + b[i];
            let right = s[i + 1] * r + b[i + 1];
            prop_assert!((left - right).abs() <= 1e-12 * (1.0 + r.abs()), "gap {} at r = {}", left - right, r);
        }
    }

    #[test]
    fn objective_is_convex(a in alphabet_strategy(), t1 in -8.0f64..8.0, dt in 0.0f64..8.0, theta in 0.0f64..1.0) {
        let obj = a.objective();
        prop_assert!(obj.slopes().windows(2).all(|w| w[1] > w[0]));
        let t2 = t1 + dt;
        let mid = obj.eval(theta * t1 + (1.0 - theta) * t2);
        prop_assert!(mid <= theta * obj.eval(t1) + (1.0 - theta) * obj.eval(t2) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn prox_matches_golden_section(a in alphabet_strategy(), lambda in 0.01f64..5.0, v in -10.0f64..10.0) {
        let obj = a.objective();
        let closed = obj.prox(lambda, v).unwrap();
        // |L'| ≤ 1, so the minimizer lies within λ of v.
        let numeric = golden_section(|t| lambda * direct_l(&a, t) + 0.5 * (t - v).powi(2), v - lambda - 1.0, v + lambda + 1.0, 200);
        prop_assert!((closed - numeric).abs() <= 1e-6, "closed {closed} numeric {numeric}");
    }

    #[test]
    fn prox_is_monotone_and_nonexpansive(a in alphabet_strategy(), lambda in 0.01f64..5.0, v1 in -10.0f64..10.0, v2 in -10.0f64..10.0) {
        let obj = a.objective();
        let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
        let (p_lo, p_hi) = (obj.prox(lambda, lo).unwrap(), obj.prox(lambda, hi).unwrap());
        prop_assert!(p_lo <= p_hi);
        prop_assert!(p_hi - p_lo <= hi - lo + 1e-12);
    }

    #[test]
    fn rounding_is_idempotent_on_alphabet_vectors(a in alphabet_strategy(), picks in prop::collection::vec(0usize..6, 1..20)) {
        let x: Vec<f64> = picks.iter().map(|&k| a.symbols()[k % a.len()]).collect();
        prop_assert_eq!(a.round(&x), x.clone());
        prop_assert_eq!(a.round(&a.round(&x)), x);
    }

    #[test]
    fn difference_set_is_symmetric(a in alphabet_strategy()) {
        let d = a.difference_set();
        prop_assert!(d.contains(&0.0));
        prop_assert!(d.windows(2).all(|w| w[0] < w[1]));
        for (lo, hi) in d.iter().zip(d.iter().rev()) {
            prop_assert_eq!(*lo, -*hi);
        }
    }
}

#[test]
fn documented_examples() {
    let binary = Alphabet::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
    let obj = binary.objective();
    assert_eq!(obj.eval(0.5), 0.5);
    assert_eq!(obj.eval(-2.0), 2.5);
    assert_eq!(obj.eval_sum(&[0.0, 1.0, 1.0]), 1.5);
    assert_eq!(obj.prox(0.5, 1.2).unwrap(), 1.0);
    assert!((obj.prox(0.5, 0.7).unwrap() - 0.7).abs() < 1e-15);

    let zero = Alphabet::new(&[0.0], &[1.0]).unwrap().objective();
    assert_eq!(zero.eval(3.0), 3.0);
    assert_eq!(zero.prox(1.0, 2.0).unwrap(), 1.0);
    assert_eq!(zero.prox(1.0, 0.5).unwrap(), 0.0);
    assert!(zero.prox(0.0, 1.0).is_err());

    let ternary = Alphabet::new(&[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25]).unwrap();
    assert_eq!(ternary.round(&[0.4, 0.5, 3.7, -0.5]), vec![0.0, 0.0, 1.0, -1.0]);
    assert_eq!(ternary.difference_set(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    assert!(Alphabet::new(&[0.0, 1.0], &[0.5, 0.6]).is_err());
}
