use proptest::prelude::*;
use sigzeta_core::sigmoid::{construct_fit_from, scale_from_formula, sigmoid_eval, SigmoidError};
use sigzeta_core::{ComplexAP, PrecisionContext};

fn synthetic(a: f64, b: f64, n: usize) -> Vec<ComplexAP> {
    let ctx = PrecisionContext::new(30).unwrap();
    (1..=n)
        .map(|k| ComplexAP::from_f64(sigmoid_eval(k as f64, a, b), 0.0, &ctx))
        .collect()
}

#[test]
fn half_at_center_and_known_points() {
    assert_eq!(sigmoid_eval(12.0, 12.0, 0.7), 0.5);
    let e = std::f64::consts::E;
    assert!((sigmoid_eval(3.0, 1.0, 2.0) - 1.0 / (1.0 + e)).abs() < 1e-15);
    assert!((sigmoid_eval(-1.0, 1.0, 2.0) - e / (1.0 + e)).abs() < 1e-15);
}

#[test]
fn synthetic_profile_recovers_its_center() {
    let fit = construct_fit_from(&synthetic(70.0, 2.5, 100), None).unwrap();
    assert!((fit.a_param - 70.0).abs() < 0.01, "A = {}", fit.a_param);
    // B² = A − 2N/π, independent of the profile's own scale.
    let want_b = (fit.a_param - 200.0 / std::f64::consts::PI).sqrt();
    assert!((fit.b_param - want_b).abs() < 1e-12);
}

#[test]
fn profile_without_crossing_is_rejected() {
    let flat = synthetic(500.0, 2.0, 50);
    assert_eq!(construct_fit_from(&flat, None).unwrap_err(), SigmoidError::NoCrossing);
}

#[test]
fn scale_requires_a_positive_radicand() {
    assert!(matches!(
        scale_from_formula(10.0, 100),
        Err(SigmoidError::NegativeRadicand { .. })
    ));
    let b = scale_from_formula(70.0, 100).unwrap();
    assert!((b * b - (70.0 - 200.0 / std::f64::consts::PI)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn reflection_symmetry(a in -50.0f64..150.0, b in 0.05f64..20.0, d in 0.0f64..30.0) {
        let lo = sigmoid_eval(a - d * b, a, b);
        let hi = sigmoid_eval(a + d * b, a, b);
        prop_assert!((lo + hi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_increasing_in_n(a in 0.0f64..150.0, b in 0.05f64..20.0, n in -100.0f64..300.0, step in 1e-3f64..10.0) {
        prop_assert!(sigmoid_eval(n + step, a, b) <= sigmoid_eval(n, a, b));
    }

    #[test]
    fn stays_in_the_unit_interval(a in 0.0f64..150.0, b in 0.05f64..20.0, n in -1e4f64..1e4) {
        let v = sigmoid_eval(n, a, b);
        prop_assert!((0.0..=1.0).contains(&v));
        if ((n - a) / b).abs() < 30.0 {
            prop_assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn synthetic_center_recovery(a in 66.0f64..90.0, b in 0.5f64..5.0) {
        let fit = construct_fit_from(&synthetic(a, b, 100), None).unwrap();
        prop_assert!((fit.a_param - a).abs() < 0.05 * b.max(1.0), "A = {} vs {}", fit.a_param, a);
    }
}
