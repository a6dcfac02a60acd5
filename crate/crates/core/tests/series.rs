use proptest::prelude::*;
use rug::Float;
use sigzeta_core::series::{
    accuracy_profile, calibrate_b, calibrate_with, fit_power_law, generalized_delta, truncation_length, weighted_zeta,
    CalibrationOptions, DirichletTerms, SeriesError, SigmoidWeights, DEFAULT_BRACKET,
};
use sigzeta_core::{oracle, ComplexAP, PrecisionContext};

fn ctx(d: u32) -> PrecisionContext {
    PrecisionContext::new(d).unwrap()
}

#[test]
fn calibration_at_one_thousand() {
    let c = ctx(30);
    let s = ComplexAP::from_f64(0.5, 1000.0, &c);
    let cal = calibrate_b(&s, &c, DEFAULT_BRACKET).unwrap();
    assert!((cal.b_hat / 4.05968 - 1.0).abs() < 0.01, "B = {}", cal.b_hat);
    assert!(cal.scan_is_unimodal());
    assert!(cal.trace.windows(2).all(|w| w[0].0 <= w[1].0));

    // the optimum is sharp: a factor two either way costs an order of magnitude
    for b in [0.5 * cal.b_hat, 2.0 * cal.b_hat] {
        let e = cal.error_at(b).unwrap();
        assert!(e >= 10.0 * cal.err_at_opt, "err({b}) = {e:e} vs {:e}", cal.err_at_opt);
    }
    // err_at_opt is reproduced by an independent evaluation
    let again = cal.error_at(cal.b_hat).unwrap();
    assert!((again / cal.err_at_opt - 1.0).abs() < 1e-6);
}

#[test]
fn conjugate_point_gives_the_same_scale() {
    let c = ctx(30);
    let s = ComplexAP::from_f64(0.5, 300.0, &c);
    let a = calibrate_b(&s, &c, DEFAULT_BRACKET).unwrap();
    let b = calibrate_b(&s.conj(), &c, DEFAULT_BRACKET).unwrap();
    assert_eq!(a.b_hat, b.b_hat);
    assert_eq!(a.err_at_opt, b.err_at_opt);
}

#[test]
fn weighted_sum_with_calibrated_scale_beats_plain_truncation() {
    let c = ctx(30);
    let s = ComplexAP::from_f64(0.5, 500.0, &c);
    let cal = calibrate_b(&s, &c, DEFAULT_BRACKET).unwrap();
    let zeta = oracle::zeta(&s, &c).unwrap().value;
    let n = cal.terms;
    let mut plain = c.zero();
    for k in 1..=n {
        plain = &plain + &sigzeta_core::power_term(k, &s, &c);
    }
    let plain_err = (&zeta - &plain).abs().to_f64();
    assert!(
        cal.err_at_opt < 1e-3 * plain_err,
        "{:e} vs {plain_err:e}",
        cal.err_at_opt
    );
}

#[test]
fn invalid_inputs() {
    let c = ctx(20);
    let s = ComplexAP::from_f64(0.5, 100.0, &c);
    assert!(matches!(
        calibrate_b(&s, &c, (5.0, 1.0)),
        Err(SeriesError::InvalidBracket { .. })
    ));
    let real = ComplexAP::from_f64(0.5, 0.0, &c);
    assert!(matches!(
        calibrate_b(&real, &c, DEFAULT_BRACKET),
        Err(SeriesError::RealAxis)
    ));
    assert!(matches!(
        generalized_delta(3, &s, 0.0),
        Err(SeriesError::NonPositiveScale(_))
    ));
    let opts = CalibrationOptions::default();
    assert!(matches!(
        accuracy_profile(0.5, &[200.0, 100.0], &c, &opts),
        Err(SeriesError::InvalidOrdinates)
    ));
    assert!(matches!(
        accuracy_profile(0.5, &[-5.0], &c, &opts),
        Err(SeriesError::InvalidOrdinates)
    ));
    assert!(matches!(
        fit_power_law(0.5, &[(100.0, 1.0)]),
        Err(SeriesError::InsufficientSamples { .. })
    ));
}

#[test]
fn profile_keeps_input_order() {
    let c = ctx(30);
    let out = accuracy_profile(0.5, &[100.0, 300.0, 1000.0], &c, &CalibrationOptions::default()).unwrap();
    let ts: Vec<f64> = out.iter().map(|r| r.as_ref().unwrap().t()).collect();
    assert_eq!(ts, vec![100.0, 300.0, 1000.0]);
    let single = accuracy_profile(0.5, &[300.0], &c, &CalibrationOptions::default()).unwrap();
    assert_eq!(single[0].as_ref().unwrap().b_hat, out[1].as_ref().unwrap().b_hat);
}

#[test]
fn escalation_lifts_the_precision_floor() {
    // At P = 20 the error at t = 5000 saturates against the working precision.
    let c = ctx(20);
    let s = ComplexAP::from_f64(0.5, 5000.0, &c);
    let capped = calibrate_with(
        &s,
        &c,
        &CalibrationOptions {
            max_escalations: 0,
            ..Default::default()
        },
    )
    .unwrap();
    let free = calibrate_with(&s, &c, &CalibrationOptions::default()).unwrap();
    assert_eq!(capped.digits, 20);
    assert!(free.digits > 20);
    assert!(free.digits_gained > capped.digits_gained + 5.0);
}

#[test]
fn cached_terms_match_direct_sum() {
    let c = ctx(40);
    let s = ComplexAP::from_f64(0.3, 250.0, &c);
    let b = 2.0;
    let n = truncation_length(&s, b, 1e-40).unwrap();
    let terms = DirichletTerms::new(&s, n, &c);
    let w = SigmoidWeights::new(&s, b, &c).unwrap();
    let direct = weighted_zeta(&s, b, n, &c).unwrap();
    assert!((&terms.weighted_sum(&w, n, &c) - &direct).abs().to_f64() < 1e-45);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weights_lie_in_the_unit_interval(t in 1.0f64..5000.0, b in 0.1f64..50.0, n in 1u64..5000) {
        let c = ctx(30);
        let s = ComplexAP::from_f64(0.5, t, &c);
        let w = SigmoidWeights::new(&s, b, &c).unwrap().weight(n);
        prop_assert!((0..=1).contains(&w));
        let x = (n as f64 - t / std::f64::consts::PI) / b;
        if x.abs() < 30.0 {
            prop_assert!(w > 0 && w < 1, "w = {} at x = {}", w, x);
        }
        let f = generalized_delta(n, &s, b).unwrap();
        prop_assert!((w.to_f64() - f).abs() < 1e-14);
    }

    #[test]
    fn weights_are_non_increasing(t in 10.0f64..3000.0, b in 0.1f64..30.0) {
        let c = ctx(30);
        let s = ComplexAP::from_f64(0.5, t, &c);
        let w = SigmoidWeights::new(&s, b, &c).unwrap().first(2000);
        prop_assert!(w.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn truncation_insensitivity(sigma in 0.1f64..0.9, t in 20.0f64..600.0, b in 0.5f64..8.0) {
        let c = ctx(40);
        let eps = 1e-25;
        let s = ComplexAP::from_f64(sigma, t, &c);
        let n = truncation_length(&s, b, eps).unwrap();
        let short = weighted_zeta(&s, b, n, &c).unwrap();
        let long = weighted_zeta(&s, b, 2 * n, &c).unwrap();
        let gap = Float::with_val(c.bits(), (&short - &long).abs()).to_f64();
        prop_assert!(gap < 10.0 * eps, "gap = {:e}, N = {}", gap, n);
    }
}
