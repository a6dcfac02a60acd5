use rug::Float;
use sigzeta_core::series::{calibrate_b, weighted_zeta, DEFAULT_BRACKET};
use sigzeta_core::spiral::{
    default_terms, functional_residual, functional_term, partial_sums_weighted_by, raw_partial_sums,
    weighted_partial_sums,
};
use sigzeta_core::{oracle, ComplexAP, PrecisionContext};

fn setup(sigma: f64, t: f64) -> (PrecisionContext, ComplexAP) {
    let c = PrecisionContext::new(30).unwrap();
    let s = ComplexAP::from_f64(sigma, t, &c);
    (c, s)
}

#[test]
fn consecutive_points_differ_by_one_term() {
    let (c, s) = setup(0.5, 120.0);
    let tr = raw_partial_sums(&s, 60, &c).unwrap();
    for k in 1..tr.len() {
        let step = &tr.points[k] - &tr.points[k - 1];
        let term = functional_term(k as u64 + 1, &s, &c).unwrap();
        assert!((&step - &term).abs_f64() < 1e-27, "k = {k}");
    }
}

#[test]
fn unit_weights_reproduce_the_raw_trace() {
    let (c, s) = setup(0.4, 80.0);
    let raw = raw_partial_sums(&s, 50, &c).unwrap();
    let unit = partial_sums_weighted_by(&s, 50, &c, |_| Float::with_val(c.bits(), 1)).unwrap();
    assert_eq!(raw.points, unit);
}

#[test]
fn weighted_trace_follows_raw_trace_early_on() {
    // Up to |t|/2π the gap is bounded by Σ (1 − δ_n)·|term_n|, which is tiny.
    let (c, s) = setup(0.5, 200.0);
    let b = 1.85;
    let prefix = (200.0 / (2.0 * std::f64::consts::PI)) as u64;
    let raw = raw_partial_sums(&s, prefix, &c).unwrap();
    let weighted = weighted_partial_sums(&s, b, prefix, &c).unwrap();
    let center = 200.0 / std::f64::consts::PI;
    let mut bound = 0.0;
    for k in 1..=prefix {
        let x = (k as f64 - center) / b;
        bound += x.exp() / (1.0 + x.exp()) * functional_term(k, &s, &c).unwrap().abs_f64();
        let gap = (&raw.points[k as usize - 1] - &weighted.points[k as usize - 1]).abs_f64();
        assert!(gap <= 1.01 * bound + 1e-27, "k = {k}: {gap:e} > {bound:e}");
    }
    assert!(bound < 1e-6);
}

#[test]
fn weighted_trace_returns_to_the_origin() {
    let (c, s) = setup(0.5, 200.0);
    let b = calibrate_b(&s, &c, DEFAULT_BRACKET).unwrap().b_hat;
    let n = default_terms(&s, b, &c).unwrap();
    let cutoff = (200.0 / std::f64::consts::PI).ceil() as usize;

    let raw = raw_partial_sums(&s, n, &c).unwrap();
    let weighted = weighted_partial_sums(&s, b, n, &c).unwrap();
    assert!(weighted.last().abs_f64() < 1e-2);
    assert!(weighted.max_modulus_beyond(cutoff) < raw.max_modulus_beyond(cutoff));
    // without weights the trace keeps circling at a fixed distance
    assert!(raw.max_modulus_beyond(cutoff) > 1e3 * weighted.last().abs_f64());
}

#[test]
fn residual_matches_two_independent_weighted_sums() {
    // The last point equals S_w(s) − χ(s)·S_w(1−s); the weights depend on |t| only.
    for sigma in [0.5, 0.3] {
        let (c, s) = setup(sigma, 150.0);
        let b = 1.6;
        let n = default_terms(&s, b, &c).unwrap();
        let reflected = &c.one() - &s;
        let direct = weighted_zeta(&s, b, n, &c).unwrap();
        let mirrored = weighted_zeta(&reflected, b, n, &c).unwrap();
        let chi = oracle::chi(&s, &c).unwrap();
        let want = (&direct - &(&chi * &mirrored)).abs_f64();
        let got = functional_residual(&s, b, n, &c).unwrap();
        assert!((got - want).abs() < 1e-25, "sigma = {sigma}: {got:e} vs {want:e}");
    }
}

#[test]
fn residual_is_bounded_by_the_two_truncation_errors() {
    let (c, s) = setup(0.3, 200.0);
    let cal = calibrate_b(&s, &c, DEFAULT_BRACKET).unwrap();
    let n = default_terms(&s, cal.b_hat, &c).unwrap();
    let reflected = &c.one() - &s;
    let err_mirror = (&oracle::zeta(&reflected, &c).unwrap().value
        - &weighted_zeta(&reflected, cal.b_hat, n, &c).unwrap())
        .abs_f64();
    let chi = oracle::chi(&s, &c).unwrap().abs_f64();
    let residual = functional_residual(&s, cal.b_hat, n, &c).unwrap();
    assert!(residual <= 10.0 * cal.err_at_opt + chi * err_mirror, "{residual:e}");
    assert!(residual < 1e-2);
}
