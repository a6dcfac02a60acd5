//! The logistic profile δ̂_n = 1/(1 + exp((n − A)/B)) fitted to a coefficient set.
//!
//! A is the half-crossing n̂* of Re δ*_n and B comes from B² = n̂* − 2N/π.
//! Only real parts enter the fit; imaginary parts are tracked by
//! [`crate::solver::stability_metric`].

use rug::Float;
use serde::Serialize;
use thiserror::Error;

use crate::precision::ComplexAP;
use crate::solver::{half_crossing_of, CoefficientSet, GridSpec, SolveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SigmoidError {
    #[error("real parts never cross 1/2")]
    NoCrossing,
    #[error("n_hat_star = {n_hat_star} is not above 2N/pi = {floor}; no positive scale exists")]
    NegativeRadicand { n_hat_star: f64, floor: f64 },
}

/// Parameters of δ̂_n plus the fit residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmoidFit {
    /// Center A.
    pub a_param: f64,
    /// Scale B > 0.
    pub b_param: f64,
    /// |Σ_n (Re δ*_n − δ̂_n)|.
    pub residual: f64,
    pub source_grid: Option<GridSpec>,
}

impl SigmoidFit {
    pub fn eval(&self, n: f64) -> f64 {
        sigmoid_eval(n, self.a_param, self.b_param)
    }
}

/// 1/(1 + exp((n − A)/B)); saturates to exactly 0 or 1 far in the tails.
pub fn sigmoid_eval(n: f64, a: f64, b: f64) -> f64 {
    let x = (n - a) / b;
    if x > 745.0 {
        0.0
    } else if x < -40.0 {
        // 1 − e^x rounds to 1 in f64 here
        1.0
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// B = sqrt(n̂* − 2N/π).
pub fn scale_from_formula(n_hat_star: f64, n_coeffs: usize) -> Result<f64, SigmoidError> {
    let floor = 2.0 * n_coeffs as f64 / std::f64::consts::PI;
    let radicand = n_hat_star - floor;
    if radicand <= 0.0 || !radicand.is_finite() {
        return Err(SigmoidError::NegativeRadicand { n_hat_star, floor });
    }
    Ok(radicand.sqrt())
}

/// |Σ_n (Re δ*_n − δ̂_n)| with n = 1..len. Signed terms may cancel.
pub fn fit_residual(deltas: &[ComplexAP], a: f64, b: f64) -> f64 {
    let bits = deltas.first().map_or(64, ComplexAP::prec);
    let mut sum = Float::with_val(bits, 0);
    for (idx, d) in deltas.iter().enumerate() {
        sum += d.re();
        sum -= sigmoid_eval((idx + 1) as f64, a, b);
    }
    sum.abs().to_f64()
}

/// A from the half-crossing, B from the scale formula, and the residual.
pub fn construct_fit_from(deltas: &[ComplexAP], grid: Option<GridSpec>) -> Result<SigmoidFit, SigmoidError> {
    let re: Vec<f64> = deltas.iter().map(|d| d.re().to_f64()).collect();
    let crossing = half_crossing_of(&re).map_err(|e| match e {
        SolveError::NoCrossing => SigmoidError::NoCrossing,
        other => unreachable!("half_crossing_of only reports NoCrossing, got {other}"),
    })?;
    let a = crossing.n_hat_star;
    let b = scale_from_formula(a, deltas.len())?;
    Ok(SigmoidFit {
        a_param: a,
        b_param: b,
        residual: fit_residual(deltas, a, b),
        source_grid: grid,
    })
}

pub fn construct_fit(cs: &CoefficientSet) -> Result<SigmoidFit, SigmoidError> {
    construct_fit_from(&cs.deltas, Some(cs.grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::PrecisionContext;

    fn profile(a: f64, b: f64, n: usize) -> Vec<ComplexAP> {
        let c = PrecisionContext::new(30).unwrap();
        (1..=n)
            .map(|k| ComplexAP::from_f64(sigmoid_eval(k as f64, a, b), 0.0, &c))
            .collect()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(sigmoid_eval(70.0, 70.0, 2.0), 0.5);
        let want = 1.0 / (1.0 + std::f64::consts::E);
        assert!((sigmoid_eval(72.0, 70.0, 2.0) - want).abs() < 1e-15);
        assert!((want - 0.2689414).abs() < 1e-7);
        assert_eq!(sigmoid_eval(-1e6, 70.0, 2.0), 1.0);
        assert_eq!(sigmoid_eval(1e6, 70.0, 2.0), 0.0);
        assert_eq!(sigmoid_eval(f64::MAX, 0.0, 1.0), 0.0);
    }

    #[test]
    fn scale_formula() {
        let floor = 200.0 / std::f64::consts::PI;
        assert!(matches!(
            scale_from_formula(floor, 100),
            Err(SigmoidError::NegativeRadicand { .. })
        ));
        assert!(matches!(
            scale_from_formula(60.0, 100),
            Err(SigmoidError::NegativeRadicand { .. })
        ));
        let b = scale_from_formula(69.9, 100).unwrap();
        assert!((b - 2.4976).abs() < 1e-3, "{b}");
    }

    #[test]
    fn residual_is_a_signed_sum() {
        let mut d = profile(70.0, 2.5, 100);
        assert_eq!(fit_residual(&d, 70.0, 2.5), 0.0);
        let c = PrecisionContext::new(30).unwrap();
        d[10] = &d[10] + &ComplexAP::from_f64(0.3, 0.0, &c);
        d[80] = &d[80] - &ComplexAP::from_f64(0.3, 0.0, &c);
        assert!(fit_residual(&d, 70.0, 2.5) < 1e-25);
    }

    #[test]
    fn recovers_synthetic_parameters() {
        let d = profile(70.0, 2.5, 100);
        let fit = construct_fit_from(&d, None).unwrap();
        assert!((fit.a_param - 70.0).abs() < 0.01);
        assert!((fit.b_param - 2.5).abs() < 0.05);
        assert_eq!(fit.eval(fit.a_param), 0.5);
    }

    #[test]
    fn increasing_profile_has_no_crossing() {
        let c = PrecisionContext::new(20).unwrap();
        let d: Vec<ComplexAP> = (0..10).map(|k| ComplexAP::from_f64(k as f64 / 10.0, 0.0, &c)).collect();
        assert_eq!(construct_fit_from(&d, None), Err(SigmoidError::NoCrossing));
    }
}
