//! Sigmoid-weighted Dirichlet series.
//!
//! The generalized coefficients are
//!
//! ```text
//! δ_n(s) = 1 / (1 + exp((n − |t|/π) / B)),   s = σ + it
//! ```
//!
//! and Σ δ_n(s)·n^(−s) converges for every σ once the sigmoid has damped the
//! tail. The scale B is calibrated per s against the reference ζ(s).

mod calibrate;
mod fit;

pub use calibrate::{accuracy_profile, calibrate_b, calibrate_with, BCalibration, CalibrationOptions, DEFAULT_BRACKET};
pub use fit::{fit_power_law, fit_sigma_dependence, ExponentialFit, ScalingFit};

use rug::Float;
use thiserror::Error;

use crate::oracle::OracleError;
use crate::precision::{power_term_from_ln, ComplexAP, PrecisionContext, PrecisionError};
use crate::sigmoid::sigmoid_eval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("generalized coefficients are undefined on the real axis (Im s = 0)")]
    RealAxis,
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("error is monotone over the bracket (best B = {best_b} at the {edge} edge); widen the bracket")]
    NoInteriorMinimum { best_b: f64, edge: &'static str },
    #[error("ordinates must be positive and strictly increasing")]
    InvalidOrdinates,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("degenerate fit: all abscissae are equal")]
    DegenerateFit,
    #[error("sample {index} = ({x}, {value}) is not positive; logarithm undefined")]
    NonPositiveValue { index: usize, x: f64, value: f64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Precision(#[from] PrecisionError),
}

fn check_args(s: &ComplexAP, b: f64) -> Result<(), SeriesError> {
    if s.im().is_zero() {
        return Err(SeriesError::RealAxis);
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(SeriesError::NonPositiveScale(b));
    }
    Ok(())
}

/// Sigmoid center |t|/π.
fn center_f64(s: &ComplexAP) -> f64 {
    s.im().to_f64().abs() / std::f64::consts::PI
}

/// δ_n(s) as an f64.
pub fn generalized_delta(n: u64, s: &ComplexAP, b: f64) -> Result<f64, SeriesError> {
    check_args(s, b)?;
    Ok(sigmoid_eval(n as f64, center_f64(s), b))
}

/// Multiprecision δ_n(s) for a fixed s and B.
#[derive(Debug, Clone)]
pub struct SigmoidWeights {
    center: Float,
    scale: Float,
    center_f64: f64,
    scale_f64: f64,
    /// Below this argument the weight is 1 to working precision.
    saturate_lo: f64,
}

/// Direct exp evaluations between recurrence steps in [`SigmoidWeights::first`].
const RESYNC: u64 = 256;

impl SigmoidWeights {
    pub fn new(s: &ComplexAP, b: f64, ctx: &PrecisionContext) -> Result<Self, SeriesError> {
        check_args(s, b)?;
        let bits = ctx.bits();
        let t = Float::with_val(bits, s.im().abs_ref());
        Ok(Self {
            center: t / ctx.pi(),
            scale: Float::with_val(bits, b),
            center_f64: center_f64(s),
            scale_f64: b,
            saturate_lo: -(f64::from(bits) + 8.0) * std::f64::consts::LN_2,
        })
    }

    fn saturated(&self, n: u64) -> bool {
        (n as f64 - self.center_f64) / self.scale_f64 < self.saturate_lo
    }

    fn exponential(&self, n: u64) -> Float {
        let bits = self.center.prec();
        ((Float::with_val(bits, n) - &self.center) / &self.scale).exp()
    }

    pub fn weight(&self, n: u64) -> Float {
        let bits = self.center.prec();
        if self.saturated(n) {
            return Float::with_val(bits, 1);
        }
        Float::with_val(bits, 1) / (self.exponential(n) + 1u32)
    }

    /// δ_1..δ_len. exp((n − c)/B) advances by a factor exp(1/B) per step and
    /// is recomputed directly every few hundred terms to bound drift.
    pub fn first(&self, len: u64) -> Vec<Float> {
        let bits = self.center.prec();
        let step = (Float::with_val(bits, 1) / &self.scale).exp();
        let mut e = Float::new(bits);
        let mut out = Vec::with_capacity(len as usize);
        for n in 1..=len {
            if (n - 1) % RESYNC == 0 {
                e = self.exponential(n);
            } else {
                e *= &step;
            }
            if self.saturated(n) {
                out.push(Float::with_val(bits, 1));
            } else {
                out.push(Float::with_val(bits, 1) / Float::with_val(bits, &e + 1u32));
            }
        }
        out
    }
}

/// Smallest N ≥ ⌈|t|/π⌉ + 1 with δ_N(s)·N^(−σ) < tail_eps.
pub fn truncation_length(s: &ComplexAP, b: f64, tail_eps: f64) -> Result<u64, SeriesError> {
    check_args(s, b)?;
    Ok(truncation_length_ln(s, b, tail_eps.ln()))
}

/// [`truncation_length`] with the threshold given as ln(tail_eps), so budgets
/// below the f64 range remain usable.
pub fn truncation_length_ln(s: &ComplexAP, b: f64, ln_eps: f64) -> u64 {
    let center = center_f64(s);
    let sigma = s.re().to_f64();
    let floor = center.ceil() as u64 + 1;
    // ln δ_N − σ ln N, with ln δ = −ln(1 + e^x)
    let ln_tail = |n: u64| {
        let nf = n as f64;
        let x = (nf - center) / b;
        let ln_delta = if x > 30.0 { -x - (-x).exp() } else { -x.exp().ln_1p() };
        ln_delta - sigma * nf.ln()
    };
    let mut n = floor;
    while ln_tail(n) >= ln_eps {
        n += 1;
    }
    n
}

/// Σ_{n=1}^{N} δ_n(s)·n^(−s), accumulated in increasing n.
pub fn weighted_zeta(s: &ComplexAP, b: f64, n_terms: u64, ctx: &PrecisionContext) -> Result<ComplexAP, SeriesError> {
    let weights = SigmoidWeights::new(s, b, ctx)?;
    let s = s.to_ctx(ctx);
    let bits = ctx.bits();
    let mut sum = ctx.zero();
    for (w, n) in weights.first(n_terms).iter().zip(1..) {
        let term = if n == 1 {
            ctx.one()
        } else {
            power_term_from_ln(&Float::with_val(bits, n).ln(), &s, ctx)
        };
        sum.add_scaled(&term, w);
    }
    Ok(sum)
}

/// The terms n^(−s), n = 1..len, cached for repeated weighted sums at one s.
#[derive(Debug, Clone)]
pub struct DirichletTerms {
    s: ComplexAP,
    terms: Vec<ComplexAP>,
}

impl DirichletTerms {
    pub fn new(s: &ComplexAP, len: u64, ctx: &PrecisionContext) -> Self {
        let s = s.to_ctx(ctx);
        let bits = ctx.bits();
        let terms = (1..=len)
            .map(|n| {
                if n == 1 {
                    ctx.one()
                } else {
                    power_term_from_ln(&Float::with_val(bits, n).ln(), &s, ctx)
                }
            })
            .collect();
        Self { s, terms }
    }

    pub fn len(&self) -> u64 {
        self.terms.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn s(&self) -> &ComplexAP {
        &self.s
    }

    /// Σ_{n=1}^{N} δ_n·n^(−s) over the cached terms.
    pub fn weighted_sum(&self, weights: &SigmoidWeights, n_terms: u64, ctx: &PrecisionContext) -> ComplexAP {
        assert!(
            n_terms <= self.len(),
            "requested {n_terms} terms, cached {}",
            self.len()
        );
        let mut sum = ctx.zero();
        for (term, w) in self.terms[..n_terms as usize].iter().zip(weights.first(n_terms)) {
            sum.add_scaled(term, &w);
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn delta_examples() {
        let c = ctx(30);
        let t = 100.0 * std::f64::consts::PI;
        let s = ComplexAP::from_f64(0.5, t, &c);
        assert!((generalized_delta(100, &s, 3.0).unwrap() - 0.5).abs() < 1e-12);

        let s = ComplexAP::from_f64(0.5, 1000.0, &c);
        let w = SigmoidWeights::new(&s, 4.05968, &c).unwrap().weight(1);
        let gap = (Float::with_val(c.bits(), 1) - w).abs().to_f64();
        assert!(gap < 1e-30, "{gap:e}");

        let vals: Vec<f64> = (1..600).map(|n| generalized_delta(n, &s, 4.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn delta_errors() {
        let c = ctx(20);
        let real = ComplexAP::from_f64(0.5, 0.0, &c);
        assert_eq!(generalized_delta(1, &real, 1.0), Err(SeriesError::RealAxis));
        let s = ComplexAP::from_f64(0.5, 10.0, &c);
        assert_eq!(generalized_delta(1, &s, 0.0), Err(SeriesError::NonPositiveScale(0.0)));
        assert_eq!(generalized_delta(1, &s, -2.0), Err(SeriesError::NonPositiveScale(-2.0)));
    }

    #[test]
    fn truncation_examples() {
        let c = ctx(20);
        let s = ComplexAP::from_f64(0.5, 1000.0, &c);
        let n = truncation_length(&s, 4.06, 1e-30).unwrap();
        assert!((560..=620).contains(&n), "{n}");
        // the tail test holds at n and fails just before it
        let center = 1000.0 / std::f64::consts::PI;
        let tail = |k: u64| sigmoid_eval(k as f64, center, 4.06) * (k as f64).powf(-0.5);
        assert!(tail(n) < 1e-30 && tail(n - 1) >= 1e-30);

        let floor = (1000.0 / std::f64::consts::PI).ceil() as u64 + 1;
        assert_eq!(truncation_length(&s, 4.06, 1.0).unwrap(), floor);
        assert!(truncation_length(&s, 8.12, 1e-30).unwrap() > n);
    }

    #[test]
    fn step_limit_is_plain_partial_sum() {
        let c = ctx(30);
        let t = 60.0;
        let s = ComplexAP::from_f64(0.5, t, &c);
        let cut = (t / std::f64::consts::PI).floor() as u64;
        let got = weighted_zeta(&s, 1e-3, cut, &c).unwrap();
        let mut want = c.zero();
        for n in 1..=cut {
            want.add_assign_ref(&crate::power_term(n, &s, &c));
        }
        assert!((&got - &want).abs().to_f64() < 1e-25);
    }

    #[test]
    fn recurrence_tracks_direct_weights() {
        let c = ctx(40);
        let s = ComplexAP::from_f64(0.5, 3000.0, &c);
        let w = SigmoidWeights::new(&s, 7.0, &c).unwrap();
        let fast = w.first(1500);
        for n in [1u64, 255, 256, 257, 900, 955, 1000, 1311, 1500] {
            let direct = w.weight(n);
            let rel = Float::with_val(c.bits(), &fast[n as usize - 1] - &direct).abs() / &direct;
            assert!(rel.to_f64() < 1e-42, "n={n}: {rel}");
        }
    }

    #[test]
    fn cached_terms_match_direct_sum() {
        let c = ctx(25);
        let s = ComplexAP::from_f64(0.3, 40.0, &c);
        let direct = weighted_zeta(&s, 1.5, 40, &c).unwrap();
        let cache = DirichletTerms::new(&s, 50, &c);
        let w = SigmoidWeights::new(&s, 1.5, &c).unwrap();
        assert_eq!(cache.weighted_sum(&w, 40, &c), direct);
    }
}
