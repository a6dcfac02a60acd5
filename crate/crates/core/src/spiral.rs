//! Partial sums of Σ {n^(−s) − χ(s)·n^(s−1)}, plain and sigmoid-weighted.
//!
//! Unweighted, the trajectory winds outward; with the weights δ_n(s) it winds
//! back into the origin, and its last point is the functional-equation
//! residual of the weighted series.

use rug::Float;
use thiserror::Error;

use crate::oracle::{self, OracleError};
use crate::precision::{format_real, power_term_from_ln, ComplexAP, PrecisionContext};
use crate::series::{self, SeriesError, SigmoidWeights};

/// Digits written per coordinate in trace CSVs.
pub const DISPLAY_DIGITS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpiralError {
    #[error("spiral needs Im s != 0")]
    RealAxis,
    #[error("a trace needs at least one term")]
    NoTerms,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiralTrace {
    pub s: ComplexAP,
    pub weighted: bool,
    /// points[k−1] is the k-th partial sum.
    pub points: Vec<ComplexAP>,
    pub b_used: Option<f64>,
}

impl SpiralTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> &ComplexAP {
        self.points.last().expect("traces are never empty")
    }

    /// Largest |S_k| over k > index (1-based), or 0 when there is none.
    pub fn max_modulus_beyond(&self, index: usize) -> f64 {
        self.points
            .iter()
            .skip(index)
            .map(ComplexAP::abs_f64)
            .fold(0.0, f64::max)
    }

    /// `k,re,im` rows at [`DISPLAY_DIGITS`] significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,re,im\n");
        for (k, p) in self.points.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                k + 1,
                format_real(p.re(), DISPLAY_DIGITS),
                format_real(p.im(), DISPLAY_DIGITS)
            ));
        }
        out
    }
}

/// The n-th bracket n^(−s) − χ(s)·n^(s−1).
struct Terms {
    s: ComplexAP,
    reflected: ComplexAP,
    chi: ComplexAP,
}

impl Terms {
    fn new(s: &ComplexAP, ctx: &PrecisionContext) -> Result<Self, SpiralError> {
        if s.im().is_zero() {
            return Err(SpiralError::RealAxis);
        }
        let s = s.to_ctx(ctx);
        let reflected = &ctx.one() - &s;
        let chi = oracle::chi(&s, ctx)?;
        Ok(Self { s, reflected, chi })
    }

    fn term(&self, n: u64, ctx: &PrecisionContext) -> ComplexAP {
        if n == 1 {
            return &ctx.one() - &self.chi;
        }
        let ln_n = Float::with_val(ctx.bits(), n).ln();
        let direct = power_term_from_ln(&ln_n, &self.s, ctx);
        let mirrored = power_term_from_ln(&ln_n, &self.reflected, ctx);
        &direct - &(&self.chi * &mirrored)
    }
}

/// The k-th bracket of the functional-equation series, for checking traces.
pub fn functional_term(n: u64, s: &ComplexAP, ctx: &PrecisionContext) -> Result<ComplexAP, SpiralError> {
    Ok(Terms::new(s, ctx)?.term(n, ctx))
}

/// Partial sums with caller-supplied weights w(n).
pub fn partial_sums_weighted_by<F>(
    s: &ComplexAP,
    n_terms: u64,
    ctx: &PrecisionContext,
    weight: F,
) -> Result<Vec<ComplexAP>, SpiralError>
where
    F: Fn(u64) -> Float,
{
    if n_terms == 0 {
        return Err(SpiralError::NoTerms);
    }
    let terms = Terms::new(s, ctx)?;
    let mut acc = ctx.zero();
    let mut points = Vec::with_capacity(n_terms as usize);
    for n in 1..=n_terms {
        acc.add_scaled(&terms.term(n, ctx), &weight(n));
        points.push(acc.clone());
    }
    Ok(points)
}

pub fn raw_partial_sums(s: &ComplexAP, n_terms: u64, ctx: &PrecisionContext) -> Result<SpiralTrace, SpiralError> {
    let one = Float::with_val(ctx.bits(), 1);
    let points = partial_sums_weighted_by(s, n_terms, ctx, |_| one.clone())?;
    Ok(SpiralTrace {
        s: s.to_ctx(ctx),
        weighted: false,
        points,
        b_used: None,
    })
}

pub fn weighted_partial_sums(
    s: &ComplexAP,
    b: f64,
    n_terms: u64,
    ctx: &PrecisionContext,
) -> Result<SpiralTrace, SpiralError> {
    let weights = SigmoidWeights::new(s, b, ctx)?;
    let points = partial_sums_weighted_by(s, n_terms, ctx, |n| weights.weight(n))?;
    Ok(SpiralTrace {
        s: s.to_ctx(ctx),
        weighted: true,
        points,
        b_used: Some(b),
    })
}

/// |Σ δ_n n^(−s) − χ(s)·Σ δ_n n^(s−1)|, the modulus of the weighted trace's last point.
pub fn functional_residual(s: &ComplexAP, b: f64, n_terms: u64, ctx: &PrecisionContext) -> Result<f64, SpiralError> {
    Ok(weighted_partial_sums(s, b, n_terms, ctx)?.last().abs_f64())
}

/// 2·N(B) with the tail threshold 10^(−P): long enough to show the wind-down.
pub fn default_terms(s: &ComplexAP, b: f64, ctx: &PrecisionContext) -> Result<u64, SpiralError> {
    if s.im().is_zero() {
        return Err(SpiralError::RealAxis);
    }
    let ln_eps = -f64::from(ctx.digits()) * std::f64::consts::LN_10;
    if !(b > 0.0 && b.is_finite()) {
        return Err(SeriesError::NonPositiveScale(b).into());
    }
    Ok(2 * series::truncation_length_ln(s, b, ln_eps))
}
