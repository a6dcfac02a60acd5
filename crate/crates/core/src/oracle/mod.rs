//! Reference evaluators for ζ(s), Γ(s) and χ(s).
//!
//! ζ uses the Euler–Maclaurin expansion
//!
//! ```text
//! ζ(s) = Σ_{n<N₀} n^(−s) + N₀^(1−s)/(s−1) + ½N₀^(−s)
//!        + Σ_{k≥1} B_2k/(2k)! · s(s+1)…(s+2k−2) · N₀^(−s−2k+1)
//! ```
//!
//! with N₀ and the number of Bernoulli corrections chosen from the digit
//! budget and |Im s|. Γ uses the Stirling series after an upward shift, with
//! the reflection formula for Re s < ½.

pub mod bernoulli;

use rug::Float;
use serde::Serialize;
use thiserror::Error;

use crate::precision::{power_term_from_ln, ComplexAP, PrecisionContext, PrecisionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("zeta has a pole at s = 1")]
    Pole,
    #[error("gamma has a pole at the non-positive integer {0}")]
    GammaPole(i64),
    #[error("chi is degenerate at the real integer s = {0}")]
    ChiDegenerate(i64),
    #[error("cannot certify {digits} digits at s = {s}")]
    PrecisionUnreachable { digits: u32, s: String },
    #[error(transparent)]
    Precision(#[from] PrecisionError),
}

/// A ζ value together with the Euler–Maclaurin schedule that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(serialize_with = "serialize_complex")]
    pub value: ComplexAP,
    pub requested_digits: u32,
    /// Euler–Maclaurin cutoff N₀.
    pub terms_used: u64,
    /// Number of Bernoulli corrections applied.
    pub correction_order: usize,
}

fn serialize_complex<S: serde::Serializer>(z: &ComplexAP, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&z.to_decimal_string(40))
}

/// Number of N₀ doublings tried before giving up.
const MAX_SCHEDULE_ATTEMPTS: usize = 5;

/// Internal working precision for evaluations at `s`: the context precision
/// plus room for the size of |s| and the number of accumulated terms.
fn working_ctx(ctx: &PrecisionContext, s: &ComplexAP, extra_terms: u64) -> PrecisionContext {
    let size = s.abs().to_f64().max(1.0);
    let extra = 2.0 * size.log10() + (extra_terms.max(1) as f64).log10() + 6.0;
    PrecisionContext::with_guard(ctx.digits(), ctx.guard_digits() + extra.ceil() as u32)
        .expect("digits already validated")
}

fn is_real_integer(s: &ComplexAP) -> Option<i64> {
    if !s.im().is_zero() {
        return None;
    }
    if s.re().is_integer() {
        s.re().to_i32_saturating().map(i64::from)
    } else {
        None
    }
}

/// Default cutoff N₀ = max(⌈|t|/π⌉ + 10, ⌈1.3·P⌉).
pub fn default_cutoff(s: &ComplexAP, ctx: &PrecisionContext) -> u64 {
    let t = s.im().to_f64().abs();
    let by_height = (t / std::f64::consts::PI).ceil() as u64 + 10;
    let by_digits = (1.3 * f64::from(ctx.digits())).ceil() as u64;
    by_height.max(by_digits)
}

/// ζ(s) to the digit budget of `ctx`.
pub fn zeta(s: &ComplexAP, ctx: &PrecisionContext) -> Result<OracleResult, OracleError> {
    if s.im().is_zero() && *s.re() == 1 {
        return Err(OracleError::Pole);
    }
    let mut n0 = default_cutoff(s, ctx);
    for _ in 0..MAX_SCHEDULE_ATTEMPTS {
        let wctx = working_ctx(ctx, s, n0);
        let threshold = wctx.pow10(-(ctx.digits() as i32) - 5);
        if let Some((value, order)) = euler_maclaurin(s, n0, None, &threshold, &wctx)? {
            return Ok(OracleResult {
                value: value.to_ctx(ctx),
                requested_digits: ctx.digits(),
                terms_used: n0,
                correction_order: order,
            });
        }
        n0 *= 2;
    }
    Err(OracleError::PrecisionUnreachable {
        digits: ctx.digits(),
        s: s.to_decimal_string(12),
    })
}

/// ζ(s) with a fixed cutoff and a fixed number of Bernoulli corrections.
pub fn zeta_with_schedule(
    s: &ComplexAP,
    n0: u64,
    order: usize,
    ctx: &PrecisionContext,
) -> Result<ComplexAP, OracleError> {
    if s.im().is_zero() && *s.re() == 1 {
        return Err(OracleError::Pole);
    }
    let wctx = working_ctx(ctx, s, n0);
    let zero = wctx.real(0.0);
    let (value, _) =
        euler_maclaurin(s, n0, Some(order), &zero, &wctx)?.expect("fixed-order evaluation always completes");
    Ok(value.to_ctx(ctx))
}

/// Returns `None` when the correction series starts growing before reaching
/// `threshold` (the caller then enlarges N₀).
fn euler_maclaurin(
    s: &ComplexAP,
    n0: u64,
    fixed_order: Option<usize>,
    threshold: &Float,
    ctx: &PrecisionContext,
) -> Result<Option<(ComplexAP, usize)>, OracleError> {
    let bits = ctx.bits();
    let s = s.to_ctx(ctx);
    let mut sum = ctx.zero();
    for n in 1..n0 {
        if n == 1 {
            sum.add_assign_ref(&ctx.one());
        } else {
            let ln_n = Float::with_val(bits, n).ln();
            sum.add_assign_ref(&power_term_from_ln(&ln_n, &s, ctx));
        }
    }
    let n0f = Float::with_val(bits, n0);
    let ln_n0 = Float::with_val(bits, n0f.ln_ref());
    let x = power_term_from_ln(&ln_n0, &s, ctx); // N₀^(−s)

    // N₀^(1−s)/(s−1)
    let s_minus_1 = &s - &ctx.one();
    let tail = x.mul_real(&n0f).checked_div(&s_minus_1)?;
    sum.add_assign_ref(&tail);
    let half = Float::with_val(bits, 0.5);
    sum.add_scaled(&x, &half);

    // w_k = s(s+1)…(s+2k−2)·N₀^(−s−2k+1)
    let n0_sq = Float::with_val(bits, n0f.square_ref());
    let mut w = (&s * &x).div_real(&n0f)?;
    let mut fact = Float::with_val(bits, 2); // (2k)!
    let mut prev_mag: Option<Float> = None;
    let mut k = 1usize;
    loop {
        if let Some(order) = fixed_order {
            if k > order {
                return Ok(Some((sum, order)));
            }
        }
        let coeff = bernoulli::bernoulli_even(k, bits) / &fact;
        let term = w.mul_real(&coeff);
        if fixed_order.is_none() {
            let mag = term.abs();
            let scale = sum.abs().max(&Float::with_val(bits, 1));
            if mag < Float::with_val(bits, threshold * &scale) {
                return Ok(Some((sum, k - 1)));
            }
            if let Some(prev) = &prev_mag {
                if mag >= *prev {
                    return Ok(None);
                }
            }
            prev_mag = Some(mag);
        }
        sum.add_assign_ref(&term);
        // advance w and (2k)!
        let two_k = Float::with_val(bits, 2 * k as u64);
        let a = ComplexAP::new(Float::with_val(bits, s.re() + &two_k) - 1u32, s.im().clone());
        let b = ComplexAP::new(Float::with_val(bits, s.re() + &two_k), s.im().clone());
        w = (&(&w * &a) * &b).div_real(&n0_sq)?;
        fact *= (2 * k as u64 + 1) * (2 * k as u64 + 2);
        k += 1;
    }
}

/// Γ(s) to the digit budget of `ctx`.
pub fn gamma(s: &ComplexAP, ctx: &PrecisionContext) -> Result<ComplexAP, OracleError> {
    if let Some(n) = is_real_integer(s) {
        if n <= 0 {
            return Err(OracleError::GammaPole(n));
        }
    }
    let wctx = working_ctx(ctx, s, 1);
    let s_w = s.to_ctx(&wctx);
    let half = wctx.real(0.5);
    let value = if *s_w.re() < half {
        // Γ(s) = π / (sin(πs)·Γ(1−s))
        let pi = wctx.pi();
        let one_minus = &wctx.one() - &s_w;
        let g = gamma_shifted_stirling(&one_minus, &wctx)?;
        let sin = s_w.mul_real(&pi).sin()?;
        ComplexAP::from_real(pi).checked_div(&(&sin * &g))?
    } else {
        gamma_shifted_stirling(&s_w, &wctx)?
    };
    Ok(value.to_ctx(ctx))
}

/// ln Γ(w) by the Stirling series, valid for large |w| with Re w > 0.
fn ln_gamma_stirling(w: &ComplexAP, ctx: &PrecisionContext) -> Result<ComplexAP, OracleError> {
    let bits = ctx.bits();
    let ln_w = w.ln()?;
    let half = Float::with_val(bits, 0.5);
    let w_minus_half = ComplexAP::new(Float::with_val(bits, w.re() - &half), w.im().clone());
    let two_pi = Float::with_val(bits, ctx.pi() * 2u32);
    let mut acc = &(&w_minus_half * &ln_w) - w;
    acc = &acc + &ComplexAP::from_real(two_pi.ln() * &half);

    let inv_w = w.recip()?;
    let inv_w_sq = &inv_w * &inv_w;
    let mut pow = inv_w; // w^(−(2k−1))
    let threshold = ctx.pow10(-(ctx.digits() as i32) - 5);
    let mut prev: Option<Float> = None;
    for k in 1..=(4 * ctx.digits() as usize + 40) {
        let kk = k as u64;
        let denom = Float::with_val(bits, 2 * kk * (2 * kk - 1));
        let coeff = bernoulli::bernoulli_even(k, bits) / denom;
        let term = pow.mul_real(&coeff);
        let mag = term.abs();
        if mag < threshold {
            return Ok(acc);
        }
        if let Some(p) = &prev {
            if mag >= *p {
                break;
            }
        }
        prev = Some(mag);
        acc.add_assign_ref(&term);
        pow = &pow * &inv_w_sq;
    }
    Err(OracleError::PrecisionUnreachable {
        digits: ctx.digits(),
        s: w.to_decimal_string(12),
    })
}

/// Γ(s) = Γ(s+m)/(s(s+1)…(s+m−1)) with Γ(s+m) from Stirling.
fn gamma_shifted_stirling(s: &ComplexAP, ctx: &PrecisionContext) -> Result<ComplexAP, OracleError> {
    let radius = 0.5 * f64::from(ctx.digits() + ctx.guard_digits()) + 10.0;
    let mut shifted = s.clone();
    let mut product = ctx.one();
    let mut m = 0u32;
    while shifted.abs().to_f64() < radius {
        product = &product * &shifted;
        shifted = &shifted + &ctx.one();
        m += 1;
    }
    let lg = ln_gamma_stirling(&shifted, ctx)?;
    let g = lg.exp()?;
    if m == 0 {
        Ok(g)
    } else {
        Ok(g.checked_div(&product)?)
    }
}

/// χ(s) = 2^s·π^(s−1)·sin(πs/2)·Γ(1−s).
pub fn chi(s: &ComplexAP, ctx: &PrecisionContext) -> Result<ComplexAP, OracleError> {
    if let Some(n) = is_real_integer(s) {
        return Err(OracleError::ChiDegenerate(n));
    }
    let wctx = working_ctx(ctx, s, 1);
    let s_w = s.to_ctx(&wctx);
    let pi = wctx.pi();
    let two = wctx.real(2.0);
    let two_s = ComplexAP::real_base_pow(&two, &s_w)?;
    let s_minus_1 = &s_w - &wctx.one();
    let pi_pow = ComplexAP::real_base_pow(&pi, &s_minus_1)?;
    let half_pi = Float::with_val(wctx.bits(), &pi / 2u32);
    let sin = s_w.mul_real(&half_pi).sin()?;
    let g = gamma(&(&wctx.one() - &s_w), &wctx)?;
    let value = &(&(&two_s * &pi_pow) * &sin) * &g;
    Ok(value.to_ctx(ctx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    fn c(re: &str, im: &str, ctx: &PrecisionContext) -> ComplexAP {
        ComplexAP::new(ctx.parse_real(re).unwrap(), ctx.parse_real(im).unwrap())
    }

    fn close(a: &ComplexAP, b: &ComplexAP, tol: f64) -> bool {
        let d = (a - b).abs().to_f64();
        d <= tol * b.abs().to_f64().max(1.0)
    }

    #[test]
    fn zeta_two_is_pi_squared_over_six() {
        let p = ctx(60);
        let r = zeta(&c("2", "0", &p), &p).unwrap();
        let pi = p.pi();
        let want = ComplexAP::from_real(Float::with_val(p.bits(), pi.square_ref()) / 6u32);
        assert!(close(&r.value, &want, 1e-60));
        assert_eq!(r.requested_digits, 60);
        assert!(r.terms_used >= 78);
    }

    #[test]
    fn zeta_pole() {
        let p = ctx(20);
        assert_eq!(zeta(&c("1", "0", &p), &p), Err(OracleError::Pole));
    }

    #[test]
    fn zeta_conjugate_is_exact() {
        let p = ctx(40);
        let s = c("0.37", "91.5", &p);
        let a = zeta(&s, &p).unwrap().value;
        let b = zeta(&s.conj(), &p).unwrap().value;
        assert_eq!(a.conj(), b);
    }

    #[test]
    fn schedules_agree() {
        let p = ctx(50);
        let s = c("0.5", "40", &p);
        let r = zeta(&s, &p).unwrap();
        let again = zeta_with_schedule(&s, 2 * r.terms_used, r.correction_order + 2, &p).unwrap();
        assert!(close(&r.value, &again, 1e-50));
    }

    #[test]
    fn gamma_closed_forms() {
        let p = ctx(50);
        let g5 = gamma(&c("5", "0", &p), &p).unwrap();
        assert!(close(&g5, &c("24", "0", &p), 1e-50));
        let gh = gamma(&c("0.5", "0", &p), &p).unwrap();
        let sqrt_pi = ComplexAP::from_real(p.pi().sqrt());
        assert!(close(&gh, &sqrt_pi, 1e-50));
        assert_eq!(gamma(&c("-3", "0", &p), &p), Err(OracleError::GammaPole(-3)));
        assert_eq!(gamma(&c("0", "0", &p), &p), Err(OracleError::GammaPole(0)));
    }

    #[test]
    fn gamma_recurrence_across_reflection_boundary() {
        // Γ(z+1) = z·Γ(z) with z on the reflection side and z+1 on the Stirling side.
        let p = ctx(40);
        let z = c("0.2", "-3.5", &p);
        let lhs = gamma(&(&z + &p.one()), &p).unwrap();
        let rhs = &z * &gamma(&z, &p).unwrap();
        assert!(close(&lhs, &rhs, 1e-38));
    }

    #[test]
    fn chi_degenerate_points() {
        let p = ctx(20);
        assert_eq!(chi(&c("2", "0", &p), &p), Err(OracleError::ChiDegenerate(2)));
        assert_eq!(chi(&c("-4", "0", &p), &p), Err(OracleError::ChiDegenerate(-4)));
        assert!(chi(&c("0.5", "0", &p), &p).is_ok());
    }

    #[test]
    fn chi_modulus_on_critical_line() {
        let p = ctx(40);
        let x = chi(&c("0.5", "50", &p), &p).unwrap();
        assert!((x.abs().to_f64() - 1.0).abs() < 1e-38);
    }

    #[test]
    fn chi_involution() {
        let p = ctx(40);
        let s = c("0.3", "20", &p);
        let prod = &chi(&s, &p).unwrap() * &chi(&(&p.one() - &s), &p).unwrap();
        assert!(close(&prod, &p.one(), 1e-38));
    }
}
