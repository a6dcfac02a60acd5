//! Arbitrary-precision real and complex arithmetic.
//!
//! Reals are MPFR floats (round-to-nearest-even). A [`PrecisionContext`] maps a
//! decimal digit budget onto a binary precision; complex arithmetic in
//! [`ComplexAP`] is assembled from the real primitives (exp, ln, sin, cos,
//! atan2, hypot).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Constant;
use rug::Float;
use thiserror::Error;

/// log2(10), used to convert decimal digit budgets into bits.
const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Extra bits carried on top of the decimal budget.
const GUARD_BITS: u32 = 32;

/// Smallest accepted digit budget.
pub const MIN_DIGITS: u32 = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrecisionError {
    #[error("precision must be at least {MIN_DIGITS} decimal digits, got {0}")]
    TooFewDigits(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("non-finite result in {0}")]
    Overflow(&'static str),
    #[error("cannot parse number from {0:?}")]
    Parse(String),
}

/// Decimal digit budget for a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
    guard_digits: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self, PrecisionError> {
        Self::with_guard(digits, 0)
    }

    pub fn with_guard(digits: u32, guard_digits: u32) -> Result<Self, PrecisionError> {
        if digits < MIN_DIGITS {
            return Err(PrecisionError::TooFewDigits(digits));
        }
        Ok(Self { digits, guard_digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    /// Binary precision: ⌈(digits + guard_digits)·log2 10⌉ + 32.
    pub fn bits(&self) -> u32 {
        (f64::from(self.digits + self.guard_digits) * LOG2_10).ceil() as u32 + GUARD_BITS
    }

    /// Bits carrying exactly the nominal digit budget, without guard bits:
    /// ⌈digits·log2 10⌉.
    pub fn nominal_bits(&self) -> u32 {
        (f64::from(self.digits) * LOG2_10).ceil() as u32
    }

    /// Same guard digits, twice the digit budget.
    pub fn doubled(&self) -> Self {
        Self {
            digits: self.digits * 2,
            guard_digits: self.guard_digits,
        }
    }

    pub fn with_digits(&self, digits: u32) -> Result<Self, PrecisionError> {
        Self::with_guard(digits, self.guard_digits)
    }

    pub fn real(&self, v: f64) -> Float {
        Float::with_val(self.bits(), v)
    }

    pub fn real_from_int(&self, v: i64) -> Float {
        Float::with_val(self.bits(), v)
    }

    /// Parses a decimal string at this context's precision.
    pub fn parse_real(&self, text: &str) -> Result<Float, PrecisionError> {
        parse_float(text.trim(), self.bits())
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits(), Constant::Pi)
    }

    /// 10^exponent at working precision.
    pub fn pow10(&self, exponent: i32) -> Float {
        use rug::ops::Pow;
        let ten = Float::with_val(self.bits(), 10);
        ten.pow(exponent)
    }

    /// 10^(−digits), the nominal accuracy target.
    pub fn epsilon(&self) -> Float {
        self.pow10(-(self.digits as i32))
    }

    pub fn zero(&self) -> ComplexAP {
        ComplexAP::from_f64(0.0, 0.0, self)
    }

    pub fn one(&self) -> ComplexAP {
        ComplexAP::from_f64(1.0, 0.0, self)
    }
}

/// Exact decimal reading of an f64 through its shortest round-trip representation,
/// so `188.4955592_f64` becomes the decimal 188.4955592 rather than its binary neighbour.
pub fn real_from_f64_decimal(v: f64, bits: u32) -> Float {
    let text = format!("{v:e}");
    parse_float(&text, bits).expect("f64 Display output is a valid decimal")
}

fn parse_float(text: &str, bits: u32) -> Result<Float, PrecisionError> {
    Float::parse(text)
        .map(|p| Float::with_val(bits, p))
        .map_err(|_| PrecisionError::Parse(text.to_string()))
}

/// Formats a real in scientific notation with exactly `digits` significant digits,
/// e.g. `-1.4603545088e0`. The sign is emitted only for negative values.
pub fn format_real(x: &Float, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_zero() {
        let sign = if x.is_sign_negative() { "-" } else { "" };
        let mut out = String::from(sign);
        out.push('0');
        if digits > 1 {
            out.push('.');
            out.extend(std::iter::repeat_n('0', digits - 1));
        }
        out.push_str("e0");
        return out;
    }
    let (negative, mantissa, exp) = x.to_sign_string_exp(10, Some(digits));
    // value = 0.mantissa × 10^exp
    let exp10 = exp.unwrap_or(0) - 1;
    let mut out = String::with_capacity(digits + 8);
    if negative {
        out.push('-');
    }
    let mut chars = mantissa.chars();
    if let Some(first) = chars.next() {
        out.push(first);
    }
    let rest: String = chars.collect();
    if !rest.is_empty() {
        out.push('.');
        out.push_str(&rest);
    }
    out.push('e');
    out.push_str(&exp10.to_string());
    out
}

/// Arbitrary-precision complex number.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexAP {
    re: Float,
    im: Float,
}

impl ComplexAP {
    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn from_f64(re: f64, im: f64, ctx: &PrecisionContext) -> Self {
        Self {
            re: ctx.real(re),
            im: ctx.real(im),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::with_val(re.prec(), 0);
        Self { re, im }
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn into_parts(self) -> (Float, Float) {
        (self.re, self.im)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    /// Rounds (or extends) both components to `bits`.
    pub fn with_prec(&self, bits: u32) -> Self {
        Self {
            re: Float::with_val(bits, &self.re),
            im: Float::with_val(bits, &self.im),
        }
    }

    pub fn to_ctx(&self, ctx: &PrecisionContext) -> Self {
        self.with_prec(ctx.bits())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |z|² = re² + im².
    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let a = Float::with_val(p, self.re.square_ref());
        let b = Float::with_val(p, self.im.square_ref());
        a + b
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn mul_real(&self, k: &Float) -> Self {
        let p = self.prec().max(k.prec());
        Self {
            re: Float::with_val(p, &self.re * k),
            im: Float::with_val(p, &self.im * k),
        }
    }

    pub fn div_real(&self, k: &Float) -> Result<Self, PrecisionError> {
        if k.is_zero() {
            return Err(PrecisionError::DivisionByZero);
        }
        let p = self.prec().max(k.prec());
        Ok(Self {
            re: Float::with_val(p, &self.re / k),
            im: Float::with_val(p, &self.im / k),
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, PrecisionError> {
        if rhs.is_zero() {
            return Err(PrecisionError::DivisionByZero);
        }
        let p = self.prec().max(rhs.prec());
        let den = rhs.norm_sqr();
        // (a+bi)/(c+di) = ((ac+bd) + (bc−ad)i)/(c²+d²)
        let ac = Float::with_val(p, &self.re * &rhs.re);
        let bd = Float::with_val(p, &self.im * &rhs.im);
        let bc = Float::with_val(p, &self.im * &rhs.re);
        let ad = Float::with_val(p, &self.re * &rhs.im);
        let re = (ac + bd) / &den;
        let im = (bc - ad) / &den;
        let out = Self { re, im };
        if !out.is_finite() {
            return Err(PrecisionError::Overflow("div"));
        }
        Ok(out)
    }

    pub fn recip(&self) -> Result<Self, PrecisionError> {
        let one = Self::from_real(Float::with_val(self.prec(), 1));
        one.checked_div(self)
    }

    /// e^z = e^re (cos im + i sin im).
    pub fn exp(&self) -> Result<Self, PrecisionError> {
        let p = self.prec();
        let scale = Float::with_val(p, self.re.exp_ref());
        let (s, c) = sin_cos(&self.im);
        let out = Self {
            re: c * &scale,
            im: s * &scale,
        };
        if !out.is_finite() {
            return Err(PrecisionError::Overflow("exp"));
        }
        Ok(out)
    }

    /// Principal logarithm ln|z| + i·arg z.
    pub fn ln(&self) -> Result<Self, PrecisionError> {
        if self.is_zero() {
            return Err(PrecisionError::LogOfZero);
        }
        let re = self.abs().ln();
        Ok(Self { re, im: self.arg() })
    }

    /// sin z = sin x cosh y + i cos x sinh y.
    pub fn sin(&self) -> Result<Self, PrecisionError> {
        let p = self.prec();
        let (s, c) = sin_cos(&self.re);
        let ch = Float::with_val(p, self.im.cosh_ref());
        let sh = Float::with_val(p, self.im.sinh_ref());
        let out = Self { re: s * ch, im: c * sh };
        if !out.is_finite() {
            return Err(PrecisionError::Overflow("sin"));
        }
        Ok(out)
    }

    /// cos z = cos x cosh y − i sin x sinh y.
    pub fn cos(&self) -> Result<Self, PrecisionError> {
        let p = self.prec();
        let (s, c) = sin_cos(&self.re);
        let ch = Float::with_val(p, self.im.cosh_ref());
        let sh = Float::with_val(p, self.im.sinh_ref());
        let out = Self {
            re: c * ch,
            im: -(s * sh),
        };
        if !out.is_finite() {
            return Err(PrecisionError::Overflow("cos"));
        }
        Ok(out)
    }

    /// w^z for real base w > 0, as exp(z·ln w).
    pub fn real_base_pow(base: &Float, z: &Self) -> Result<Self, PrecisionError> {
        if base.is_zero() {
            return Err(PrecisionError::LogOfZero);
        }
        let p = z.prec().max(base.prec());
        let ln_base = Float::with_val(p, base.ln_ref());
        z.mul_real(&ln_base).exp()
    }

    /// Serializes as `re±im i` with exactly `digits` significant digits per component.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let re = format_real(&self.re, digits);
        let im = format_real(&self.im, digits);
        if let Some(stripped) = im.strip_prefix('-') {
            format!("{re}-{stripped}i")
        } else {
            format!("{re}+{im}i")
        }
    }

    /// Parses the `re±im i` grammar emitted by [`ComplexAP::to_decimal_string`].
    pub fn parse(text: &str, ctx: &PrecisionContext) -> Result<Self, PrecisionError> {
        let err = || PrecisionError::Parse(text.to_string());
        let body = text.trim().strip_suffix('i').ok_or_else(err)?;
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
            .ok_or_else(err)?;
        let re = parse_float(&body[..split], ctx.bits()).map_err(|_| err())?;
        let im_text = body[split..].strip_prefix('+').unwrap_or(&body[split..]);
        let im = parse_float(im_text, ctx.bits()).map_err(|_| err())?;
        Ok(Self { re, im })
    }
}

fn sin_cos(x: &Float) -> (Float, Float) {
    let p = x.prec();
    let s = Float::with_val(p, x.sin_ref());
    let c = Float::with_val(p, x.cos_ref());
    (s, c)
}

impl fmt::Display for ComplexAP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        f.write_str(&self.to_decimal_string(digits))
    }
}

impl Add for &ComplexAP {
    type Output = ComplexAP;
    fn add(self, rhs: &ComplexAP) -> ComplexAP {
        let p = self.prec().max(rhs.prec());
        ComplexAP {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }
}

impl Sub for &ComplexAP {
    type Output = ComplexAP;
    fn sub(self, rhs: &ComplexAP) -> ComplexAP {
        let p = self.prec().max(rhs.prec());
        ComplexAP {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }
}

impl Mul for &ComplexAP {
    type Output = ComplexAP;
    fn mul(self, rhs: &ComplexAP) -> ComplexAP {
        let p = self.prec().max(rhs.prec());
        let ac = Float::with_val(p, &self.re * &rhs.re);
        let bd = Float::with_val(p, &self.im * &rhs.im);
        let ad = Float::with_val(p, &self.re * &rhs.im);
        let bc = Float::with_val(p, &self.im * &rhs.re);
        ComplexAP {
            re: ac - bd,
            im: ad + bc,
        }
    }
}

impl Neg for &ComplexAP {
    type Output = ComplexAP;
    fn neg(self) -> ComplexAP {
        ComplexAP {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl Neg for ComplexAP {
    type Output = ComplexAP;
    fn neg(self) -> ComplexAP {
        ComplexAP {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl ComplexAP {
    /// self += rhs in place.
    pub fn add_assign_ref(&mut self, rhs: &ComplexAP) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }

    /// self −= a·b in place (fused multiply-subtract per component).
    pub fn sub_mul_assign(&mut self, a: &ComplexAP, b: &ComplexAP) {
        self.re -= &a.re * &b.re;
        self.re += &a.im * &b.im;
        self.im -= &a.re * &b.im;
        self.im -= &a.im * &b.re;
    }

    /// self += a·b in place.
    pub fn add_mul_assign(&mut self, a: &ComplexAP, b: &ComplexAP) {
        self.re += &a.re * &b.re;
        self.re -= &a.im * &b.im;
        self.im += &a.re * &b.im;
        self.im += &a.im * &b.re;
    }

    /// self += k·rhs in place for a real weight k.
    pub fn add_scaled(&mut self, rhs: &ComplexAP, k: &Float) {
        let p = self.prec();
        self.re += Float::with_val(p, &rhs.re * k);
        self.im += Float::with_val(p, &rhs.im * k);
    }
}

/// The Dirichlet term n^(−s) = exp(−s·ln n).
pub fn power_term(n: u64, s: &ComplexAP, ctx: &PrecisionContext) -> ComplexAP {
    assert!(n >= 1, "power_term requires n >= 1");
    let bits = ctx.bits();
    if n == 1 {
        return ctx.one();
    }
    let ln_n = Float::with_val(bits, n).ln();
    power_term_from_ln(&ln_n, s, ctx)
}

/// n^(−s) given a precomputed ln n.
pub fn power_term_from_ln(ln_n: &Float, s: &ComplexAP, ctx: &PrecisionContext) -> ComplexAP {
    let bits = ctx.bits();
    let s = s.with_prec(bits);
    let exponent = -s.mul_real(ln_n);
    // |Re(−s·ln n)| stays far inside the MPFR exponent range for any usable s.
    exponent.exp().expect("n^(-s) is finite for finite s")
}
