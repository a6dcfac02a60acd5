use rayon::prelude::*;
use rug::Float;

use super::{truncation_length_ln, DirichletTerms, SeriesError, SigmoidWeights};
use crate::oracle;
use crate::precision::{ComplexAP, PrecisionContext};

/// Default scan interval for B.
pub const DEFAULT_BRACKET: (f64, f64) = (0.1, 100.0);

/// Knobs for [`calibrate_b`]; the defaults are what the CLI uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub bracket: (f64, f64),
    /// Log-spaced samples in the coarse scan.
    pub coarse_samples: usize,
    /// Golden-section stop: bracket width relative to its midpoint.
    pub rel_tol: f64,
    /// How many times the digit budget may be doubled when the achieved error
    /// reaches the precision floor.
    pub max_escalations: u32,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            bracket: DEFAULT_BRACKET,
            coarse_samples: 64,
            rel_tol: 1e-6,
            max_escalations: 3,
        }
    }
}

/// Calibrated scale factor B̂(s).
#[derive(Debug, Clone, PartialEq)]
pub struct BCalibration {
    pub s: ComplexAP,
    pub b_hat: f64,
    /// |ζ(s) − Σ δ_n(s) n^(−s)| at B̂.
    pub err_at_opt: f64,
    /// log10(1/err_at_opt).
    pub digits_gained: f64,
    /// Every evaluated (B, err) pair, sorted by B.
    pub trace: Vec<(f64, f64)>,
    /// The coarse log-spaced scan alone, sorted by B.
    pub scan: Vec<(f64, f64)>,
    /// Truncation length used at B̂.
    pub terms: u64,
    /// Digit budget the final calibration ran at.
    pub digits: u32,
}

/// Minimizes err(B) = |ζ(s) − Σ_{n≤N(B)} δ_n(s) n^(−s)| over `bracket`.
pub fn calibrate_b(s: &ComplexAP, ctx: &PrecisionContext, bracket: (f64, f64)) -> Result<BCalibration, SeriesError> {
    calibrate_with(
        s,
        ctx,
        &CalibrationOptions {
            bracket,
            ..CalibrationOptions::default()
        },
    )
}

pub fn calibrate_with(
    s: &ComplexAP,
    ctx: &PrecisionContext,
    opts: &CalibrationOptions,
) -> Result<BCalibration, SeriesError> {
    let (lo, hi) = opts.bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(SeriesError::InvalidBracket { lo, hi });
    }
    if s.im().is_zero() {
        return Err(SeriesError::RealAxis);
    }
    let mut ctx = *ctx;
    let mut escalations = 0;
    loop {
        let cal = calibrate_once(s, &ctx, opts)?;
        // The error sits at the precision floor: B̂ is not resolved there.
        let floor_hit = cal.digits_gained > f64::from(ctx.digits()) - 5.0;
        if floor_hit && escalations < opts.max_escalations {
            ctx = ctx.doubled();
            escalations += 1;
            continue;
        }
        return Ok(cal);
    }
}

fn calibrate_once(
    s: &ComplexAP,
    ctx: &PrecisionContext,
    opts: &CalibrationOptions,
) -> Result<BCalibration, SeriesError> {
    let (lo, hi) = opts.bracket;
    let zeta = oracle::zeta(s, ctx)?.value;
    let ln_eps = -f64::from(ctx.digits()) * std::f64::consts::LN_10;
    let n_max = truncation_length_ln(s, hi, ln_eps);
    let cache = DirichletTerms::new(s, n_max, ctx);

    let err = |b: f64| -> Result<(f64, u64), SeriesError> {
        let weights = SigmoidWeights::new(s, b, ctx)?;
        let n = truncation_length_ln(s, b, ln_eps);
        let sum = cache.weighted_sum(&weights, n, ctx);
        Ok(((&zeta - &sum).abs().to_f64(), n))
    };

    let samples = opts.coarse_samples.max(3);
    let ratio = (hi / lo).ln();
    let mut scan = Vec::with_capacity(samples);
    for k in 0..samples {
        let b = if k + 1 == samples {
            hi
        } else {
            lo * (ratio * k as f64 / (samples - 1) as f64).exp()
        };
        scan.push((b, err(b)?.0));
    }
    let best = argmin(&scan);
    if best == 0 || best + 1 == samples {
        return Err(SeriesError::NoInteriorMinimum {
            best_b: scan[best].0,
            edge: if best == 0 { "lower" } else { "upper" },
        });
    }

    let mut trace = scan.clone();
    let (mut a, mut b) = (scan[best - 1].0, scan[best + 1].0);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = err(c)?.0;
    let mut fd = err(d)?.0;
    trace.push((c, fc));
    trace.push((d, fd));
    while (b - a) > opts.rel_tol * 0.5 * (a + b) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = err(c)?.0;
            trace.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = err(d)?.0;
            trace.push((d, fd));
        }
    }

    trace.sort_by(|x, y| x.0.total_cmp(&y.0));
    let opt = argmin(&trace);
    let (b_hat, err_at_opt) = trace[opt];
    let terms = truncation_length_ln(s, b_hat, ln_eps);
    let digits_gained = if err_at_opt > 0.0 {
        -err_at_opt.log10()
    } else {
        f64::from(ctx.digits())
    };
    Ok(BCalibration {
        s: s.clone(),
        b_hat,
        err_at_opt,
        digits_gained,
        trace,
        scan,
        terms,
        digits: ctx.digits(),
    })
}

fn argmin(points: &[(f64, f64)]) -> usize {
    points
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if p.1 < points[best].1 { i } else { best })
}

/// Calibrates σ + it for every t; failures are reported per point, in input order.
pub fn accuracy_profile(
    sigma: f64,
    t_values: &[f64],
    ctx: &PrecisionContext,
    opts: &CalibrationOptions,
) -> Result<Vec<Result<BCalibration, SeriesError>>, SeriesError> {
    let increasing = t_values.windows(2).all(|w| w[1] > w[0]);
    if !increasing || t_values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(SeriesError::InvalidOrdinates);
    }
    let bits = ctx.bits();
    Ok(t_values
        .par_iter()
        .map(|t| {
            let s = ComplexAP::new(
                crate::precision::real_from_f64_decimal(sigma, bits),
                crate::precision::real_from_f64_decimal(*t, bits),
            );
            calibrate_with(&s, ctx, opts)
        })
        .collect())
}

impl BCalibration {
    /// Coarse-scan samples are non-increasing up to the minimum and
    /// non-decreasing after it.
    pub fn scan_is_unimodal(&self) -> bool {
        let k = argmin(&self.scan);
        self.scan[..=k].windows(2).all(|w| w[1].1 <= w[0].1) && self.scan[k..].windows(2).all(|w| w[1].1 >= w[0].1)
    }

    /// Imaginary part of s as f64.
    pub fn t(&self) -> f64 {
        self.s.im().to_f64()
    }

    pub fn sigma(&self) -> f64 {
        self.s.re().to_f64()
    }

    /// Error at an arbitrary B, re-evaluated at the calibration's precision.
    pub fn error_at(&self, b: f64) -> Result<f64, SeriesError> {
        let ctx = PrecisionContext::new(self.digits)?;
        let zeta = oracle::zeta(&self.s, &ctx)?.value;
        let ln_eps = -f64::from(self.digits) * std::f64::consts::LN_10;
        let n = truncation_length_ln(&self.s, b, ln_eps);
        let sum = super::weighted_zeta(&self.s, b, n, &ctx)?;
        let diff = &zeta - &sum;
        Ok(Float::with_val(ctx.bits(), diff.abs()).to_f64())
    }
}
