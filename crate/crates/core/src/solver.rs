//! Finite Dirichlet coefficients δ*_n.
//!
//! For a grid s_m = σ + i(t₁ + (m−1)Δt), m = 1..N, the coefficients solve
//!
//! ```text
//! Σ_{n=1}^{N} δ*_n · n^(−s_m) = ζ(s_m),   m = 1..N
//! ```
//!
//! The matrix is Vandermonde-like and badly conditioned, so the digit budget P
//! rather than the elimination strategy decides whether the profile of δ*_n
//! comes out clean.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{self, OracleError};
use crate::precision::{power_term_from_ln, real_from_f64_decimal, ComplexAP, PrecisionContext, PrecisionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("row {row}: |zeta(s_m)| = {modulus:e} is below the non-degeneracy threshold; perturb the grid")]
    NearZeroRow { row: usize, modulus: f64 },
    #[error("singular matrix: pivot modulus {pivot:e} in column {column}")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("residual {residual:e} still too large after the doubled-precision retry")]
    ResidualTooLarge { residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("real parts never cross 1/2")]
    NoCrossing,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Precision(#[from] PrecisionError),
}

/// Sampling grid for the linear system rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Shared real part σ of every s_m.
    pub sigma: f64,
    /// First ordinate t₁.
    pub t1: f64,
    /// Ordinate step Δt.
    pub dt: f64,
    /// Number of rows, equal to the number of unknown coefficients.
    pub n_rows: usize,
    /// Decimal digit budget P.
    pub digits: u32,
}

impl GridSpec {
    pub fn new(sigma: f64, t1: f64, dt: f64, n_rows: usize, digits: u32) -> Result<Self, SolveError> {
        let spec = Self {
            sigma,
            t1,
            dt,
            n_rows,
            digits,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.sigma.is_finite() && self.t1.is_finite() && self.dt.is_finite()) {
            return Err(SolveError::InvalidGrid("non-finite parameter".into()));
        }
        if self.dt <= 0.0 {
            return Err(SolveError::InvalidGrid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.t1 <= 0.0 {
            return Err(SolveError::InvalidGrid(format!("t1 must be positive, got {}", self.t1)));
        }
        if self.n_rows < 2 {
            return Err(SolveError::InvalidGrid(format!(
                "need at least 2 rows, got {}",
                self.n_rows
            )));
        }
        PrecisionContext::new(self.digits)?;
        Ok(())
    }

    pub fn context(&self) -> Result<PrecisionContext, SolveError> {
        Ok(PrecisionContext::new(self.digits)?)
    }

    /// Last ordinate t₁ + (N−1)Δt.
    pub fn last_ordinate(&self) -> f64 {
        self.t1 + (self.n_rows as f64 - 1.0) * self.dt
    }

    /// Mean ordinate t̂ = t₁ + (N−1)Δt/2.
    pub fn mean_ordinate(&self) -> f64 {
        self.t1 + (self.n_rows as f64 - 1.0) * self.dt / 2.0
    }

    /// n̂ = t̂/π, the index the half-crossing is compared against.
    pub fn mean_index(&self) -> f64 {
        self.mean_ordinate() / std::f64::consts::PI
    }

    /// Whether max(t_m)/π < N holds. Grids violating it are still solvable.
    pub fn respects_height_bound(&self) -> bool {
        self.last_ordinate() / std::f64::consts::PI < self.n_rows as f64
    }
}

/// s_m = σ + i(t₁ + (m−1)Δt) for m = 1..N, at the grid's precision.
pub fn build_grid(spec: &GridSpec) -> Vec<ComplexAP> {
    let bits = PrecisionContext::new(spec.digits.max(crate::precision::MIN_DIGITS))
        .expect("digit floor applied")
        .bits();
    let sigma = real_from_f64_decimal(spec.sigma, bits);
    let t1 = real_from_f64_decimal(spec.t1, bits);
    let dt = real_from_f64_decimal(spec.dt, bits);
    (0..spec.n_rows)
        .map(|m| {
            let t = Float::with_val(bits, &dt * m as u64) + &t1;
            ComplexAP::new(sigma.clone(), t)
        })
        .collect()
}

/// The square system A·δ = b.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<ComplexAP>>,
    pub rhs: Vec<ComplexAP>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    fn check_square(&self) -> Result<(), SolveError> {
        let n = self.rhs.len();
        if self.matrix.len() != n {
            return Err(SolveError::DimensionMismatch(format!(
                "{} rows against {} right-hand sides",
                self.matrix.len(),
                n
            )));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(SolveError::DimensionMismatch(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Ok(())
    }

    fn with_prec(&self, bits: u32) -> Self {
        Self {
            matrix: self
                .matrix
                .iter()
                .map(|r| r.iter().map(|z| z.with_prec(bits)).collect())
                .collect(),
            rhs: self.rhs.iter().map(|z| z.with_prec(bits)).collect(),
        }
    }
}

/// a_mn = n^(−s_m), b_m = ζ(s_m).
///
/// Entries are evaluated with guard bits and then rounded to the nominal
/// P-digit budget, so the system carries exactly the accuracy 10^(−P) it is
/// labelled with.
pub fn assemble_system(
    grid: &[ComplexAP],
    n_coeffs: usize,
    ctx: &PrecisionContext,
) -> Result<LinearSystem, SolveError> {
    let bits = ctx.bits();
    let ln: Vec<Float> = (1..=n_coeffs as u64).map(|n| Float::with_val(bits, n).ln()).collect();
    let threshold = ctx.pow10(-(ctx.digits() as i32) / 4);

    let rows: Vec<Result<(Vec<ComplexAP>, ComplexAP), SolveError>> = grid
        .par_iter()
        .enumerate()
        .map(|(m, s)| {
            let nominal = ctx.nominal_bits();
            let rhs = oracle::zeta(s, ctx)?.value.with_prec(nominal);
            if rhs.abs() < threshold {
                return Err(SolveError::NearZeroRow {
                    row: m + 1,
                    modulus: rhs.abs().to_f64(),
                });
            }
            let row = ln
                .iter()
                .enumerate()
                .map(|(idx, l)| {
                    if idx == 0 {
                        ctx.one().with_prec(nominal)
                    } else {
                        power_term_from_ln(l, s, ctx).with_prec(nominal)
                    }
                })
                .collect();
            Ok((row, rhs))
        })
        .collect();

    let mut matrix = Vec::with_capacity(grid.len());
    let mut rhs = Vec::with_capacity(grid.len());
    for r in rows {
        let (row, b) = r?;
        matrix.push(row);
        rhs.push(b);
    }
    Ok(LinearSystem { matrix, rhs })
}

/// Outcome of [`solve_system`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<ComplexAP>,
    /// ‖A·x − b‖∞ against the system as given.
    pub residual_inf: f64,
    /// Whether the doubled-precision retry was needed.
    pub retried: bool,
}

/// Gaussian elimination with partial pivoting by modulus.
///
/// A residual at or above 10^(−P/2) triggers one re-solve at 2P digits; the
/// result is rounded back to P digits.
pub fn solve_system(system: &LinearSystem, ctx: &PrecisionContext) -> Result<LinearSolution, SolveError> {
    system.check_square()?;
    let work = system.with_prec(ctx.bits());
    let limit = ctx.pow10(-(ctx.digits() as i32) / 2).to_f64();

    let x = eliminate(&work, ctx)?;
    let residual_inf = residual_norm(&work, &x, ctx);
    if residual_inf < limit {
        return Ok(LinearSolution {
            x,
            residual_inf,
            retried: false,
        });
    }

    let hi = ctx.doubled();
    let x_hi = eliminate(&system.with_prec(hi.bits()), &hi)?;
    let x: Vec<ComplexAP> = x_hi.iter().map(|z| z.to_ctx(ctx)).collect();
    let residual_inf = residual_norm(&work, &x, ctx);
    if residual_inf < limit {
        Ok(LinearSolution {
            x,
            residual_inf,
            retried: true,
        })
    } else {
        Err(SolveError::ResidualTooLarge { residual: residual_inf })
    }
}

fn eliminate(system: &LinearSystem, ctx: &PrecisionContext) -> Result<Vec<ComplexAP>, SolveError> {
    let n = system.dim();
    let mut a = system.matrix.clone();
    let mut b = system.rhs.clone();
    let tiny = ctx.pow10(-(ctx.digits() as i32) + 5);

    for k in 0..n {
        let (p, _) = (k..n)
            .map(|i| (i, a[i][k].norm_sqr()))
            .fold((k, Float::with_val(ctx.bits(), -1)), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        let pivot_mod = a[p][k].abs();
        if pivot_mod < tiny {
            return Err(SolveError::SingularMatrix {
                column: k + 1,
                pivot: pivot_mod.to_f64(),
            });
        }
        a.swap(k, p);
        b.swap(k, p);

        let inv = a[k][k].recip()?;
        let (upper, lower) = a.split_at_mut(k + 1);
        let pivot_row = &upper[k];
        let (b_upper, b_lower) = b.split_at_mut(k + 1);
        let b_k = &b_upper[k];
        for (row, bi) in lower.iter_mut().zip(b_lower.iter_mut()) {
            if row[k].is_zero() {
                continue;
            }
            let factor = &row[k] * &inv;
            for j in (k + 1)..n {
                row[j].sub_mul_assign(&factor, &pivot_row[j]);
            }
            bi.sub_mul_assign(&factor, b_k);
            row[k] = ctx.zero();
        }
    }

    let mut x = vec![ctx.zero(); n];
    for k in (0..n).rev() {
        let mut acc = b[k].clone();
        for j in (k + 1)..n {
            acc.sub_mul_assign(&a[k][j], &x[j]);
        }
        x[k] = acc.checked_div(&a[k][k])?;
    }
    Ok(x)
}

fn residual_norm(system: &LinearSystem, x: &[ComplexAP], ctx: &PrecisionContext) -> f64 {
    system
        .matrix
        .iter()
        .zip(&system.rhs)
        .map(|(row, b)| {
            let mut r = -b.to_ctx(ctx);
            for (a, xi) in row.iter().zip(x) {
                r.add_mul_assign(a, xi);
            }
            r.abs().to_f64()
        })
        .fold(0.0, f64::max)
}

/// The solved coefficients δ*_n with their diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub grid: GridSpec,
    pub deltas: Vec<ComplexAP>,
    pub residual_inf: f64,
    pub im_stability: f64,
    pub retried: bool,
}

impl CoefficientSet {
    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.deltas.iter().map(|d| d.re().to_f64()).collect()
    }

    /// |Σ Im δ*_n| < eps.
    pub fn is_stable(&self, eps: f64) -> bool {
        self.im_stability < eps
    }
}

/// Builds the grid, assembles and solves the system for `spec`.
pub fn compute_coefficients(spec: &GridSpec) -> Result<CoefficientSet, SolveError> {
    spec.validate()?;
    let ctx = spec.context()?;
    let grid = build_grid(spec);
    let system = assemble_system(&grid, spec.n_rows, &ctx)?;
    let solution = solve_system(&system, &ctx)?;
    let im_stability = stability_metric(&solution.x);
    Ok(CoefficientSet {
        grid: *spec,
        deltas: solution.x,
        residual_inf: solution.residual_inf,
        im_stability,
        retried: solution.retried,
    })
}

/// Default threshold for [`CoefficientSet::is_stable`].
pub const STABILITY_EPS: f64 = 1e-6;

/// |Σ_n Im δ*_n|.
pub fn stability_metric(deltas: &[ComplexAP]) -> f64 {
    let bits = deltas.first().map_or(64, ComplexAP::prec);
    let sum = deltas.iter().fold(Float::with_val(bits, 0), |acc, d| acc + d.im());
    sum.abs().to_f64()
}

/// Interpolated index where Re δ*_n first passes downward through 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfCrossing {
    /// n̂*, 1-based.
    pub n_hat_star: f64,
    /// Index a with Re δ*_a ≥ 1/2 > Re δ*_(a+1).
    pub lower_index: usize,
    /// Sign changes of Re δ*_n − 1/2 along the whole profile.
    pub sign_changes: usize,
    /// Warning flag: more than one sign change.
    pub multiple_crossings: bool,
}

/// Half-crossing of a real profile given 1-based as `values[n−1]`.
pub fn half_crossing_of(values: &[f64]) -> Result<HalfCrossing, SolveError> {
    let first = values
        .windows(2)
        .position(|w| w[0] >= 0.5 && w[1] < 0.5)
        .ok_or(SolveError::NoCrossing)?;
    let (da, db) = (values[first], values[first + 1]);
    let a = first + 1;
    let n_hat_star = a as f64 + (da - 0.5) / (da - db);

    let mut sign_changes = 0;
    let mut last: Option<bool> = None;
    for v in values {
        let d = v - 0.5;
        if d == 0.0 {
            continue;
        }
        let positive = d > 0.0;
        if let Some(prev) = last {
            if prev != positive {
                sign_changes += 1;
            }
        }
        last = Some(positive);
    }
    Ok(HalfCrossing {
        n_hat_star,
        lower_index: a,
        sign_changes,
        multiple_crossings: sign_changes > 1,
    })
}

pub fn half_crossing(cs: &CoefficientSet) -> Result<HalfCrossing, SolveError> {
    half_crossing_of(&cs.real_parts())
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // grid constants are fixed decimals, not π fractions
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn grid_endpoints_from_decimal_parameters() {
        let spec = GridSpec::new(0.5, 188.4955592, 0.628318531, 100, 30).unwrap();
        let g = build_grid(&spec);
        assert_eq!(g.len(), 100);
        let c = ctx(30);
        let first = c.parse_real("188.4955592").unwrap();
        let last = c.parse_real("250.699093769").unwrap();
        assert_eq!(*g[0].im(), first);
        assert!((Float::with_val(c.bits(), g[99].im() - &last)).abs().to_f64() < 1e-30);
        assert_eq!(g[0].re().to_f64(), 0.5);

        let left = GridSpec::new(0.5, 157.0796327, 0.785398163, 100, 30).unwrap();
        let last = build_grid(&left)[99].im().to_f64();
        assert!((last - 234.834050837).abs() < 1e-9);
    }

    #[test]
    fn single_point_grid() {
        let spec = GridSpec {
            sigma: 0.5,
            t1: 3.0,
            dt: 1.0,
            n_rows: 1,
            digits: 20,
        };
        let g = build_grid(&spec);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].im().to_f64(), 3.0);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.5, 10.0, 0.0, 4, 20).is_err());
        assert!(GridSpec::new(0.5, -1.0, 1.0, 4, 20).is_err());
        assert!(GridSpec::new(0.5, 10.0, 1.0, 1, 20).is_err());
        assert!(GridSpec::new(0.5, 10.0, 1.0, 4, 10).is_err());
        let spec = GridSpec::new(0.5, 188.4955592, 0.628318531, 100, 100).unwrap();
        assert!(spec.respects_height_bound());
        let tall = GridSpec::new(0.5, 400.0, 1.0, 100, 30).unwrap();
        assert!(!tall.respects_height_bound());
    }

    #[test]
    fn two_by_two_structure() {
        let c = ctx(30);
        let grid = vec![ComplexAP::from_f64(0.5, 10.0, &c), ComplexAP::from_f64(0.5, 11.0, &c)];
        let sys = assemble_system(&grid, 2, &c).unwrap();
        assert_eq!(sys.matrix[0][0], c.one());
        assert_eq!(sys.matrix[1][0], c.one());
        // entries are rounded to the nominal 30 digits
        let close = |a: &ComplexAP, b: &ComplexAP| (a - b).abs().to_f64() < 1e-29;
        assert!(close(&sys.matrix[0][1], &crate::power_term(2, &grid[0], &c)));
        assert!(close(&sys.rhs[1], &crate::oracle::zeta(&grid[1], &c).unwrap().value));
    }

    #[test]
    fn identity_system_returns_rhs() {
        let c = ctx(25);
        let n = 4;
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { c.one() } else { c.zero() }).collect())
            .collect();
        let rhs: Vec<ComplexAP> = (0..n)
            .map(|i| ComplexAP::from_f64(i as f64, -(i as f64) / 3.0, &c))
            .collect();
        let sol = solve_system(
            &LinearSystem {
                matrix,
                rhs: rhs.clone(),
            },
            &c,
        )
        .unwrap();
        assert_eq!(sol.x, rhs);
        assert_eq!(sol.residual_inf, 0.0);
        assert!(!sol.retried);
    }

    #[test]
    fn singular_and_mismatched_systems() {
        let c = ctx(20);
        let matrix = vec![vec![c.one(), c.one()], vec![c.one(), c.one()]];
        let rhs = vec![c.one(), c.zero()];
        assert!(matches!(
            solve_system(&LinearSystem { matrix, rhs }, &c),
            Err(SolveError::SingularMatrix { column: 2, .. })
        ));
        let bad = LinearSystem {
            matrix: vec![vec![c.one()]],
            rhs: vec![c.one(), c.one()],
        };
        assert!(matches!(solve_system(&bad, &c), Err(SolveError::DimensionMismatch(_))));
    }

    #[test]
    fn crossing_examples() {
        let h = half_crossing_of(&[1.0, 0.75, 0.25, 0.0]).unwrap();
        assert_eq!(h.n_hat_star, 2.5);
        assert_eq!(h.lower_index, 2);
        assert!(!h.multiple_crossings);
        for eps in [1e-2, 1e-6, 1e-12] {
            let h = half_crossing_of(&[1.0, 0.5 + eps, 0.5 - eps, 0.0]).unwrap();
            assert!((h.n_hat_star - 2.5).abs() < 1e-9);
        }
        assert_eq!(half_crossing_of(&[0.0, 0.2, 0.6, 0.9]), Err(SolveError::NoCrossing));
        let noisy = half_crossing_of(&[1.0, 0.3, 0.8, 0.1]).unwrap();
        assert_eq!(noisy.lower_index, 1);
        assert_eq!(noisy.sign_changes, 3);
        assert!(noisy.multiple_crossings);
        // exact 1/2 at an integer index
        let h = half_crossing_of(&[1.0, 0.9, 0.5, 0.1]).unwrap();
        assert_eq!(h.n_hat_star, 3.0);
    }

    #[test]
    fn stability_of_real_profile_is_zero() {
        let c = ctx(20);
        let d: Vec<ComplexAP> = (0..5).map(|i| ComplexAP::from_f64(i as f64, 0.0, &c)).collect();
        assert_eq!(stability_metric(&d), 0.0);
        let d = vec![ComplexAP::from_f64(1.0, 0.25, &c), ComplexAP::from_f64(1.0, -1.0, &c)];
        assert_eq!(stability_metric(&d), 0.75);
    }
}
