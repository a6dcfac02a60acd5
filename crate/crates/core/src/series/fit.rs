//! Least-squares fits for the scaling laws of B̂(s).

use serde::Serialize;

use super::SeriesError;

/// B̂(σ + it) ≈ C(σ)·t^D(σ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub sigma: f64,
    pub c_coef: f64,
    pub d_exp: f64,
    pub r_squared: f64,
    pub samples: Vec<(f64, f64)>,
}

/// v(σ) ≈ exp(p + q·σ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentialFit {
    /// Intercept p of ln v.
    pub p: f64,
    /// Rate q.
    pub q: f64,
    pub r_squared: f64,
    pub samples: Vec<(f64, f64)>,
}

impl ExponentialFit {
    pub fn amplitude(&self) -> f64 {
        self.p.exp()
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        (self.p + self.q * sigma).exp()
    }
}

/// Ordinary least squares y = a + b·x; returns (a, b, r²).
fn ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64), SeriesError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(SeriesError::DegenerateFit);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok((intercept, slope, r2))
}

fn log_values(samples: &[(f64, f64)], log_x: bool) -> Result<(Vec<f64>, Vec<f64>), SeriesError> {
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for (index, &(x, value)) in samples.iter().enumerate() {
        let bad_x = log_x && x <= 0.0;
        if value <= 0.0 || bad_x || !value.is_finite() || !x.is_finite() {
            return Err(SeriesError::NonPositiveValue { index, x, value });
        }
        xs.push(if log_x { x.ln() } else { x });
        ys.push(value.ln());
    }
    Ok((xs, ys))
}

/// ln B̂ = ln C + D·ln t by ordinary least squares.
pub fn fit_power_law(sigma: f64, samples: &[(f64, f64)]) -> Result<ScalingFit, SeriesError> {
    if samples.len() < 2 {
        return Err(SeriesError::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let (xs, ys) = log_values(samples, true)?;
    let (intercept, slope, r_squared) = ols(&xs, &ys)?;
    Ok(ScalingFit {
        sigma,
        c_coef: intercept.exp(),
        d_exp: slope,
        r_squared,
        samples: samples.to_vec(),
    })
}

/// ln v = p + q·σ by ordinary least squares.
pub fn fit_sigma_dependence(samples: &[(f64, f64)]) -> Result<ExponentialFit, SeriesError> {
    if samples.len() < 2 {
        return Err(SeriesError::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let (xs, ys) = log_values(samples, false)?;
    let (p, q, r_squared) = ols(&xs, &ys)?;
    Ok(ExponentialFit {
        p,
        q,
        r_squared,
        samples: samples.to_vec(),
    })
}
