//! Computation pipelines that turn parameters into named output files.
//!
//! Nothing here touches the filesystem; [`super::write_run`] persists an
//! [`Outcome`] and its manifest.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::output::{num, CsvTable, Plot, Series};
use super::ExperimentError;
use crate::precision::{format_real, ComplexAP, PrecisionContext};
use crate::series::{self, accuracy_profile, calibrate_with, BCalibration, CalibrationOptions};
use crate::sigmoid::{self, construct_fit_from};
use crate::solver::{self, compute_coefficients, half_crossing, CoefficientSet, GridSpec, STABILITY_EPS};
use crate::spiral;

/// Significant digits written for coefficient values.
pub const COEFF_DIGITS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            bytes,
        }
    }

    pub fn text(&self) -> &str {
        std::str::from_utf8(&self.bytes).expect("artifacts are UTF-8")
    }
}

/// Files produced by a pipeline plus a JSON summary for the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
}

impl Outcome {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s.into_bytes()
}

fn jsonl_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string(v).expect("JSON values serialize");
    s.push('\n');
    s.into_bytes()
}

fn point(sigma: f64, t: f64, ctx: &PrecisionContext) -> ComplexAP {
    let bits = ctx.bits();
    ComplexAP::new(
        crate::precision::real_from_f64_decimal(sigma, bits),
        crate::precision::real_from_f64_decimal(t, bits),
    )
}

/// Diagnostics record written next to every coefficient CSV.
pub fn coefficient_diagnostics(cs: &CoefficientSet) -> Value {
    let crossing = half_crossing(cs).ok();
    json!({
        "sigma": cs.grid.sigma,
        "t1": cs.grid.t1,
        "dt": cs.grid.dt,
        "n": cs.grid.n_rows,
        "digits": cs.grid.digits,
        "residual_inf": cs.residual_inf,
        "im_stability": cs.im_stability,
        "stable": cs.is_stable(STABILITY_EPS),
        "retried": cs.retried,
        "n_hat_star": crossing.as_ref().map(|c| c.n_hat_star),
        "sign_changes": crossing.as_ref().map_or(0, |c| c.sign_changes),
        "n_hat_mean": cs.grid.mean_index(),
    })
}

pub fn coefficients_csv(deltas: &[ComplexAP]) -> CsvTable {
    let mut table = CsvTable::new(&["n", "re_delta", "im_delta"]);
    for (i, d) in deltas.iter().enumerate() {
        table.row(&[
            (i + 1).to_string(),
            format_real(d.re(), COEFF_DIGITS),
            format_real(d.im(), COEFF_DIGITS),
        ]);
    }
    table
}

/// Solves the grid; writes `coeffs.csv`, `diagnostics.jsonl` and `coeffs.svg`.
pub fn coefficients(grid: &GridSpec) -> Result<(CoefficientSet, Outcome), ExperimentError> {
    let cs = compute_coefficients(grid)?;
    let diag = coefficient_diagnostics(&cs);
    let re: Vec<(f64, f64)> = cs
        .real_parts()
        .iter()
        .enumerate()
        .map(|(i, v)| ((i + 1) as f64, *v))
        .collect();
    let im: Vec<(f64, f64)> = cs
        .deltas
        .iter()
        .enumerate()
        .map(|(i, d)| ((i + 1) as f64, d.im().to_f64()))
        .collect();
    let title = format!(
        "delta*_n: t1 = {}, dt = {}, N = {}, P = {}",
        grid.t1, grid.dt, grid.n_rows, grid.digits
    );
    let plot = Plot::new(&title, "n", "delta*_n")
        .with(Series::line("Re", re))
        .with(Series::line("Im", im));
    let outcome = Outcome {
        artifacts: vec![
            Artifact::new("coeffs.csv", coefficients_csv(&cs.deltas).into_bytes()),
            Artifact::new("diagnostics.jsonl", jsonl_bytes(&diag)),
            Artifact::new("coeffs.svg", plot.to_svg().into_bytes()),
        ],
        summary: diag,
    };
    Ok((cs, outcome))
}

/// Reads an `n,re_delta,im_delta` table (the imaginary column is optional).
pub fn read_coefficients_csv(text: &str) -> Result<Vec<ComplexAP>, ExperimentError> {
    let ctx = PrecisionContext::new(COEFF_DIGITS as u32)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| ExperimentError::Input("coefficient CSV is empty".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (Some(n_col), Some(re_col)) = (col("n"), col("re_delta")) else {
        return Err(ExperimentError::Input(
            "coefficient CSV needs columns n and re_delta".into(),
        ));
    };
    let im_col = col("im_delta");
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != header.len() {
            return Err(ExperimentError::Input(format!(
                "row {}: expected {} cells",
                row + 1,
                header.len()
            )));
        }
        let n: usize = cells[n_col]
            .parse()
            .map_err(|_| ExperimentError::Input(format!("row {}: bad index {:?}", row + 1, cells[n_col])))?;
        if n != row + 1 {
            return Err(ExperimentError::Input(format!(
                "row {}: indices must run 1, 2, 3, ...",
                row + 1
            )));
        }
        let parse = |s: &str| {
            ctx.parse_real(s)
                .map_err(|_| ExperimentError::Input(format!("row {}: bad number {s:?}", row + 1)))
        };
        let re = parse(cells[re_col])?;
        let im = match im_col {
            Some(c) => parse(cells[c])?,
            None => ctx.real(0.0),
        };
        out.push(ComplexAP::new(re, im));
    }
    if out.is_empty() {
        return Err(ExperimentError::Input("coefficient CSV has no rows".into()));
    }
    Ok(out)
}

/// Sigmoid fit; writes `sigmoid.csv`, `fit.json` and `sigmoid.svg`.
pub fn sigmoid_fit(deltas: &[ComplexAP], grid: Option<GridSpec>) -> Result<Outcome, ExperimentError> {
    let fit = construct_fit_from(deltas, grid)?;
    let mut table = CsvTable::new(&["n", "re_delta", "sigmoid_value"]);
    let mut data = Vec::with_capacity(deltas.len());
    let mut model = Vec::with_capacity(deltas.len());
    for (i, d) in deltas.iter().enumerate() {
        let n = (i + 1) as f64;
        let v = fit.eval(n);
        table.row(&[(i + 1).to_string(), format_real(d.re(), COEFF_DIGITS), num(v)]);
        data.push((n, d.re().to_f64()));
        model.push((n, v));
    }
    let summary = json!({
        "A": fit.a_param,
        "B": fit.b_param,
        "residual": fit.residual,
        "n": deltas.len(),
        "n_hat_mean": grid.map(|g| g.mean_index()),
    });
    let plot = Plot::new(
        &format!("sigmoid fit: A = {:.4}, B = {:.4}", fit.a_param, fit.b_param),
        "n",
        "value",
    )
    .with(Series::markers("Re delta*_n", data))
    .with(Series::line("sigmoid", model));
    Ok(Outcome {
        artifacts: vec![
            Artifact::new("sigmoid.csv", table.into_bytes()),
            Artifact::new("fit.json", json_bytes(&summary)),
            Artifact::new("sigmoid.svg", plot.to_svg().into_bytes()),
        ],
        summary,
    })
}

pub fn calibration_json(cal: &BCalibration) -> Value {
    json!({
        "sigma": cal.sigma(),
        "t": cal.t(),
        "b_hat": cal.b_hat,
        "err_at_opt": cal.err_at_opt,
        "digits_gained": cal.digits_gained,
        "terms": cal.terms,
        "digits": cal.digits,
        "unimodal_scan": cal.scan_is_unimodal(),
        "evaluations": cal.trace.len(),
    })
}

/// Calibrates B at σ + it; writes `calibration.json`, `trace.csv` and `eps_vs_b.svg`.
pub fn calibration(
    sigma: f64,
    t: f64,
    ctx: &PrecisionContext,
    opts: &CalibrationOptions,
) -> Result<Outcome, ExperimentError> {
    let s = point(sigma, t, ctx);
    let cal = calibrate_with(&s, ctx, opts)?;
    let mut table = CsvTable::new(&["B", "err"]);
    for (b, e) in &cal.trace {
        table.row(&[num(*b), num(*e)]);
    }
    let curve: Vec<(f64, f64)> = cal.scan.iter().map(|(b, e)| (b.log10(), e.log10())).collect();
    let plot = Plot::new(
        &format!("err(B) at s = {sigma} + {t}i, B = {:.6}", cal.b_hat),
        "log10 B",
        "log10 err",
    )
    .with(Series::line("err", curve))
    .with(Series::markers(
        "optimum",
        vec![(cal.b_hat.log10(), cal.err_at_opt.log10())],
    ));
    let summary = calibration_json(&cal);
    Ok(Outcome {
        artifacts: vec![
            Artifact::new("calibration.json", json_bytes(&summary)),
            Artifact::new("trace.csv", table.into_bytes()),
            Artifact::new("eps_vs_b.svg", plot.to_svg().into_bytes()),
        ],
        summary,
    })
}

fn split_profile(
    t_values: &[f64],
    results: Vec<Result<BCalibration, series::SeriesError>>,
) -> (Vec<BCalibration>, Vec<Value>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (t, r) in t_values.iter().zip(results) {
        match r {
            Ok(cal) => ok.push(cal),
            Err(e) => failed.push(json!({ "t": t, "error": e.to_string() })),
        }
    }
    (ok, failed)
}

/// Calibration sweep over t plus the power-law fit; writes `scaling.csv`,
/// `fit.json`, `b_vs_t.svg` and `digits_vs_t.svg`.
pub fn scaling_law(
    sigma: f64,
    t_values: &[f64],
    ctx: &PrecisionContext,
    opts: &CalibrationOptions,
) -> Result<Outcome, ExperimentError> {
    let results = accuracy_profile(sigma, t_values, ctx, opts)?;
    let (cals, failures) = split_profile(t_values, results);
    let mut table = CsvTable::new(&["t", "b_hat", "digits_gained"]);
    for c in &cals {
        table.row(&[num(c.t()), num(c.b_hat), num(c.digits_gained)]);
    }
    let samples: Vec<(f64, f64)> = cals.iter().map(|c| (c.t(), c.b_hat)).collect();
    let fit = series::fit_power_law(sigma, &samples)?;
    let summary = json!({
        "sigma": sigma,
        "C": fit.c_coef,
        "D": fit.d_exp,
        "r_squared": fit.r_squared,
        "points": cals.len(),
        "failures": failures,
    });
    let t_max = samples.iter().map(|p| p.0).fold(0.0, f64::max);
    let t_min = samples.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let model: Vec<(f64, f64)> = (0..=100)
        .map(|k| {
            let t = t_min + (t_max - t_min) * f64::from(k) / 100.0;
            (t, fit.c_coef * t.powf(fit.d_exp))
        })
        .collect();
    let b_plot = Plot::new(&format!("B(t) at sigma = {sigma}"), "t", "B")
        .with(Series::markers("calibrated", samples))
        .with(Series::line("C t^D", model));
    let d_plot = Plot::new(&format!("log10(1/err) at sigma = {sigma}"), "t", "digits").with(Series::line(
        "digits gained",
        cals.iter().map(|c| (c.t(), c.digits_gained)).collect(),
    ));
    Ok(Outcome {
        artifacts: vec![
            Artifact::new("scaling.csv", table.into_bytes()),
            Artifact::new("fit.json", json_bytes(&summary)),
            Artifact::new("b_vs_t.svg", b_plot.to_svg().into_bytes()),
            Artifact::new("digits_vs_t.svg", d_plot.to_svg().into_bytes()),
        ],
        summary,
    })
}

fn exp_fit_json(samples: &[(f64, f64)]) -> Value {
    match series::fit_sigma_dependence(samples) {
        Ok(f) => json!({ "p": f.p, "q": f.q, "amplitude": f.amplitude(), "r_squared": f.r_squared }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// B at fixed t over σ plus the exponential fit; writes `sigma_law.csv`,
/// `fit.json` and `b_vs_sigma.svg`.
pub fn sigma_law(
    t: f64,
    sigma_values: &[f64],
    ctx: &PrecisionContext,
    opts: &CalibrationOptions,
) -> Result<Outcome, ExperimentError> {
    if sigma_values.is_empty() {
        return Err(ExperimentError::Input("sigma list is empty".into()));
    }
    let results: Vec<_> = sigma_values
        .par_iter()
        .map(|&sigma| calibrate_with(&point(sigma, t, ctx), ctx, opts))
        .collect();
    let mut table = CsvTable::new(&["sigma", "b_hat", "digits_gained"]);
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (&sigma, r) in sigma_values.iter().zip(results) {
        match r {
            Ok(c) => {
                table.row(&[num(sigma), num(c.b_hat), num(c.digits_gained)]);
                samples.push((sigma, c.b_hat));
            }
            Err(e) => failures.push(json!({ "sigma": sigma, "error": e.to_string() })),
        }
    }
    let fit = series::fit_sigma_dependence(&samples)?;
    let summary = json!({
        "t": t,
        "p": fit.p,
        "q": fit.q,
        "amplitude": fit.amplitude(),
        "r_squared": fit.r_squared,
        "failures": failures,
    });
    let model: Vec<(f64, f64)> = samples.iter().map(|&(s, _)| (s, fit.eval(s))).collect();
    let plot = Plot::new(&format!("B(sigma) at t = {t}"), "sigma", "B")
        .with(Series::markers("calibrated", samples))
        .with(Series::line("exp(p + q sigma)", model));
    Ok(Outcome {
        artifacts: vec![
            Artifact::new("sigma_law.csv", table.into_bytes()),
            Artifact::new("fit.json", json_bytes(&summary)),
            Artifact::new("b_vs_sigma.svg", plot.to_svg().into_bytes()),
        ],
        summary,
    })
}

/// Power-law coefficients C(σ), D(σ) over a σ list; writes `c_d.csv`,
/// `fit.json`, `c_vs_sigma.svg` and `d_vs_sigma.svg`.
pub fn c_d_sigma(
    sigma_values: &[f64],
    t_values: &[f64],
    ctx: &PrecisionContext,
    opts: &CalibrationOptions,
) -> Result<Outcome, ExperimentError> {
    if sigma_values.is_empty() {
        return Err(ExperimentError::Input("sigma list is empty".into()));
    }
    let per_sigma: Vec<_> = sigma_values
        .par_iter()
        .map(|&sigma| accuracy_profile(sigma, t_values, ctx, opts))
        .collect();
    let mut table = CsvTable::new(&["sigma", "c", "d", "r_squared"]);
    let mut c_samples = Vec::new();
    let mut d_samples = Vec::new();
    let mut failures = Vec::new();
    for (&sigma, results) in sigma_values.iter().zip(per_sigma) {
        let (cals, failed) = split_profile(t_values, results?);
        failures.extend(failed.into_iter().map(|f| json!({ "sigma": sigma, "point": f })));
        let samples: Vec<(f64, f64)> = cals.iter().map(|c| (c.t(), c.b_hat)).collect();
        match series::fit_power_law(sigma, &samples) {
            Ok(fit) => {
                table.row(&[num(sigma), num(fit.c_coef), num(fit.d_exp), num(fit.r_squared)]);
                c_samples.push((sigma, fit.c_coef));
                d_samples.push((sigma, fit.d_exp));
            }
            Err(e) => failures.push(json!({ "sigma": sigma, "error": e.to_string() })),
        }
    }
    let summary = json!({
        "c_fit": exp_fit_json(&c_samples),
        "d_fit": exp_fit_json(&d_samples),
        "failures": failures,
    });
    let c_plot = Plot::new("C(sigma)", "sigma", "C").with(Series::line("C", c_samples));
    let d_plot = Plot::new("D(sigma)", "sigma", "D").with(Series::line("D", d_samples));
    Ok(Outcome {
        artifacts: vec![
            Artifact::new("c_d.csv", table.into_bytes()),
            Artifact::new("fit.json", json_bytes(&summary)),
            Artifact::new("c_vs_sigma.svg", c_plot.to_svg().into_bytes()),
            Artifact::new("d_vs_sigma.svg", d_plot.to_svg().into_bytes()),
        ],
        summary,
    })
}

/// Partial-sum spiral; writes `spiral.csv` and `spiral.svg`.
///
/// Without `b`, B is calibrated at s first. The trace length defaults to
/// twice the truncation length at that B.
pub fn spiral_trace(
    sigma: f64,
    t: f64,
    weighted: bool,
    b: Option<f64>,
    n_terms: Option<u64>,
    ctx: &PrecisionContext,
) -> Result<Outcome, ExperimentError> {
    let s = point(sigma, t, ctx);
    let (b, calibrated) = match b {
        Some(b) => (b, false),
        None => (calibrate_with(&s, ctx, &CalibrationOptions::default())?.b_hat, true),
    };
    let n = match n_terms {
        Some(n) => n,
        None => spiral::default_terms(&s, b, ctx)?,
    };
    let trace = if weighted {
        spiral::weighted_partial_sums(&s, b, n, ctx)?
    } else {
        spiral::raw_partial_sums(&s, n, ctx)?
    };
    let cutoff = (t.abs() / std::f64::consts::PI).ceil() as usize;
    let summary = json!({
        "sigma": sigma,
        "t": t,
        "weighted": weighted,
        "b": b,
        "b_calibrated": calibrated,
        "n_terms": n,
        "final_modulus": trace.last().abs_f64(),
        "cutoff_index": cutoff,
        "max_modulus_beyond_cutoff": trace.max_modulus_beyond(cutoff),
    });
    let pts: Vec<(f64, f64)> = trace
        .points
        .iter()
        .map(|p| (p.re().to_f64(), p.im().to_f64()))
        .collect();
    let kind = if weighted { "weighted" } else { "raw" };
    let plot = Plot::new(&format!("{kind} partial sums, s = {sigma} + {t}i"), "Re", "Im")
        .with(Series::line(kind, pts))
        .centered();
    Ok(Outcome {
        artifacts: vec![
            Artifact::new("spiral.csv", trace.to_csv().into_bytes()),
            Artifact::new("spiral.svg", plot.to_svg().into_bytes()),
        ],
        summary,
    })
}

/// Half-crossing n̂* against the grid start t1; writes `nhat_sweep.csv` and
/// `nhat_vs_t1.svg`.
pub fn nhat_sweep(sigma: f64, t1_values: &[f64], dt: f64, n: usize, digits: u32) -> Result<Outcome, ExperimentError> {
    if t1_values.is_empty() {
        return Err(ExperimentError::Input("t1 list is empty".into()));
    }
    let grids = t1_values
        .iter()
        .map(|&t1| GridSpec::new(sigma, t1, dt, n, digits))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = grids
        .par_iter()
        .map(|g| -> Result<(f64, f64, f64, f64), ExperimentError> {
            let cs = compute_coefficients(g)?;
            let crossing = solver::half_crossing(&cs)?;
            let fit = sigmoid::construct_fit(&cs).map(|f| f.residual).unwrap_or(f64::NAN);
            Ok((crossing.n_hat_star, cs.im_stability, cs.residual_inf, fit))
        })
        .collect();
    let mut table = CsvTable::new(&[
        "t1",
        "n_hat_star",
        "n_hat_mean",
        "tm_over_t1",
        "im_stability",
        "residual_inf",
        "fit_residual",
    ]);
    let mut star = Vec::new();
    let mut mean = Vec::new();
    let mut failures = Vec::new();
    for (g, r) in grids.iter().zip(results) {
        match r {
            Ok((nh, stab, res, fit)) => {
                table.row(&[
                    num(g.t1),
                    num(nh),
                    num(g.mean_index()),
                    num(g.mean_ordinate() / g.t1),
                    num(stab),
                    num(res),
                    num(fit),
                ]);
                star.push((g.t1, nh));
                mean.push((g.t1, g.mean_index()));
            }
            Err(e) => failures.push(json!({ "t1": g.t1, "error": e.to_string() })),
        }
    }
    let summary = json!({ "points": star.len(), "failures": failures });
    let plot = Plot::new("half-crossing against t1", "t1", "n")
        .with(Series::line("n_hat_star", star))
        .with(Series::line("t_m / pi", mean));
    Ok(Outcome {
        artifacts: vec![
            Artifact::new("nhat_sweep.csv", table.into_bytes()),
            Artifact::new("nhat_vs_t1.svg", plot.to_svg().into_bytes()),
        ],
        summary,
    })
}
