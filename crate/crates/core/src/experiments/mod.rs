//! Named presets, configuration and run manifests.
//!
//! A preset is a default [`Config`] plus a pipeline. Running one merges the
//! defaults with user overrides, executes the pipeline and writes every
//! output file together with `manifest.json` into the output directory.

pub mod config;
pub mod output;
pub mod pipelines;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

pub use config::{Config, ConfigError};
pub use pipelines::{Artifact, Outcome};

use crate::oracle::OracleError;
use crate::precision::{PrecisionContext, PrecisionError};
use crate::series::{CalibrationOptions, SeriesError};
use crate::sigmoid::SigmoidError;
use crate::solver::{GridSpec, SolveError};
use crate::spiral::SpiralError;

pub const TOOL_NAME: &str = "sigzeta";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("unknown preset '{0}' (see list-presets)")]
    UnknownPreset(String),
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sigmoid(#[from] SigmoidError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Spiral(#[from] SpiralError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Precision(#[from] PrecisionError),
}

fn precision_is_input(e: &PrecisionError) -> bool {
    matches!(e, PrecisionError::TooFewDigits(_) | PrecisionError::Parse(_))
}

fn oracle_is_input(e: &OracleError) -> bool {
    match e {
        OracleError::Pole | OracleError::GammaPole(_) | OracleError::ChiDegenerate(_) => true,
        OracleError::PrecisionUnreachable { .. } => false,
        OracleError::Precision(p) => precision_is_input(p),
    }
}

fn series_is_input(e: &SeriesError) -> bool {
    match e {
        SeriesError::RealAxis
        | SeriesError::NonPositiveScale(_)
        | SeriesError::InvalidBracket { .. }
        | SeriesError::InvalidOrdinates
        | SeriesError::InsufficientSamples { .. } => true,
        SeriesError::Oracle(o) => oracle_is_input(o),
        SeriesError::Precision(p) => precision_is_input(p),
        _ => false,
    }
}

impl ExperimentError {
    /// True when the inputs were at fault rather than the numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Config(_) | Self::UnknownPreset(_) | Self::Input(_) => true,
            Self::Io { .. } | Self::Sigmoid(_) => false,
            Self::Solve(e) => match e {
                SolveError::InvalidGrid(_) | SolveError::DimensionMismatch(_) => true,
                SolveError::Oracle(o) => oracle_is_input(o),
                SolveError::Precision(p) => precision_is_input(p),
                _ => false,
            },
            Self::Series(e) => series_is_input(e),
            Self::Spiral(e) => match e {
                SpiralError::RealAxis | SpiralError::NoTerms => true,
                SpiralError::Oracle(o) => oracle_is_input(o),
                SpiralError::Series(s) => series_is_input(s),
            },
            Self::Oracle(e) => oracle_is_input(e),
            Self::Precision(e) => precision_is_input(e),
        }
    }

    /// Process exit status: 2 for validation errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            2
        } else {
            3
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pipeline {
    Coefficients,
    Sigmoid,
    NhatSweep,
    EpsVsB,
    Scaling,
    CdSigma,
    BSigma,
    SpiralRaw,
    SpiralWeighted,
}

/// A named experiment with its default parameters.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    /// What the output reproduces.
    pub figure: &'static str,
    pub defaults: &'static [(&'static str, &'static str)],
    pipeline: Pipeline,
}

const STABLE: [(&str, &str); 5] = [
    ("sigma", "0.5"),
    ("t1", "188.4955592"),
    ("dt", "0.628318531"),
    ("n", "100"),
    ("digits", "100"),
];

const PRESETS: &[Preset] = &[
    Preset {
        name: "fig-coeffs-stable",
        figure: "real and imaginary parts of delta*_n on the stable grid",
        defaults: &STABLE,
        pipeline: Pipeline::Coefficients,
    },
    Preset {
        name: "fig-coeffs-left",
        figure: "delta*_n on the grid shifted left",
        defaults: &[
            ("sigma", "0.5"),
            ("t1", "157.0796327"),
            ("dt", "0.785398163"),
            ("n", "100"),
            ("digits", "100"),
        ],
        pipeline: Pipeline::Coefficients,
    },
    Preset {
        name: "fig-coeffs-right",
        figure: "delta*_n on the grid shifted right",
        defaults: &[
            ("sigma", "0.5"),
            ("t1", "209.4395102"),
            ("dt", "0.523598776"),
            ("n", "100"),
            ("digits", "100"),
        ],
        pipeline: Pipeline::Coefficients,
    },
    Preset {
        name: "fig-precision-90",
        figure: "delta*_n on the stable grid with a slight loss of precision (90 digits)",
        defaults: &[
            ("sigma", "0.5"),
            ("t1", "188.4955592"),
            ("dt", "0.628318531"),
            ("n", "100"),
            ("digits", "90"),
        ],
        pipeline: Pipeline::Coefficients,
    },
    Preset {
        name: "fig-precision-50",
        figure: "delta*_n on the stable grid with a large loss of precision (50 digits)",
        defaults: &[
            ("sigma", "0.5"),
            ("t1", "188.4955592"),
            ("dt", "0.628318531"),
            ("n", "100"),
            ("digits", "50"),
        ],
        pipeline: Pipeline::Coefficients,
    },
    Preset {
        name: "fig-sigmoid",
        figure: "sigmoid against the real parts of delta*_n",
        defaults: &STABLE,
        pipeline: Pipeline::Sigmoid,
    },
    Preset {
        name: "fig-nhat-sweep",
        figure: "half-crossing n_hat_star and mean index against the grid start t1",
        defaults: &[
            ("sigma", "0.5"),
            ("t_list", "170,175,180,185,190,195,200,205,210,215,220,225,230"),
            ("dt", "0.628318531"),
            ("n", "100"),
            ("digits", "100"),
        ],
        pipeline: Pipeline::NhatSweep,
    },
    Preset {
        name: "fig-eps-vs-b",
        figure: "error of the weighted series against B at s = 0.5 + 1000i",
        defaults: &[
            ("sigma", "0.5"),
            ("t", "1000"),
            ("digits", "30"),
            ("bracket", "0.1,100"),
        ],
        pipeline: Pipeline::EpsVsB,
    },
    Preset {
        name: "fig-eps-vs-t",
        figure: "digits gained log10(1/err) against t",
        defaults: &[
            ("sigma", "0.5"),
            ("t_list", "100,200,300,500,1000,2000,3000,5000"),
            ("digits", "30"),
            ("bracket", "0.1,100"),
        ],
        pipeline: Pipeline::Scaling,
    },
    Preset {
        name: "fig-b-power-law",
        figure: "calibrated B against t with the power-law fit C t^D",
        defaults: &[
            ("sigma", "0.5"),
            ("t_list", "100,200,500,1000,2000,5000"),
            ("digits", "30"),
            ("bracket", "0.1,100"),
        ],
        pipeline: Pipeline::Scaling,
    },
    Preset {
        name: "fig-c-d-sigma",
        figure: "power-law coefficients C and D against sigma",
        defaults: &[
            ("sigma_list", "0.1,0.3,0.5,0.7,0.9"),
            ("t_list", "100,200,500,1000,2000"),
            ("digits", "30"),
            ("bracket", "0.1,100"),
        ],
        pipeline: Pipeline::CdSigma,
    },
    Preset {
        name: "fig-b-sigma",
        figure: "calibrated B against sigma at t = 50000",
        defaults: &[
            ("t", "50000"),
            ("sigma_list", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"),
            ("digits", "30"),
            ("bracket", "0.1,100"),
        ],
        pipeline: Pipeline::BSigma,
    },
    Preset {
        name: "fig-spiral-raw",
        figure: "divergent spiral of unweighted functional-equation partial sums",
        defaults: &[("sigma", "0.5"), ("t", "200"), ("digits", "30")],
        pipeline: Pipeline::SpiralRaw,
    },
    Preset {
        name: "fig-spiral-weighted",
        figure: "convergent spiral of sigmoid-weighted partial sums",
        defaults: &[("sigma", "0.5"), ("t", "200"), ("digits", "30")],
        pipeline: Pipeline::SpiralWeighted,
    },
];

pub fn presets() -> &'static [Preset] {
    PRESETS
}

pub fn find_preset(name: &str) -> Result<&'static Preset, ExperimentError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ExperimentError::UnknownPreset(name.to_string()))
}

impl Preset {
    pub fn default_config(&self) -> Config {
        let mut cfg = Config::new();
        for (k, v) in self.defaults {
            cfg.set(k, v).expect("preset defaults are valid");
        }
        cfg
    }

    /// Comment lines naming the preset, then its defaults as `key = value`.
    pub fn stub(&self) -> String {
        format!(
            "# preset: {}\n# figure: {}\n{}",
            self.name,
            self.figure,
            self.default_config()
        )
    }
}

/// All preset stubs separated by blank lines; each block parses as a [`Config`].
pub fn list_presets() -> String {
    PRESETS.iter().map(Preset::stub).collect::<Vec<_>>().join("\n")
}

/// A preset name plus user overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: String,
    pub overrides: Config,
}

impl ExperimentConfig {
    pub fn new(preset: &str, overrides: Config) -> Self {
        Self {
            preset: preset.to_string(),
            overrides,
        }
    }

    /// Preset defaults overlaid with the overrides, with `output_dir` filled in.
    pub fn resolve(&self) -> Result<Config, ExperimentError> {
        let preset = find_preset(&self.preset)?;
        let mut cfg = preset.default_config();
        cfg.merge(&self.overrides);
        cfg.set_default("output_dir", &format!("out/{}", preset.name))?;
        Ok(cfg)
    }
}

fn calibration_options(cfg: &Config) -> Result<CalibrationOptions, ExperimentError> {
    let mut opts = CalibrationOptions::default();
    if cfg.contains("bracket") {
        opts.bracket = cfg.pair("bracket")?;
    }
    Ok(opts)
}

fn grid_from(cfg: &Config, t1: f64) -> Result<GridSpec, ExperimentError> {
    Ok(GridSpec::new(
        cfg.real("sigma")?,
        t1,
        cfg.real("dt")?,
        cfg.count("n")?,
        cfg.digits()?,
    )?)
}

/// Runs the preset's pipeline on a resolved config on a pool of `jobs` workers.
pub fn execute(preset: &Preset, cfg: &Config) -> Result<Outcome, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs())
        .build()
        .map_err(|e| ExperimentError::Input(format!("cannot start {} workers: {e}", cfg.jobs())))?;
    pool.install(|| execute_inner(preset, cfg))
}

fn execute_inner(preset: &Preset, cfg: &Config) -> Result<Outcome, ExperimentError> {
    match preset.pipeline {
        Pipeline::Coefficients => Ok(pipelines::coefficients(&grid_from(cfg, cfg.real("t1")?)?)?.1),
        Pipeline::Sigmoid => {
            let grid = grid_from(cfg, cfg.real("t1")?)?;
            let (cs, mut out) = pipelines::coefficients(&grid)?;
            let fit = pipelines::sigmoid_fit(&cs.deltas, Some(grid))?;
            out.artifacts.extend(fit.artifacts);
            out.summary = serde_json::json!({ "coefficients": out.summary, "fit": fit.summary });
            Ok(out)
        }
        Pipeline::NhatSweep => pipelines::nhat_sweep(
            cfg.real("sigma")?,
            &cfg.list("t_list")?,
            cfg.real("dt")?,
            cfg.count("n")?,
            cfg.digits()?,
        ),
        Pipeline::EpsVsB => {
            let ctx = PrecisionContext::new(cfg.digits()?)?;
            pipelines::calibration(cfg.real("sigma")?, cfg.real("t")?, &ctx, &calibration_options(cfg)?)
        }
        Pipeline::Scaling => {
            let ctx = PrecisionContext::new(cfg.digits()?)?;
            pipelines::scaling_law(
                cfg.real("sigma")?,
                &cfg.list("t_list")?,
                &ctx,
                &calibration_options(cfg)?,
            )
        }
        Pipeline::CdSigma => {
            let ctx = PrecisionContext::new(cfg.digits()?)?;
            pipelines::c_d_sigma(
                &cfg.list("sigma_list")?,
                &cfg.list("t_list")?,
                &ctx,
                &calibration_options(cfg)?,
            )
        }
        Pipeline::BSigma => {
            let ctx = PrecisionContext::new(cfg.digits()?)?;
            pipelines::sigma_law(
                cfg.real("t")?,
                &cfg.list("sigma_list")?,
                &ctx,
                &calibration_options(cfg)?,
            )
        }
        Pipeline::SpiralRaw | Pipeline::SpiralWeighted => {
            let ctx = PrecisionContext::new(cfg.digits()?)?;
            let n_terms = if cfg.contains("n") {
                Some(cfg.count("n")? as u64)
            } else {
                None
            };
            pipelines::spiral_trace(
                cfg.real("sigma")?,
                cfg.real("t")?,
                preset.pipeline == Pipeline::SpiralWeighted,
                cfg.opt_real("b"),
                n_terms,
                &ctx,
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to audit or repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub preset: String,
    pub tool: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<OutputRecord>,
    pub wall_time_s: f64,
    pub status: String,
    pub error: Option<String>,
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn output(&self, file: &str) -> Option<&OutputRecord> {
        self.outputs.iter().find(|o| o.file == file)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ExperimentError {
    ExperimentError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes the outcome's files and `manifest.json` into `dir`.
///
/// A failed outcome still gets a manifest, with the error text and no outputs.
pub fn write_run(
    dir: &Path,
    label: &str,
    cfg: &Config,
    outcome: &Result<Outcome, ExperimentError>,
    started: Instant,
) -> Result<RunManifest, ExperimentError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut outputs = Vec::new();
    if let Ok(out) = outcome {
        for a in &out.artifacts {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes).map_err(|e| io_err(&path, e))?;
            outputs.push(OutputRecord {
                file: a.name.clone(),
                sha256: output::sha256_hex(&a.bytes),
                bytes: a.bytes.len(),
            });
        }
    }
    let manifest = RunManifest {
        preset: label.to_string(),
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        config: cfg.as_map().clone(),
        outputs,
        wall_time_s: started.elapsed().as_secs_f64(),
        status: if outcome.is_ok() { "ok" } else { "error" }.to_string(),
        error: outcome.as_ref().err().map(ToString::to_string),
        summary: outcome.as_ref().map_or(serde_json::Value::Null, |o| o.summary.clone()),
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(manifest)
}

/// Resolves, executes and persists a preset run.
///
/// Pipeline errors are recorded in the manifest and then returned.
pub fn run_preset(config: &ExperimentConfig) -> Result<RunManifest, ExperimentError> {
    let started = Instant::now();
    let preset = find_preset(&config.preset)?;
    let cfg = config.resolve()?;
    let dir: PathBuf = cfg.output_dir().expect("resolve fills output_dir");
    let outcome = execute(preset, &cfg);
    let manifest = write_run(&dir, preset.name, &cfg, &outcome, started)?;
    outcome.map(|_| manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourteen_presets_with_figures() {
        assert_eq!(presets().len(), 14);
        for p in presets() {
            assert!(!p.figure.is_empty());
            assert!(p.name.starts_with("fig-"));
        }
        assert!(matches!(
            find_preset("fig-nope"),
            Err(ExperimentError::UnknownPreset(_))
        ));
    }

    #[test]
    fn stubs_parse_back_to_defaults() {
        let listing = list_presets();
        let blocks: Vec<&str> = listing.split("\n\n").collect();
        assert_eq!(blocks.len(), 14);
        for (block, p) in blocks.iter().zip(presets()) {
            assert_eq!(Config::parse(block).unwrap(), p.default_config());
            assert!(block.contains(p.name));
        }
    }

    #[test]
    fn resolve_applies_overrides_and_output_dir() {
        let cfg = ExperimentConfig::new("fig-precision-50", Config::parse("digits = 60").unwrap())
            .resolve()
            .unwrap();
        assert_eq!(cfg.digits().unwrap(), 60);
        assert_eq!(cfg.raw("output_dir"), Some("out/fig-precision-50"));
        assert_eq!(cfg.real("t1").unwrap(), 188.4955592);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ExperimentError::UnknownPreset("x".into()).exit_code(), 2);
        assert_eq!(ExperimentError::Series(SeriesError::RealAxis).exit_code(), 2);
        assert_eq!(ExperimentError::Oracle(OracleError::Pole).exit_code(), 2);
        let singular = SolveError::SingularMatrix { column: 3, pivot: 0.0 };
        assert_eq!(ExperimentError::Solve(singular).exit_code(), 3);
        let edge = SeriesError::NoInteriorMinimum {
            best_b: 0.1,
            edge: "lower",
        };
        assert_eq!(ExperimentError::Series(edge).exit_code(), 3);
    }
}
