//! `sigzeta`: command-line front end.
//!
//! Tabular results go to stdout as CSV, JSON summaries to stderr. With
//! `--output-dir` every output file is also written there next to a
//! `manifest.json`. Exit status: 0 ok, 2 invalid input, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sigzeta_core::experiments::{
    self, find_preset, pipelines, write_run, Config, ExperimentConfig, ExperimentError, Outcome,
};
use sigzeta_core::{oracle, ComplexAP, PrecisionContext};

#[derive(Parser)]
#[command(
    name = "sigzeta",
    version,
    about = "Sigmoid-weighted Dirichlet series for the Riemann zeta function"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write outputs and a manifest into this directory.
    #[arg(long)]
    output_dir: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<String>,
}

#[derive(Subcommand)]
enum ZetaOp {
    /// Reference value of zeta(s).
    Eval {
        /// Real and imaginary part, e.g. `0.5,14.134725`.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value_t = 30)]
        digits: u32,
    },
}

#[derive(Subcommand)]
enum Command {
    /// Reference zeta evaluations.
    Zeta {
        #[command(subcommand)]
        op: ZetaOp,
    },
    /// Solve for the finite coefficients delta*_n on a grid.
    SolveCoeffs {
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<String>,
        #[arg(long)]
        t1: Option<String>,
        #[arg(long)]
        dt: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        digits: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the sigmoid to a coefficient CSV written by solve-coeffs.
    FitSigmoid {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Calibrate the scale B at one point s = sigma + it.
    SearchB {
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<String>,
        #[arg(long)]
        t: Option<String>,
        /// `lo,hi`
        #[arg(long)]
        bracket: Option<String>,
        #[arg(long)]
        digits: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Calibrate B over several t and fit B = C t^D.
    ScalingLaw {
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<String>,
        /// Comma-separated, increasing.
        #[arg(long)]
        t_list: Option<String>,
        #[arg(long)]
        bracket: Option<String>,
        #[arg(long)]
        digits: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Calibrate B over several sigma at fixed t and fit an exponential.
    SigmaLaw {
        #[arg(long)]
        t: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        sigma_list: Option<String>,
        #[arg(long)]
        bracket: Option<String>,
        #[arg(long)]
        digits: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Partial sums of the functional-equation series.
    Spiral {
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<String>,
        #[arg(long)]
        t: Option<String>,
        /// Apply the sigmoid weights.
        #[arg(long)]
        weighted: bool,
        /// Scale B; calibrated at s when omitted.
        #[arg(long)]
        b: Option<String>,
        /// Number of terms; twice the truncation length when omitted.
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        digits: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named preset.
    Run {
        preset: String,
        /// Override a setting, `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print every preset as a config stub.
    ListPresets,
}

fn config_file(common: &Common) -> Result<Config, ExperimentError> {
    let Some(path) = &common.config else {
        return Ok(Config::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(Config::parse(&text)?)
}

/// Preset defaults, then the config file, then flags.
fn layered(preset: &str, common: &Common, flags: &[(&str, &Option<String>)]) -> Result<Config, ExperimentError> {
    let mut cfg = find_preset(preset)?.default_config();
    let mut overrides = config_file(common)?;
    let extra = [("output_dir", &common.output_dir), ("jobs", &common.jobs)];
    for (key, value) in flags.iter().chain(extra.iter()) {
        if let Some(v) = value {
            overrides.set(key, v)?;
        }
    }
    cfg.merge(&overrides);
    Ok(cfg)
}

fn emit(
    label: &str,
    cfg: &Config,
    outcome: Result<Outcome, ExperimentError>,
    started: Instant,
) -> Result<(), ExperimentError> {
    if let Some(dir) = cfg.output_dir() {
        write_run(&dir, label, cfg, &outcome, started)?;
    }
    let out = outcome?;
    if let Some(csv) = out.artifacts.iter().find(|a| a.name.ends_with(".csv")) {
        print!("{}", csv.text());
    }
    eprintln!("{}", out.summary);
    Ok(())
}

fn preset_verb(
    label: &str,
    preset: &str,
    common: &Common,
    flags: &[(&str, &Option<String>)],
) -> Result<(), ExperimentError> {
    let started = Instant::now();
    let cfg = layered(preset, common, flags)?;
    let outcome = experiments::execute(find_preset(preset)?, &cfg);
    emit(label, &cfg, outcome, started)
}

fn zeta_eval(s: &str, digits: u32) -> Result<(), ExperimentError> {
    let ctx = PrecisionContext::new(digits)?;
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| ExperimentError::Input(format!("expected --s re,im, got {s:?}")))?;
    let point = ComplexAP::new(ctx.parse_real(re.trim())?, ctx.parse_real(im.trim())?);
    let result = oracle::zeta(&point, &ctx)?;
    println!("{}", result.value.to_decimal_string(digits as usize));
    eprintln!(
        "{}",
        json!({
            "digits": digits,
            "terms_used": result.terms_used,
            "correction_order": result.correction_order,
        })
    );
    Ok(())
}

fn fit_sigmoid(input: &PathBuf, common: &Common) -> Result<(), ExperimentError> {
    let started = Instant::now();
    let text = std::fs::read_to_string(input)
        .map_err(|e| ExperimentError::Input(format!("cannot read {}: {e}", input.display())))?;
    let deltas = pipelines::read_coefficients_csv(&text)?;
    let mut cfg = config_file(common)?;
    if let Some(dir) = &common.output_dir {
        cfg.set("output_dir", dir)?;
    }
    let outcome = pipelines::sigmoid_fit(&deltas, None);
    emit("fit-sigmoid", &cfg, outcome, started)
}

fn run(preset: &str, set: &[String], common: &Common) -> Result<(), ExperimentError> {
    let mut overrides = config_file(common)?;
    for item in set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| ExperimentError::Input(format!("--set expects key=value, got {item:?}")))?;
        overrides.set(k.trim(), v)?;
    }
    if let Some(dir) = &common.output_dir {
        overrides.set("output_dir", dir)?;
    }
    if let Some(jobs) = &common.jobs {
        overrides.set("jobs", jobs)?;
    }
    let manifest = experiments::run_preset(&ExperimentConfig::new(preset, overrides))?;
    let dir = manifest.config.get("output_dir").cloned().unwrap_or_default();
    for o in &manifest.outputs {
        println!("{}  {dir}/{}", o.sha256, o.file);
    }
    eprintln!("{}", manifest.summary);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Zeta {
            op: ZetaOp::Eval { s, digits },
        } => zeta_eval(&s, digits),
        Command::SolveCoeffs {
            sigma,
            t1,
            dt,
            n,
            digits,
            common,
        } => preset_verb(
            "solve-coeffs",
            "fig-coeffs-stable",
            &common,
            &[
                ("sigma", &sigma),
                ("t1", &t1),
                ("dt", &dt),
                ("n", &n),
                ("digits", &digits),
            ],
        ),
        Command::FitSigmoid { input, common } => fit_sigmoid(&input, &common),
        Command::SearchB {
            sigma,
            t,
            bracket,
            digits,
            common,
        } => preset_verb(
            "search-b",
            "fig-eps-vs-b",
            &common,
            &[("sigma", &sigma), ("t", &t), ("bracket", &bracket), ("digits", &digits)],
        ),
        Command::ScalingLaw {
            sigma,
            t_list,
            bracket,
            digits,
            common,
        } => preset_verb(
            "scaling-law",
            "fig-b-power-law",
            &common,
            &[
                ("sigma", &sigma),
                ("t_list", &t_list),
                ("bracket", &bracket),
                ("digits", &digits),
            ],
        ),
        Command::SigmaLaw {
            t,
            sigma_list,
            bracket,
            digits,
            common,
        } => preset_verb(
            "sigma-law",
            "fig-b-sigma",
            &common,
            &[
                ("t", &t),
                ("sigma_list", &sigma_list),
                ("bracket", &bracket),
                ("digits", &digits),
            ],
        ),
        Command::Spiral {
            sigma,
            t,
            weighted,
            b,
            n,
            digits,
            common,
        } => {
            let preset = if weighted {
                "fig-spiral-weighted"
            } else {
                "fig-spiral-raw"
            };
            preset_verb(
                "spiral",
                preset,
                &common,
                &[("sigma", &sigma), ("t", &t), ("b", &b), ("n", &n), ("digits", &digits)],
            )
        }
        Command::Run { preset, set, common } => run(&preset, &set, &common),
        Command::ListPresets => {
            print!("{}", experiments::list_presets());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
