//! `slf` — sorted-likelihood diagnostics for Bayesian inference problems:
//! estimate the likelihood CCDF, reduce it to evidence / information gain /
//! effective dimension, and report high-probability-set geometry.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

mod config;
mod output;
mod pipeline;

use config::{
    load_json, EpsilonRule, EstimatorConfig, OutputFormat, RunConfig, SweepConfig, SweepVariable,
};
use output::{fmt_f64, write_csv, write_json};
use pipeline::{bootstrap, run_seeds, SeedRecord};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or flags: exit code 1.
    Config(String),
    /// Estimator or output failure at run time: exit code 2.
    Run(String),
    /// One or more self-checks failed: exit code 3.
    Checks(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Run(m) => write!(f, "run error: {m}"),
            CliError::Checks(m) => write!(f, "self-check failure: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Run(_) => 2,
            CliError::Checks(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "slf",
    about = "Sorted-likelihood diagnostics: evidence, information gain, effective dimension, and high-probability sets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one model: curves, summary, densities, HPS report.
    Analyze(AnalyzeArgs),
    /// Sweep a model over dimension or likelihood width.
    Sweep(SweepArgs),
    /// Run the built-in verification suite and write validate.json.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model name: gaussian-ball | gaussian-conjugate | bimodal.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    /// Mode separation for the bimodal model.
    #[arg(long)]
    sep: Option<f64>,
    /// Estimator: analytic | mc | subset.
    #[arg(long)]
    estimator: Option<String>,
    /// Seed; repeat the flag for a multi-seed bootstrap.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for tabular artifacts: csv | json.
    #[arg(long)]
    format: Option<String>,
    /// HPS half-width rule: three-sigma | sqrt-de | a positive number.
    #[arg(long)]
    epsilon: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration (base run + sweep_variable + values).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep variable: d | sigma.
    #[arg(long = "var")]
    variable: Option<String>,
    /// Comma-separated, strictly increasing sweep values.
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    sep: Option<f64>,
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Directory for validate.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Stop at the first failing check.
    #[arg(long)]
    fail_fast: bool,
}

fn parse_estimator(name: &str, current: EstimatorConfig) -> Result<EstimatorConfig, CliError> {
    Ok(match name {
        "analytic" => EstimatorConfig::Analytic { n_points: 10_000 },
        "mc" => EstimatorConfig::Mc { n: 100_000 },
        "subset" => match current {
            sub @ EstimatorConfig::Subset { .. } => sub,
            _ => EstimatorConfig::default(),
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown estimator '{other}' (expected analytic, mc, or subset)"
            )))
        }
    })
}

fn parse_epsilon(text: &str) -> Result<EpsilonRule, CliError> {
    match text {
        "three-sigma" => Ok(EpsilonRule::ThreeSigma),
        "sqrt-de" => Ok(EpsilonRule::SqrtDe),
        other => match other.parse::<f64>() {
            Ok(value) if value > 0.0 && value.is_finite() => {
                Ok(EpsilonRule::Explicit { value })
            }
            _ => Err(CliError::Config(format!(
                "epsilon must be three-sigma, sqrt-de, or a positive number, got '{other}'"
            ))),
        },
    }
}

fn parse_format(text: &str) -> Result<OutputFormat, CliError> {
    match text {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(CliError::Config(format!(
            "unknown format '{other}' (expected csv or json)"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn apply_run_overrides(
    cfg: &mut RunConfig,
    model: Option<String>,
    sigma: Option<f64>,
    d: Option<usize>,
    sep: Option<f64>,
    estimator: Option<String>,
    seeds: &[u64],
    out: Option<PathBuf>,
    format: Option<String>,
    epsilon: Option<String>,
) -> Result<(), CliError> {
    if let Some(m) = model {
        cfg.model.name = m;
    }
    if let Some(s) = sigma {
        cfg.model.sigma = s;
    }
    if let Some(d) = d {
        cfg.model.d = d;
    }
    if let Some(s) = sep {
        cfg.model.sep = Some(s);
    }
    if let Some(e) = estimator {
        cfg.estimator = parse_estimator(&e, cfg.estimator.clone())?;
    }
    if !seeds.is_empty() {
        cfg.seeds = seeds.to_vec();
    }
    if let Some(o) = out {
        cfg.output.dir = o;
    }
    if let Some(f) = format {
        cfg.output.format = parse_format(&f)?;
    }
    if let Some(e) = epsilon {
        cfg.epsilon_rule = parse_epsilon(&e)?;
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let mut cfg: RunConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => RunConfig::default(),
    };
    apply_run_overrides(
        &mut cfg,
        args.model,
        args.sigma,
        args.d,
        args.sep,
        args.estimator,
        &args.seeds,
        args.out,
        args.format,
        args.epsilon,
    )?;
    cfg.validate()?;

    let outcomes = run_seeds(&cfg)?;
    let dir = &cfg.output.dir;

    let records: Vec<SeedRecord> = outcomes
        .iter()
        .map(|o| SeedRecord {
            seed: o.seed,
            summary: &o.summary,
            hps: &o.hps,
            diagnostics: &o.diagnostics,
        })
        .collect();
    write_json(&dir.join("summary.json"), &records)?;

    let first = &outcomes[0];
    match cfg.output.format {
        OutputFormat::Csv => {
            write_csv(
                &dir.join("curves.csv"),
                &["x", "log_L"],
                first
                    .curves
                    .slf
                    .points()
                    .iter()
                    .map(|&(x, l)| vec![fmt_f64(x), fmt_f64(l)]),
            )?;
            write_csv(
                &dir.join("density_x.csv"),
                &["x", "log_density"],
                first
                    .density_x
                    .points()
                    .iter()
                    .map(|&(x, l)| vec![fmt_f64(x), fmt_f64(l)]),
            )?;
            write_csv(
                &dir.join("density_y.csv"),
                &["y", "log_density"],
                first
                    .density_y
                    .points()
                    .iter()
                    .map(|&(y, l)| vec![fmt_f64(y), fmt_f64(l)]),
            )?;
        }
        OutputFormat::Json => {
            write_json(&dir.join("curves.json"), &first.curves.slf.points())?;
            write_json(&dir.join("density_x.json"), &first.density_x.points())?;
            write_json(&dir.join("density_y.json"), &first.density_y.points())?;
        }
    }

    if outcomes.len() >= 2 {
        write_json(&dir.join("bootstrap.json"), &bootstrap(&outcomes))?;
    }

    let s = &first.summary;
    println!(
        "ln z = {:.6}, G = {:.6}, sigma_p = {:.6}, d_e = {:.6} ({} seed{})",
        s.log_z,
        s.info_gain,
        s.sigma_p,
        s.effective_dim,
        outcomes.len(),
        if outcomes.len() == 1 { "" } else { "s" }
    );
    println!("artifacts written to {}", dir.display());
    Ok(())
}

/// One sweep row, aggregated across seeds; `None` marks a failed point.
fn sweep_row(cfg: &RunConfig, value: f64) -> Option<Vec<String>> {
    let outcomes = match run_seeds(cfg) {
        Ok(o) => o,
        Err(e) => {
            log::warn!("sweep point {value} failed: {e}");
            return None;
        }
    };
    let n = outcomes.len() as f64;
    let mean = |f: &dyn Fn(&pipeline::SeedOutcome) -> f64| -> f64 {
        outcomes.iter().map(|o| f(o)).sum::<f64>() / n
    };
    let log_z = mean(&|o| o.summary.log_z);
    let mean_y = mean(&|o| o.summary.mean_y);
    let var_y = mean(&|o| o.summary.var_y);
    let agg = match slf_core::PosteriorSummary::from_moments(log_z, mean_y, var_y) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("sweep point {value}: aggregated summary invalid: {e}");
            return None;
        }
    };
    let eps = cfg.epsilon_rule.epsilon(&agg);
    let report = match slf_core::hps::hps_report(&agg, eps, 0.0) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("sweep point {value}: {e}");
            return None;
        }
    };
    let cov = agg.sigma_p / agg.info_gain;
    Some(vec![
        fmt_f64(value),
        fmt_f64(agg.log_z),
        fmt_f64(agg.info_gain),
        fmt_f64(agg.sigma_p),
        fmt_f64(agg.effective_dim),
        fmt_f64(cov),
        fmt_f64(report.ln_l_interval.0),
        fmt_f64(report.ln_l_interval.1),
        report.mode_excluded.to_string(),
        fmt_f64(report.vol_upper),
    ])
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut sweep: SweepConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => SweepConfig {
            base: RunConfig::default(),
            sweep_variable: SweepVariable::D,
            values: Vec::new(),
        },
    };
    if let Some(var) = args.variable {
        sweep.sweep_variable = match var.as_str() {
            "d" => SweepVariable::D,
            "sigma" => SweepVariable::Sigma,
            other => {
                return Err(CliError::Config(format!(
                    "unknown sweep variable '{other}' (expected d or sigma)"
                )))
            }
        };
    }
    if let Some(values) = args.values {
        sweep.values = values
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    CliError::Config(format!("sweep value '{v}' is not a number"))
                })
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
    }
    apply_run_overrides(
        &mut sweep.base,
        args.model,
        args.sigma,
        args.d,
        args.sep,
        args.estimator,
        &args.seeds,
        args.out,
        args.format,
        args.epsilon,
    )?;
    sweep.validate()?;

    let var_name = match sweep.sweep_variable {
        SweepVariable::D => "d",
        SweepVariable::Sigma => "sigma",
    };
    let header = [
        var_name,
        "log_z",
        "G",
        "sigma_p",
        "d_e",
        "cov",
        "hps_lo",
        "hps_hi",
        "mode_excluded",
        "vol_upper",
    ];
    let nan_row = |value: f64| -> Vec<String> {
        let mut row = vec![fmt_f64(value)];
        row.extend(std::iter::repeat_with(|| "NaN".to_string()).take(header.len() - 1));
        row
    };
    let rows: Vec<Vec<String>> = sweep
        .values
        .iter()
        .map(|&value| {
            let cfg = sweep.point(value);
            sweep_row(&cfg, value).unwrap_or_else(|| nan_row(value))
        })
        .collect();

    let dir = &sweep.base.output.dir;
    write_csv(&dir.join("sweep.csv"), &header, rows.clone())?;
    if sweep.base.output.format == OutputFormat::Json {
        let json_rows: Vec<serde_json::Value> = rows
            .iter()
            .map(|row| {
                let map: serde_json::Map<String, serde_json::Value> = header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| ((*k).to_string(), serde_json::Value::String(v.clone())))
                    .collect();
                serde_json::Value::Object(map)
            })
            .collect();
        write_json(&dir.join("sweep.json"), &json_rows)?;
    }
    println!(
        "swept {} over {} values; sweep.csv written to {}",
        var_name,
        sweep.values.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let results = slf_core::validate::run_all(args.fail_fast);
    for r in &results {
        println!(
            "[{}] {} ({} ms) — {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.elapsed_ms,
            r.detail
        );
    }
    write_json(&args.out.join("validate.json"), &results)?;
    let elapsed = start.elapsed();
    if elapsed.as_secs() > 300 {
        log::warn!(
            "validate suite took {:.0} s, above the 300 s budget",
            elapsed.as_secs_f64()
        );
    }
    if let Some(first_fail) = results.iter().find(|r| !r.passed) {
        return Err(CliError::Checks(format!(
            "{} — {}",
            first_fail.name, first_fail.detail
        )));
    }
    println!(
        "all {} checks passed in {:.1} s",
        results.len(),
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
