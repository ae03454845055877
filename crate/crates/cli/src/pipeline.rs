//! The per-seed estimation pipeline shared by `analyze` and `sweep`:
//! curves -> evidence/moments -> summary -> high-probability-set report.

use rayon::prelude::*;
use serde::Serialize;
use slf_core::curves::DensityCurve;
use slf_core::estimator::{mc_ccdf, subset_ccdf, EstimatedCurves, SubsetConfig};
use slf_core::functionals::{
    log_evidence, posterior_moments_y, posterior_pdf_x, posterior_pdf_y, QuadratureOptions,
};
use slf_core::hps::{hps_report, HpsReport};
use slf_core::analytic::GaussianBallParams;
use slf_core::stats::mean_sd;
use slf_core::PosteriorSummary;

use crate::config::{EstimatorConfig, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub estimator: &'static str,
    pub n_levels_used: usize,
    pub level_log_thresholds: Vec<f64>,
    pub acceptance_rates: Vec<f64>,
    pub log_truncation_bound: f64,
    pub dropped_flat_points: usize,
}

pub struct SeedOutcome {
    pub seed: u64,
    pub summary: PosteriorSummary,
    pub hps: HpsReport,
    pub diagnostics: Diagnostics,
    pub curves: EstimatedCurves,
    pub density_x: DensityCurve,
    pub density_y: DensityCurve,
}

/// Serialized face of one seed's results for summary.json.
#[derive(Serialize)]
pub struct SeedRecord<'a> {
    pub seed: u64,
    pub summary: &'a PosteriorSummary,
    pub hps: &'a HpsReport,
    pub diagnostics: &'a Diagnostics,
}

fn estimate_curves(cfg: &RunConfig, seed: u64) -> Result<EstimatedCurves, CliError> {
    match &cfg.estimator {
        EstimatorConfig::Analytic { n_points } => {
            let params = GaussianBallParams::new(cfg.model.sigma, cfg.model.d)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let slf = params.slf_curve(*n_points);
            let ccdf = slf.to_ccdf();
            Ok(EstimatedCurves {
                ccdf,
                slf,
                level_log_thresholds: Vec::new(),
                n_levels_used: 1,
                acceptance_rates: Vec::new(),
            })
        }
        EstimatorConfig::Mc { n } => {
            let model = cfg.model.build()?;
            mc_ccdf(model.as_ref(), *n, seed).map_err(|e| CliError::Run(e.to_string()))
        }
        EstimatorConfig::Subset {
            p0,
            n_per_level,
            max_levels,
            stop_rel_increment,
        } => {
            let model = cfg.model.build()?;
            let sub = SubsetConfig {
                p0: *p0,
                n_per_level: *n_per_level,
                max_levels: *max_levels,
                seed,
                stop_rel_increment: *stop_rel_increment,
            };
            subset_ccdf(model.as_ref(), &sub).map_err(|e| CliError::Run(e.to_string()))
        }
    }
}

pub fn run_seed(cfg: &RunConfig, seed: u64) -> Result<SeedOutcome, CliError> {
    let curves = estimate_curves(cfg, seed)?;
    // every zoo model has likelihood supremum 1 (log 0)
    let log_l_sup = 0.0;
    let opts = QuadratureOptions::default();
    let ev = log_evidence(&curves.slf, Some(log_l_sup), &opts)
        .map_err(|e| CliError::Run(e.to_string()))?;
    let (mean_y, var_y) = posterior_moments_y(&curves.slf, ev.log_z, &opts)
        .map_err(|e| CliError::Run(e.to_string()))?;
    let summary = PosteriorSummary::from_moments(ev.log_z, mean_y, var_y)
        .map_err(|e| CliError::Run(e.to_string()))?;
    let epsilon = cfg.epsilon_rule.epsilon(&summary);
    let hps =
        hps_report(&summary, epsilon, log_l_sup).map_err(|e| CliError::Run(e.to_string()))?;
    let density_x = posterior_pdf_x(&curves.slf, summary.log_z);
    let y = posterior_pdf_y(&curves.ccdf, summary.log_z)
        .map_err(|e| CliError::Run(e.to_string()))?;
    let diagnostics = Diagnostics {
        estimator: cfg.estimator.kind_name(),
        n_levels_used: curves.n_levels_used,
        level_log_thresholds: curves.level_log_thresholds.clone(),
        acceptance_rates: curves.acceptance_rates.clone(),
        log_truncation_bound: ev.log_truncation_bound,
        dropped_flat_points: y.dropped_flat,
    };
    Ok(SeedOutcome {
        seed,
        summary,
        hps,
        diagnostics,
        curves,
        density_x,
        density_y: y.curve,
    })
}

/// All seeds, in parallel, results in seed order.
pub fn run_seeds(cfg: &RunConfig) -> Result<Vec<SeedOutcome>, CliError> {
    cfg.seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed))
        .collect()
}

#[derive(Serialize)]
pub struct BootstrapStat {
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

#[derive(Serialize)]
pub struct Bootstrap {
    pub n_seeds: usize,
    pub log_z: BootstrapStat,
    pub info_gain: BootstrapStat,
    pub effective_dim: BootstrapStat,
}

fn stat(values: &[f64]) -> BootstrapStat {
    let (mean, sd) = mean_sd(values);
    BootstrapStat {
        mean,
        sd,
        se: sd / (values.len() as f64).sqrt(),
    }
}

pub fn bootstrap(outcomes: &[SeedOutcome]) -> Bootstrap {
    let zs: Vec<f64> = outcomes.iter().map(|o| o.summary.log_z).collect();
    let gs: Vec<f64> = outcomes.iter().map(|o| o.summary.info_gain).collect();
    let ds: Vec<f64> = outcomes.iter().map(|o| o.summary.effective_dim).collect();
    Bootstrap {
        n_seeds: outcomes.len(),
        log_z: stat(&zs),
        info_gain: stat(&gs),
        effective_dim: stat(&ds),
    }
}
