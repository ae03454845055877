//! Run and sweep configuration: JSON documents with flag overrides.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use slf_core::model::{BimodalModel, GaussianBallModel, GaussianConjugateModel, LikelihoodModel};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub sigma: f64,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sep: Option<f64>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<Box<dyn LikelihoodModel>, CliError> {
        let model: Box<dyn LikelihoodModel> = match self.name.as_str() {
            "gaussian-ball" => Box::new(
                GaussianBallModel::new(self.sigma, self.d)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            ),
            "gaussian-conjugate" => Box::new(
                GaussianConjugateModel::new(self.sigma, self.d)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            ),
            "bimodal" => {
                let sep = self.sep.ok_or_else(|| {
                    CliError::Config("bimodal model needs the `sep` parameter".into())
                })?;
                Box::new(
                    BimodalModel::new(sep, self.sigma, self.d)
                        .map_err(|e| CliError::Config(e.to_string()))?,
                )
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown model '{other}' (expected gaussian-ball, gaussian-conjugate, or bimodal)"
                )))
            }
        };
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EstimatorConfig {
    /// Closed-form curves; gaussian-ball only.
    Analytic {
        #[serde(default = "default_n_points")]
        n_points: usize,
    },
    /// Plain Monte Carlo over prior draws.
    Mc {
        #[serde(default = "default_n_mc")]
        n: usize,
    },
    /// Level-chained rare-tail estimator.
    Subset {
        #[serde(default = "default_p0")]
        p0: f64,
        #[serde(default = "default_n_per_level")]
        n_per_level: usize,
        #[serde(default = "default_max_levels")]
        max_levels: usize,
        #[serde(default = "default_stop_rel_increment")]
        stop_rel_increment: f64,
    },
}

fn default_n_points() -> usize {
    10_000
}
fn default_n_mc() -> usize {
    100_000
}
fn default_p0() -> f64 {
    0.1
}
fn default_n_per_level() -> usize {
    1000
}
fn default_max_levels() -> usize {
    200
}
fn default_stop_rel_increment() -> f64 {
    1e-6
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig::Subset {
            p0: default_p0(),
            n_per_level: default_n_per_level(),
            max_levels: default_max_levels(),
            stop_rel_increment: default_stop_rel_increment(),
        }
    }
}

impl EstimatorConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EstimatorConfig::Analytic { .. } => "analytic",
            EstimatorConfig::Mc { .. } => "mc",
            EstimatorConfig::Subset { .. } => "subset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EpsilonRule {
    ThreeSigma,
    SqrtDe,
    Explicit { value: f64 },
}

impl EpsilonRule {
    pub fn epsilon(&self, summary: &slf_core::PosteriorSummary) -> f64 {
        match self {
            EpsilonRule::ThreeSigma => 3.0 * summary.sigma_p,
            EpsilonRule::SqrtDe => summary.effective_dim.sqrt(),
            EpsilonRule::Explicit { value } => *value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    pub epsilon_rule: EpsilonRule,
    pub seeds: Vec<u64>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig {
                name: "gaussian-ball".into(),
                sigma: 0.01,
                d: 10,
                sep: None,
            },
            estimator: EstimatorConfig::default(),
            epsilon_rule: EpsilonRule::ThreeSigma,
            seeds: vec![0],
            output: OutputConfig {
                dir: PathBuf::from("slf-out"),
                format: OutputFormat::Csv,
            },
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        if matches!(self.estimator, EstimatorConfig::Analytic { .. })
            && self.model.name != "gaussian-ball"
        {
            return Err(CliError::Config(format!(
                "the analytic estimator only covers gaussian-ball, not '{}'",
                self.model.name
            )));
        }
        if let EpsilonRule::Explicit { value } = self.epsilon_rule {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CliError::Config(format!(
                    "explicit epsilon must be positive and finite, got {value}"
                )));
            }
        }
        // fail early on malformed model parameters
        self.model.build().map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    D,
    Sigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub sweep_variable: SweepVariable,
    pub values: Vec<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.base.validate()?;
        if self.values.is_empty() {
            return Err(CliError::Config("sweep needs at least one value".into()));
        }
        for w in self.values.windows(2) {
            if w[1] <= w[0] {
                return Err(CliError::Config(
                    "sweep values must be strictly increasing".into(),
                ));
            }
        }
        for &v in &self.values {
            match self.sweep_variable {
                SweepVariable::D => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(CliError::Config(format!(
                            "dimension sweep value {v} is not a positive integer"
                        )));
                    }
                }
                SweepVariable::Sigma => {
                    if !(v > 0.0) {
                        return Err(CliError::Config(format!(
                            "sigma sweep value {v} is not positive"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The base configuration with the sweep variable replaced by `value`.
    pub fn point(&self, value: f64) -> RunConfig {
        let mut cfg = self.base.clone();
        match self.sweep_variable {
            SweepVariable::D => cfg.model.d = value as usize,
            SweepVariable::Sigma => cfg.model.sigma = value,
        }
        cfg
    }
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}
