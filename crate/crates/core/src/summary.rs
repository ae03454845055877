//! Scalar summary of one posterior: evidence, information gain, and the
//! effective dimensionality implied by the posterior spread of ln L.

use crate::error::{Error, Result};

/// Slack allowed below zero for the information gain; quadrature noise may
/// leave a KL divergence marginally negative.
pub const KL_TOLERANCE: f64 = 1e-6;

/// Posterior summary derived from the moments of Y = ln L(X).
///
/// `info_gain` is the KL divergence from prior to posterior in nats;
/// `effective_dim` is twice the posterior variance of ln L, which recovers
/// the parameter count when the posterior is multivariate normal.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PosteriorSummary {
    pub log_z: f64,
    pub mean_y: f64,
    pub var_y: f64,
    pub info_gain: f64,
    pub sigma_p: f64,
    pub effective_dim: f64,
}

impl PosteriorSummary {
    /// Build from evidence and Y-moments; the derived fields are computed
    /// here so `info_gain == mean_y - log_z` and `effective_dim == 2 var_y`
    /// hold exactly.
    pub fn from_moments(log_z: f64, mean_y: f64, var_y: f64) -> Result<Self> {
        if !log_z.is_finite() || !mean_y.is_finite() || !var_y.is_finite() {
            return Err(Error::QuadratureInconsistency(format!(
                "non-finite summary inputs: log_z={log_z}, mean_y={mean_y}, var_y={var_y}"
            )));
        }
        if var_y < 0.0 {
            return Err(Error::QuadratureInconsistency(format!(
                "negative posterior variance {var_y}"
            )));
        }
        let info_gain = mean_y - log_z;
        if info_gain < -KL_TOLERANCE {
            return Err(Error::QuadratureInconsistency(format!(
                "information gain {info_gain} below -{KL_TOLERANCE} violates KL non-negativity"
            )));
        }
        Ok(PosteriorSummary {
            log_z,
            mean_y,
            var_y,
            info_gain,
            sigma_p: var_y.sqrt(),
            effective_dim: 2.0 * var_y,
        })
    }
}
