//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was handed a parameter outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A curve failed its monotonicity / range / cardinality invariants.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// The model's log-likelihood returned NaN.
    #[error("NaN log-likelihood at {context}")]
    NanLikelihood { context: String },

    /// The untabulated head of the curve could hold too much evidence mass;
    /// the curve is too short for a trustworthy integral.
    #[error(
        "truncation bound exceeds {max_rel:e} of the evidence \
         (log bound {log_bound:.4}, log evidence {log_evidence:.4}); \
         rerun the estimator with more levels"
    )]
    TruncationTooLarge {
        log_bound: f64,
        log_evidence: f64,
        max_rel: f64,
    },

    /// Quadrature produced an inconsistent moment (e.g. variance below -1e-9).
    #[error("quadrature inconsistency: {0}")]
    QuadratureInconsistency(String),
}
