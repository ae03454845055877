//! Reduce a d-dimensional Bayesian inference problem to one dimension via
//! the likelihood CCDF / sorted-likelihood representation, then compute
//! evidence, information gain, effective dimensionality, and
//! high-probability-set diagnostics from the resulting curves.
//!
//! The pieces compose left to right: a [`model::LikelihoodModel`] feeds an
//! estimator ([`estimator::mc_ccdf`] or [`estimator::subset_ccdf`]), the
//! estimated [`curves::SlfCurve`] feeds the posterior functionals
//! ([`functionals::summarize`] and friends), and the resulting
//! [`summary::PosteriorSummary`] feeds the high-probability-set reports in
//! [`hps`]. The [`analytic`] module carries the closed-form benchmark the
//! whole pipeline is validated against.

pub mod analytic;
pub mod curves;
pub mod error;
pub mod estimator;
pub mod functionals;
pub mod hps;
pub mod math;
pub mod model;
pub mod oracle;
pub mod stats;
pub mod summary;
pub mod validate;

pub use curves::{CcdfCurve, DensityCurve, DensityDomain, SlfCurve};
pub use error::{Error, Result};
pub use estimator::{EstimatedCurves, SubsetConfig};
pub use model::LikelihoodModel;
pub use summary::PosteriorSummary;
