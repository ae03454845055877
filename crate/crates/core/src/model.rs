//! The inference-problem abstraction and the built-in model zoo.
//!
//! A model is a prior sampler plus a log-likelihood over θ in R^d. Priors
//! are expressed as deterministic transforms of a standard-normal latent
//! vector; that is what lets the tail estimator run prior-invariant
//! conditional MCMC without ever needing a prior density. Likelihoods are
//! handled in log space end-to-end: for narrow likelihoods in high dimension
//! the interesting values sit thousands of nats below zero, far past
//! floating-point underflow in linear space.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::std_normal_cdf;

/// One inference problem: dimension, prior (as a latent-normal transform),
/// and log-likelihood.
///
/// This trait is the extension point for user models; everything else in
/// the crate consumes it through `&dyn LikelihoodModel`.
pub trait LikelihoodModel: Send + Sync {
    /// Parameter dimension d.
    fn dimension(&self) -> usize;

    /// Number of standard-normal inputs one prior draw consumes.
    fn latent_dimension(&self) -> usize;

    /// Map a latent standard-normal vector to a prior draw θ.
    fn prior_transform(&self, latent: &[f64]) -> Vec<f64>;

    /// ln L(θ); may be -inf, must never be NaN for in-support θ.
    fn log_likelihood(&self, theta: &[f64]) -> f64;

    /// ln of the likelihood supremum, when known.
    fn log_likelihood_sup(&self) -> Option<f64>;

    /// Draw θ from the prior. Deterministic given the generator state.
    fn sample_prior(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.prior_transform(&draw_latent(self.latent_dimension(), rng))
    }
}

/// Draw `n` standard normals from `rng`.
pub fn draw_latent(n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn check_sigma_d(sigma: f64, d: usize) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    if d < 1 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(())
}

/// Unit-ball uniform prior with an isotropic Gaussian likelihood
/// exp(-0.5 σ⁻² θᵀθ) centred at the origin.
///
/// The ball is sampled exactly in any dimension as a normalized Gaussian
/// direction times a U^(1/d) radius; rejection sampling would collapse for
/// d ≳ 10.
#[derive(Debug, Clone)]
pub struct GaussianBallModel {
    sigma: f64,
    dim: usize,
    half_inv_sigma_sq: f64,
}

impl GaussianBallModel {
    pub fn new(sigma: f64, d: usize) -> Result<Self> {
        check_sigma_d(sigma, d)?;
        Ok(GaussianBallModel {
            sigma,
            dim: d,
            half_inv_sigma_sq: 0.5 / (sigma * sigma),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Latent layout shared by the ball-prior models: d coordinates give the
/// direction, one extra drives the radius through the normal CDF.
fn ball_transform(dim: usize, latent: &[f64]) -> Vec<f64> {
    debug_assert_eq!(latent.len(), dim + 1);
    let norm_sq: f64 = latent[..dim].iter().map(|v| v * v).sum();
    let norm = norm_sq.sqrt();
    let radius = std_normal_cdf(latent[dim]).powf(1.0 / dim as f64);
    if norm == 0.0 {
        // measure-zero latent; land at the centre
        return vec![0.0; dim];
    }
    latent[..dim].iter().map(|v| v / norm * radius).collect()
}

impl LikelihoodModel for GaussianBallModel {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn latent_dimension(&self) -> usize {
        self.dim + 1
    }

    fn prior_transform(&self, latent: &[f64]) -> Vec<f64> {
        ball_transform(self.dim, latent)
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let r_sq: f64 = theta.iter().map(|t| t * t).sum();
        -self.half_inv_sigma_sq * r_sq
    }

    fn log_likelihood_sup(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Standard-normal prior with the same Gaussian likelihood; everything is
/// conjugate, so evidence and information gain have closed forms used as an
/// independent oracle.
#[derive(Debug, Clone)]
pub struct GaussianConjugateModel {
    sigma: f64,
    dim: usize,
    half_inv_sigma_sq: f64,
}

impl GaussianConjugateModel {
    pub fn new(sigma: f64, d: usize) -> Result<Self> {
        check_sigma_d(sigma, d)?;
        Ok(GaussianConjugateModel {
            sigma,
            dim: d,
            half_inv_sigma_sq: 0.5 / (sigma * sigma),
        })
    }

    /// ln z = -(d/2) ln(1 + σ⁻²).
    pub fn closed_form_log_evidence(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        -(self.dim as f64 / 2.0) * (1.0 / s2).ln_1p()
    }

    /// KL(posterior || prior) = (d/2) [ln(1 + σ⁻²) - 1/(1 + σ²)].
    pub fn closed_form_info_gain(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        (self.dim as f64 / 2.0) * ((1.0 / s2).ln_1p() - 1.0 / (1.0 + s2))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl LikelihoodModel for GaussianConjugateModel {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn latent_dimension(&self) -> usize {
        self.dim
    }

    fn prior_transform(&self, latent: &[f64]) -> Vec<f64> {
        latent.to_vec()
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let r_sq: f64 = theta.iter().map(|t| t * t).sum();
        -self.half_inv_sigma_sq * r_sq
    }

    fn log_likelihood_sup(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Unit-ball prior with a likelihood that is the max of two Gaussian bumps
/// at ±(sep/2)·e₁ — a multimodality stress case with no closed form; the
/// low-dimensional oracle is dense grid quadrature.
#[derive(Debug, Clone)]
pub struct BimodalModel {
    sep: f64,
    sigma: f64,
    dim: usize,
    half_inv_sigma_sq: f64,
}

impl BimodalModel {
    /// `sep` of zero is allowed and degenerates to the single-bump model.
    pub fn new(sep: f64, sigma: f64, d: usize) -> Result<Self> {
        check_sigma_d(sigma, d)?;
        if !(sep >= 0.0) || !sep.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mode separation must be non-negative and finite, got {sep}"
            )));
        }
        Ok(BimodalModel {
            sep,
            sigma,
            dim: d,
            half_inv_sigma_sq: 0.5 / (sigma * sigma),
        })
    }

    pub fn separation(&self) -> f64 {
        self.sep
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl LikelihoodModel for BimodalModel {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn latent_dimension(&self) -> usize {
        self.dim + 1
    }

    fn prior_transform(&self, latent: &[f64]) -> Vec<f64> {
        ball_transform(self.dim, latent)
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let half = 0.5 * self.sep;
        let mut plus = 0.0;
        let mut minus = 0.0;
        for (i, &t) in theta.iter().enumerate() {
            if i == 0 {
                plus += (t - half) * (t - half);
                minus += (t + half) * (t + half);
            } else {
                plus += t * t;
                minus += t * t;
            }
        }
        -self.half_inv_sigma_sq * plus.min(minus)
    }

    fn log_likelihood_sup(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::stats::{ks_critical, ks_statistic_sorted};

    fn draws(model: &dyn LikelihoodModel, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| model.sample_prior(&mut rng)).collect()
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(GaussianBallModel::new(0.0, 3).is_err());
        assert!(GaussianBallModel::new(-1.0, 3).is_err());
        assert!(GaussianBallModel::new(0.1, 0).is_err());
        assert!(GaussianConjugateModel::new(f64::NAN, 3).is_err());
        assert!(BimodalModel::new(-0.5, 0.1, 2).is_err());
        assert!(BimodalModel::new(1.0, 0.0, 2).is_err());
        assert!(BimodalModel::new(0.0, 0.1, 2).is_ok());
    }

    #[test]
    fn ball_likelihood_at_origin_and_one_sigma() {
        let m = GaussianBallModel::new(0.01, 100).unwrap();
        assert_eq!(m.log_likelihood(&vec![0.0; 100]), 0.0);

        let m = GaussianBallModel::new(0.01, 2).unwrap();
        // ||theta|| = sigma
        let v = m.log_likelihood(&[0.01, 0.0]);
        assert!((v - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn ball_radius_second_moment_matches_radial_integral() {
        // E||theta||^2 for the uniform d-ball is d/(d+2); for d = 3 that is 3/5.
        // 3-sigma band for 1e5 draws (var of r^2 is 3/7 - 9/25).
        let m = GaussianBallModel::new(0.1, 3).unwrap();
        let n = 100_000;
        let mean: f64 = draws(&m, n, 7)
            .iter()
            .map(|t| t.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / n as f64;
        let var: f64 = 3.0 / 7.0 - (3.0f64 / 5.0).powi(2);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - 0.6).abs() < 3.0 * se,
            "mean r^2 {mean} not within 3 SE of 0.6"
        );
    }

    #[test]
    fn same_seed_gives_bit_identical_draws() {
        for (a, b) in [
            (
                draws(&GaussianBallModel::new(0.05, 7).unwrap(), 100, 42),
                draws(&GaussianBallModel::new(0.05, 7).unwrap(), 100, 42),
            ),
            (
                draws(&GaussianConjugateModel::new(1.0, 4).unwrap(), 100, 42),
                draws(&GaussianConjugateModel::new(1.0, 4).unwrap(), 100, 42),
            ),
            (
                draws(&BimodalModel::new(1.0, 0.05, 2).unwrap(), 100, 42),
                draws(&BimodalModel::new(1.0, 0.05, 2).unwrap(), 100, 42),
            ),
        ] {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ball_radius_distribution_is_exact() {
        // ||theta||^d must be uniform on (0,1): KS at the 1e-3 significance level.
        let m = GaussianBallModel::new(0.1, 5).unwrap();
        let n = 10_000;
        let mut rd: Vec<f64> = draws(&m, n, 3)
            .iter()
            .map(|t| t.iter().map(|v| v * v).sum::<f64>().sqrt().powi(5))
            .collect();
        rd.sort_by(f64::total_cmp);
        let d = ks_statistic_sorted(&rd, |x| x.clamp(0.0, 1.0));
        assert!(
            d < ks_critical(n, 1e-3),
            "KS statistic {d} above critical value"
        );
    }

    #[test]
    fn log_likelihood_never_exceeds_declared_sup() {
        let models: Vec<Box<dyn LikelihoodModel>> = vec![
            Box::new(GaussianBallModel::new(0.05, 4).unwrap()),
            Box::new(GaussianConjugateModel::new(0.7, 4).unwrap()),
            Box::new(BimodalModel::new(0.8, 0.05, 3).unwrap()),
        ];
        for m in &models {
            let sup = m.log_likelihood_sup().unwrap();
            for t in draws(m.as_ref(), 2000, 11) {
                assert!(m.log_likelihood(&t) <= sup);
            }
        }
    }

    #[test]
    fn conjugate_closed_forms() {
        // near-flat likelihood contributes nothing
        let m = GaussianConjugateModel::new(1e6, 5).unwrap();
        assert!(m.closed_form_log_evidence().abs() < 1e-9);
        assert!(m.closed_form_info_gain().abs() < 1e-9);

        let m = GaussianConjugateModel::new(1.0, 2).unwrap();
        assert!((m.closed_form_log_evidence() + std::f64::consts::LN_2).abs() < 1e-12);

        let m = GaussianConjugateModel::new(0.5, 1).unwrap();
        assert!((m.closed_form_log_evidence() + 0.5 * 5.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn conjugate_log_evidence_matches_monte_carlo() {
        let m = GaussianConjugateModel::new(1.0, 2).unwrap();
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let l = m.log_likelihood(&m.sample_prior(&mut rng)).exp();
            sum += l;
            sum_sq += l * l;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        let z = m.closed_form_log_evidence().exp();
        assert!(
            (mean - z).abs() < 3.0 * se,
            "MC evidence {mean} not within 3 SE of {z}"
        );
    }

    #[test]
    fn conjugate_log_evidence_matches_quadrature_1d() {
        // d = 1, sigma = 0.5: z = ∫ N(0,1)(t) exp(-2 t^2) dt = 5^(-1/2)
        let m = GaussianConjugateModel::new(0.5, 1).unwrap();
        let f = |t: f64| {
            (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt() * (-2.0 * t * t).exp()
        };
        let z = crate::math::adaptive_simpson(&f, -12.0, 12.0, 1e-12);
        assert!((z.ln() - m.closed_form_log_evidence()).abs() < 1e-9);
    }

    #[test]
    fn bimodal_zero_separation_coincides_with_ball_model() {
        let bi = BimodalModel::new(0.0, 0.07, 3).unwrap();
        let ball = GaussianBallModel::new(0.07, 3).unwrap();
        for t in draws(&ball, 500, 9) {
            assert_eq!(bi.log_likelihood(&t), ball.log_likelihood(&t));
        }
        // identical priors too: same latent maps to the same point
        let latent = vec![0.3, -1.2, 0.8, 0.1];
        assert_eq!(bi.prior_transform(&latent), ball.prior_transform(&latent));
    }

    #[test]
    fn bimodal_sup_attained_at_modes() {
        let m = BimodalModel::new(1.0, 0.05, 2).unwrap();
        assert_eq!(m.log_likelihood(&[0.5, 0.0]), 0.0);
        assert_eq!(m.log_likelihood(&[-0.5, 0.0]), 0.0);
        assert!(m.log_likelihood(&[0.0, 0.0]) < -40.0);
    }
}
