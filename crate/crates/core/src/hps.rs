//! High-probability-set diagnostics.
//!
//! For ε > 0 the set A_ε collects the x whose posterior log-density stays
//! within ε of the information gain G: |ln p_X(x) - G| <= ε. Its posterior
//! probability obeys the Chebyshev bound 1 - σ_p²/ε², and its Lebesgue
//! measure in x (the prior has unit volume there) is pinched between
//! (1 - σ_p²/ε²) e^-(G+ε) and e^(-G+ε). Because ln p_X = ln L - ln z, the
//! set is equivalently the band mean_Y ± ε in ln L, which is what makes
//! mode exclusion a one-line check against the likelihood supremum.

use crate::curves::SlfCurve;
use crate::error::{Error, Result};
use crate::functionals::sample_posterior_x;
use crate::summary::PosteriorSummary;

/// Closed-form description of one high-probability set.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HpsReport {
    pub epsilon: f64,
    /// The set's centre in ln p_X, i.e. the information gain.
    pub center_g: f64,
    /// Chebyshev lower bound on the posterior probability, floored at 0.
    pub prob_lower_bound: f64,
    pub vol_lower: f64,
    pub vol_upper: f64,
    /// Membership band in ln p_X: [G - ε, G + ε].
    pub ln_px_interval: (f64, f64),
    /// The same band in ln L: [mean_Y - ε, mean_Y + ε].
    pub ln_l_interval: (f64, f64),
    /// Whether the likelihood supremum falls outside the ln L band.
    pub mode_excluded: bool,
    /// ε < σ_p makes the Chebyshev bound vacuous; flagged so callers do not
    /// read significance into a floored zero.
    pub chebyshev_vacuous: bool,
}

/// Fill an `HpsReport` from the scalar summary and the declared
/// log-likelihood supremum. Interval membership is closed, so a supremum
/// sitting exactly on the boundary counts as included.
pub fn hps_report(summary: &PosteriorSummary, epsilon: f64, log_l_sup: f64) -> Result<HpsReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let g = summary.info_gain;
    let ratio = summary.var_y / (epsilon * epsilon);
    let prob_lower_bound = (1.0 - ratio).max(0.0);
    let vol_lower = prob_lower_bound * (-(g + epsilon)).exp();
    let vol_upper = (-g + epsilon).exp();
    let ln_l_interval = (summary.mean_y - epsilon, summary.mean_y + epsilon);
    let mode_excluded = !(log_l_sup >= ln_l_interval.0 && log_l_sup <= ln_l_interval.1);
    Ok(HpsReport {
        epsilon,
        center_g: g,
        prob_lower_bound,
        vol_lower,
        vol_upper,
        ln_px_interval: (g - epsilon, g + epsilon),
        ln_l_interval,
        mode_excluded,
        chebyshev_vacuous: epsilon < summary.sigma_p,
    })
}

/// Is x a member of A_ε? Evaluates ln p_X(x) = ln L(x) - ln z by curve
/// interpolation; x outside the tabulated range is an error.
pub fn hps_membership(
    x: f64,
    slf: &SlfCurve,
    log_z: f64,
    summary: &PosteriorSummary,
    epsilon: f64,
) -> Result<bool> {
    let log_px = slf.log_l_at(x)? - log_z;
    Ok((log_px - summary.info_gain).abs() <= epsilon)
}

/// Fraction of posterior draws that land in A_ε. Draws outside the
/// tabulated x-range use the nearest endpoint's ln L (flat extension).
pub fn empirical_hps_probability(
    slf: &SlfCurve,
    log_z: f64,
    summary: &PosteriorSummary,
    epsilon: f64,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if n < 1000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1000 draws for a stable fraction, got {n}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let xs = sample_posterior_x(slf, log_z, n, seed);
    let members = xs
        .iter()
        .filter(|&&x| {
            let log_px = slf.log_l_at_clamped(x) - log_z;
            (log_px - summary.info_gain).abs() <= epsilon
        })
        .count();
    Ok(members as f64 / n as f64)
}

/// Measure of A_ε computed directly from the curve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HpsVolume {
    pub measure: f64,
    /// The membership region reaches below the smallest tabulated x, where
    /// the flat head extension stands in for the true curve; the measure is
    /// then only as trustworthy as that extension.
    pub extends_below_tabulated: bool,
}

/// Lebesgue measure of A_ε in x. ln p_X is monotone in x, so the set is a
/// single interval; its endpoints come from inverse interpolation, with the
/// flat head/tail extensions closing off the ends of the curve.
pub fn hps_volume_quadrature(
    slf: &SlfCurve,
    log_z: f64,
    summary: &PosteriorSummary,
    epsilon: f64,
) -> Result<HpsVolume> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    // the ln p_X band [G - eps, G + eps] translated into ln L
    let band_lo = summary.info_gain - epsilon + log_z;
    let band_hi = summary.info_gain + epsilon + log_z;

    let first_l = slf.points()[0].1;
    let last_l = slf.points()[slf.len() - 1].1;

    // upper end in x: where ln L drops to band_lo
    let x_hi = if last_l >= band_lo {
        1.0 // flat tail stays inside the band
    } else {
        match slf.smallest_x_with_log_l_at_most(band_lo) {
            // the crossing sits inside the tabulated range
            Some(x) => x,
            None => unreachable!("last point is below band_lo"),
        }
    };

    // lower end in x: where ln L rises above band_hi
    let (x_lo, extends_below) = if first_l <= band_hi {
        // even the head is inside the band; under the flat extension the
        // region reaches x = 0
        (0.0, true)
    } else {
        match slf.largest_x_with_log_l_at_least(band_hi) {
            Some(x) => (x, false),
            None => unreachable!("first point is above band_hi"),
        }
    };

    Ok(HpsVolume {
        measure: (x_hi - x_lo).max(0.0),
        extends_below_tabulated: extends_below,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::GaussianBallParams;
    use crate::curves::SlfCurve;
    use crate::functionals::{log_evidence, summarize, QuadratureOptions};

    fn analytic_setup(sigma: f64, d: usize) -> (GaussianBallParams, SlfCurve, f64, PosteriorSummary) {
        let p = GaussianBallParams::new(sigma, d).unwrap();
        let slf = p.slf_curve(10_000);
        let ev = log_evidence(&slf, Some(0.0), &QuadratureOptions::default()).unwrap();
        let s = summarize(&slf, Some(0.0), &QuadratureOptions::default()).unwrap();
        (p, slf, ev.log_z, s)
    }

    #[test]
    fn chebyshev_bounds_at_reference_epsilons() {
        let p = GaussianBallParams::new(0.01, 100).unwrap();
        let s = p.summary();
        let r = hps_report(&s, 3.0 * s.sigma_p, 0.0).unwrap();
        assert!((r.prob_lower_bound - 8.0 / 9.0).abs() < 1e-12);
        let r = hps_report(&s, s.effective_dim.sqrt(), 0.0).unwrap();
        assert!((r.prob_lower_bound - 0.5).abs() < 1e-12);
    }

    #[test]
    fn high_dimension_band_excludes_the_mode() {
        let p = GaussianBallParams::new(0.01, 100).unwrap();
        let s = p.summary();
        let r = hps_report(&s, 3.0 * s.sigma_p, 0.0).unwrap();
        assert!((r.ln_l_interval.0 - (-71.21320343559643)).abs() < 1e-9);
        assert!((r.ln_l_interval.1 - (-28.78679656440357)).abs() < 1e-9);
        assert!(r.mode_excluded);
        assert!(!r.chebyshev_vacuous);
        assert!(r.vol_lower <= r.vol_upper);
    }

    #[test]
    fn mode_exclusion_flips_between_18_and_19() {
        let mut last = false;
        for d in 2..=30 {
            let p = GaussianBallParams::new(0.01, d).unwrap();
            let s = p.summary();
            let r = hps_report(&s, 3.0 * s.sigma_p, 0.0).unwrap();
            if d <= 18 {
                assert!(!r.mode_excluded, "mode excluded too early at d={d}");
            } else {
                assert!(r.mode_excluded, "mode not excluded at d={d}");
            }
            if d >= 3 {
                // transition happens exactly once
                assert!(r.mode_excluded >= last);
            }
            last = r.mode_excluded;
        }
    }

    #[test]
    fn vacuous_epsilon_is_flagged_and_floored() {
        let p = GaussianBallParams::new(0.01, 100).unwrap();
        let s = p.summary();
        let r = hps_report(&s, 0.5 * s.sigma_p, 0.0).unwrap();
        assert_eq!(r.prob_lower_bound, 0.0);
        assert_eq!(r.vol_lower, 0.0);
        assert!(r.chebyshev_vacuous);
        assert!(hps_report(&s, 0.0, 0.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let (p, slf, log_z, s) = analytic_setup(0.01, 100);
        let eps = 3.0 * s.sigma_p;
        // x at the posterior-typical likelihood level is a member
        let x_typ = (-230.0f64).exp();
        assert!(hps_membership(x_typ, &slf, log_z, &s, eps).unwrap());
        // x = 1 sits ~4950 nats below the centre
        assert!(!hps_membership(1.0, &slf, log_z, &s, eps).unwrap());
        // a point whose log-density equals the centre is a member for any eps
        let x_center = slf
            .smallest_x_with_log_l_at_most(s.mean_y)
            .expect("centre level is tabulated");
        assert!(hps_membership(x_center, &slf, log_z, &s, 1e-9).unwrap());
        // outside the tabulated range
        assert!(hps_membership(p.log_evidence().exp() * 1e-30, &slf, log_z, &s, eps).is_err());
    }

    #[test]
    fn empirical_probability_saturates_and_beats_bounds() {
        let (_, slf, log_z, s) = analytic_setup(0.01, 10);
        let everything = empirical_hps_probability(&slf, log_z, &s, 1e9, 10_000, 1).unwrap();
        assert_eq!(everything, 1.0);

        let p3 = empirical_hps_probability(&slf, log_z, &s, 3.0 * s.sigma_p, 10_000, 2).unwrap();
        assert!(p3 >= 8.0 / 9.0, "3-sigma coverage {p3}");
        assert!(p3 >= 0.95, "gamma law concentrates tighter: {p3}");

        let psq =
            empirical_hps_probability(&slf, log_z, &s, s.effective_dim.sqrt(), 10_000, 3).unwrap();
        assert!(psq >= 0.5, "sqrt-d_e coverage {psq}");

        assert!(empirical_hps_probability(&slf, log_z, &s, 1.0, 100, 1).is_err());
    }

    #[test]
    fn volume_of_constant_likelihood_is_unity() {
        let slf = SlfCurve::new(vec![(1e-6, -1.0), (0.5, -1.0), (1.0, -1.0)]).unwrap();
        let s = PosteriorSummary::from_moments(-1.0, -1.0, 0.0).unwrap();
        let v = hps_volume_quadrature(&slf, -1.0, &s, 0.7).unwrap();
        assert_eq!(v.measure, 1.0);
        assert!(v.extends_below_tabulated);
    }

    #[test]
    fn volume_lands_inside_closed_form_bounds() {
        let (_, slf, log_z, s) = analytic_setup(0.01, 100);
        let eps = 3.0 * s.sigma_p;
        let r = hps_report(&s, eps, 0.0).unwrap();
        let v = hps_volume_quadrature(&slf, log_z, &s, eps).unwrap();
        assert!(!v.extends_below_tabulated);
        assert!(
            v.measure >= r.vol_lower && v.measure <= r.vol_upper * (1.0 + 1e-6),
            "measure {} outside [{}, {}]",
            v.measure,
            r.vol_lower,
            r.vol_upper
        );
        // closed-form endpoints: x = (2 sigma^2 u)^(d/2) at u = 50 -/+ eps
        let x_at = |u: f64| (50.0 * (2e-4 * u).ln()).exp();
        let expect = x_at(50.0 + eps) - x_at(50.0 - eps);
        assert!(
            (v.measure - expect).abs() / expect < 1e-3,
            "measure {} vs closed form {}",
            v.measure,
            expect
        );
    }

    #[test]
    fn volume_respects_upper_bound_across_models() {
        for &(sigma, d) in &[(0.01, 2usize), (0.01, 10), (0.01, 100), (0.1, 5)] {
            let (_, slf, log_z, s) = analytic_setup(sigma, d);
            for &eps in &[1.5 * s.sigma_p, 3.0 * s.sigma_p, s.effective_dim.sqrt()] {
                let r = hps_report(&s, eps, 0.0).unwrap();
                let v = hps_volume_quadrature(&slf, log_z, &s, eps).unwrap();
                assert!(
                    v.measure <= r.vol_upper * (1.0 + 1e-6),
                    "sigma={sigma} d={d} eps={eps}: {} > {}",
                    v.measure,
                    r.vol_upper
                );
                assert!(v.measure >= r.vol_lower);
            }
        }
    }

    #[test]
    fn band_half_width_equals_sqrt_d_at_fixed_coverage() {
        for d in [2usize, 10, 100] {
            let p = GaussianBallParams::new(0.01, d).unwrap();
            let s = p.summary();
            let r = hps_report(&s, s.effective_dim.sqrt(), 0.0).unwrap();
            let half_width = 0.5 * (r.ln_l_interval.1 - r.ln_l_interval.0);
            assert!(
                (half_width - (d as f64).sqrt()).abs() < 1e-12 * (d as f64).sqrt(),
                "half width {half_width} for d={d}"
            );
            assert!((r.prob_lower_bound - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_volume_and_cov_shrink_with_dimension() {
        let mut last_vol = f64::INFINITY;
        let mut last_cov = f64::INFINITY;
        for d in (10..=200).step_by(10) {
            let p = GaussianBallParams::new(0.01, d).unwrap();
            let s = p.summary();
            let r = hps_report(&s, s.effective_dim.sqrt(), 0.0).unwrap();
            assert!(r.vol_upper < last_vol, "volume bound not decreasing at d={d}");
            let cov = s.sigma_p / s.info_gain;
            assert!(cov < last_cov, "c.o.v. not decreasing at d={d}");
            last_vol = r.vol_upper;
            last_cov = cov;
        }
    }

    #[test]
    fn empirical_probability_clears_chebyshev_with_sampling_slack() {
        for &d in &[2usize, 10, 100] {
            let (_, slf, log_z, s) = analytic_setup(0.01, d);
            for (i, &eps) in [1.5 * s.sigma_p, 3.0 * s.sigma_p, s.effective_dim.sqrt()]
                .iter()
                .enumerate()
            {
                let n = 10_000;
                let p_hat =
                    empirical_hps_probability(&slf, log_z, &s, eps, n, 100 + i as u64).unwrap();
                let bound = (1.0 - s.var_y / (eps * eps)).max(0.0);
                let se = (bound.max(1e-12) * (1.0 - bound) / n as f64).sqrt();
                assert!(
                    p_hat >= bound - 3.0 * se,
                    "d={d} eps={eps}: empirical {p_hat} below bound {bound}"
                );
            }
        }
    }
}
