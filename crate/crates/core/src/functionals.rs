//! Evidence, Y-moments, posterior densities, and posterior sampling, all
//! computed from a tabulated sorted-likelihood curve.
//!
//! The evidence is ∫₀¹ L(x) dx. Curves tabulate (x, ln L) on a grid that is
//! typically geometric in x, so panels are integrated in x with endpoints
//! combined by log-sum-exp; plain summation underflows as soon as ln L drops
//! a few hundred nats. The untabulated head [0, x_first) and tail (x_last, 1]
//! are extended flat at the nearest tabulated value; for a non-increasing L
//! the flat head is a lower bound on the head mass, and the gap up to the
//! declared likelihood supremum is reported as a truncation bound rather
//! than folded into the estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curves::{CcdfCurve, DensityCurve, DensityDomain, SlfCurve};
use crate::error::{Error, Result};
use crate::math::{log_add_exp, log_sub_exp, LogSum, SignedLogSum};
use crate::summary::PosteriorSummary;

/// Maximum tolerated ratio of head-truncation bound to evidence.
pub const MAX_TRUNCATION_REL: f64 = 1e-3;

/// Panel rule applied between tabulated points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum QuadratureMethod {
    /// Second order on the tabulated grid; the default.
    TrapezoidInX,
    /// First-order upper sum (left endpoint carries the larger L); kept for
    /// comparison with accept-reject style integrators.
    RectangleLeft,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub method: QuadratureMethod,
    pub min_points: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            method: QuadratureMethod::TrapezoidInX,
            min_points: 2,
        }
    }
}

/// Evidence with its head-truncation diagnostic, both in log form.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvidenceEstimate {
    pub log_z: f64,
    /// ln of the mass the untabulated head could still hide: x_first times
    /// the gap between the declared supremum and L(x_first), or x_first
    /// times L(x_first) when no supremum is declared.
    pub log_truncation_bound: f64,
}

/// Integral of exp(log_l) dx over [0, 1] with flat head/tail extension.
/// Shared by the public evidence entry point and the estimator's stopping
/// rule, which must not fail on intentionally short interim curves.
pub(crate) fn log_slf_integral(
    points: &[(f64, f64)],
    log_l_sup: Option<f64>,
    method: QuadratureMethod,
) -> EvidenceEstimate {
    debug_assert!(points.len() >= 2);
    let mut acc = LogSum::new();
    let (x_first, l_first) = points[0];
    let (x_last, l_last) = points[points.len() - 1];
    // flat head and tail
    acc.add(x_first.ln() + l_first);
    if x_last < 1.0 {
        acc.add((1.0 - x_last).ln() + l_last);
    }
    for w in points.windows(2) {
        let (xa, la) = w[0];
        let (xb, lb) = w[1];
        let dx = xb - xa;
        if dx <= 0.0 {
            continue;
        }
        let log_panel = match method {
            QuadratureMethod::TrapezoidInX => {
                dx.ln() - std::f64::consts::LN_2 + log_add_exp(la, lb)
            }
            QuadratureMethod::RectangleLeft => dx.ln() + la,
        };
        acc.add(log_panel);
    }
    let log_truncation_bound = match log_l_sup {
        Some(sup) if sup > l_first => x_first.ln() + log_sub_exp(sup, l_first),
        Some(_) => f64::NEG_INFINITY,
        None => x_first.ln() + l_first,
    };
    EvidenceEstimate {
        log_z: acc.log_total(),
        log_truncation_bound,
    }
}

fn check_opts(slf: &SlfCurve, opts: &QuadratureOptions) -> Result<()> {
    if opts.min_points < 2 {
        return Err(Error::InvalidParameter(
            "min_points must be at least 2".into(),
        ));
    }
    if slf.len() < opts.min_points {
        return Err(Error::InvalidParameter(format!(
            "curve has {} points, options require at least {}",
            slf.len(),
            opts.min_points
        )));
    }
    Ok(())
}

/// ln ∫₀¹ L(x) dx. Fails when the truncation bound exceeds
/// `MAX_TRUNCATION_REL` of the evidence — the curve is then too short and
/// the estimator should be rerun with more levels.
pub fn log_evidence(
    slf: &SlfCurve,
    log_l_sup: Option<f64>,
    opts: &QuadratureOptions,
) -> Result<EvidenceEstimate> {
    check_opts(slf, opts)?;
    let est = log_slf_integral(slf.points(), log_l_sup, opts.method);
    if est.log_truncation_bound > MAX_TRUNCATION_REL.ln() + est.log_z {
        return Err(Error::TruncationTooLarge {
            log_bound: est.log_truncation_bound,
            log_evidence: est.log_z,
            max_rel: MAX_TRUNCATION_REL,
        });
    }
    Ok(est)
}

/// Evidence via the other face of the same identity: ∫₀^{l_sup} X(l) dl,
/// integrated over t = ln l. Kept as an independent route for consistency
/// checks against `log_evidence`; do not replace one with the other.
pub fn log_evidence_from_ccdf(ccdf: &CcdfCurve, log_l_sup: Option<f64>) -> f64 {
    let points = ccdf.points();
    let mut acc = LogSum::new();
    let (t_first, x_first) = points[0];
    let (t_last, x_last) = points[points.len() - 1];
    // below the first tabulated level X is extended flat: ∫₀^{l_first} X dl
    if x_first > 0.0 {
        acc.add(t_first + x_first.ln());
    }
    // ∫ X(e^t) e^t dt on tabulated panels
    for w in points.windows(2) {
        let (ta, xa) = w[0];
        let (tb, xb) = w[1];
        let dt = tb - ta;
        if dt <= 0.0 {
            continue;
        }
        let ga = if xa > 0.0 {
            ta + xa.ln()
        } else {
            f64::NEG_INFINITY
        };
        let gb = if xb > 0.0 {
            tb + xb.ln()
        } else {
            f64::NEG_INFINITY
        };
        acc.add(dt.ln() - std::f64::consts::LN_2 + log_add_exp(ga, gb));
    }
    // flat tail up to the declared supremum
    if let Some(sup) = log_l_sup {
        if sup > t_last && x_last > 0.0 {
            acc.add(x_last.ln() + log_sub_exp(sup, t_last));
        }
    }
    acc.log_total()
}

/// Posterior expectation of g(Y) where Y = ln L(X) and X ~ L(x)/z, using
/// the same panel rule and flat extensions as the evidence integral.
fn posterior_expectation<G: Fn(f64) -> f64>(
    points: &[(f64, f64)],
    log_z: f64,
    g: G,
    method: QuadratureMethod,
) -> f64 {
    let mut acc = SignedLogSum::new();
    let mut add_term = |log_weight: f64, y: f64| {
        let gv = g(y);
        if gv != 0.0 && log_weight != f64::NEG_INFINITY {
            acc.add(gv, log_weight + gv.abs().ln());
        }
    };
    let (x_first, l_first) = points[0];
    let (x_last, l_last) = points[points.len() - 1];
    add_term(x_first.ln() + l_first, l_first);
    if x_last < 1.0 {
        add_term((1.0 - x_last).ln() + l_last, l_last);
    }
    for w in points.windows(2) {
        let (xa, la) = w[0];
        let (xb, lb) = w[1];
        let dx = xb - xa;
        if dx <= 0.0 {
            continue;
        }
        match method {
            QuadratureMethod::TrapezoidInX => {
                let half = dx.ln() - std::f64::consts::LN_2;
                add_term(half + la, la);
                add_term(half + lb, lb);
            }
            QuadratureMethod::RectangleLeft => {
                add_term(dx.ln() + la, la);
            }
        }
    }
    acc.total_scaled(log_z)
}

/// Posterior mean and variance of Y = ln L(X).
///
/// The variance uses the shifted two-pass form E[(Y - Ȳ)²]; the direct
/// E[Y²] - Ȳ² would cancel catastrophically once Ȳ is tens of nats from
/// zero. Tiny negative output (above -1e-9) is clamped to zero.
pub fn posterior_moments_y(
    slf: &SlfCurve,
    log_z: f64,
    opts: &QuadratureOptions,
) -> Result<(f64, f64)> {
    check_opts(slf, opts)?;
    let points = slf.points();
    let mean = posterior_expectation(points, log_z, |y| y, opts.method);
    let var = posterior_expectation(points, log_z, |y| (y - mean) * (y - mean), opts.method);
    if var < -1e-9 {
        return Err(Error::QuadratureInconsistency(format!(
            "posterior variance {var} below -1e-9"
        )));
    }
    Ok((mean, var.max(0.0)))
}

/// Evidence plus Y-moments rolled into the scalar posterior summary.
pub fn summarize(
    slf: &SlfCurve,
    log_l_sup: Option<f64>,
    opts: &QuadratureOptions,
) -> Result<PosteriorSummary> {
    let ev = log_evidence(slf, log_l_sup, opts)?;
    let (mean_y, var_y) = posterior_moments_y(slf, ev.log_z, opts)?;
    PosteriorSummary::from_moments(ev.log_z, mean_y, var_y)
}

/// Posterior log-density of X on the curve grid: ln p_X(x) = ln L(x) - ln z.
pub fn posterior_pdf_x(slf: &SlfCurve, log_z: f64) -> DensityCurve {
    let points = slf
        .points()
        .iter()
        .map(|&(x, log_l)| (x, log_l - log_z))
        .collect();
    DensityCurve::new(DensityDomain::X, points).expect("valid SLF maps to a valid density grid")
}

/// Posterior density of Y with a count of grid points dropped because the
/// CCDF was locally flat there (zero derivative, undefined density).
#[derive(Debug, Clone, PartialEq)]
pub struct YDensity {
    pub curve: DensityCurve,
    pub dropped_flat: usize,
}

/// Posterior log-density of Y = ln L via the change of variables
/// p_Y(y) = e^y |dX/dy| / z, with dX/dy = X · d(ln X)/dy evaluated by
/// centered differences on the piecewise-linear (y, ln X) interpolant.
pub fn posterior_pdf_y(ccdf: &CcdfCurve, log_z: f64) -> Result<YDensity> {
    let pts = ccdf.points();
    // keep only x > 0 (the supremum endpoint carries no Y mass)
    let usable: Vec<(f64, f64)> = pts
        .iter()
        .filter(|&&(_, x)| x > 0.0)
        .map(|&(t, x)| (t, x.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InvalidCurve(
            "need at least 3 positive-mass CCDF points for a Y density".into(),
        ));
    }
    let n = usable.len();
    let mut points = Vec::with_capacity(n);
    let mut dropped = 0usize;
    for i in 0..n {
        let (y, ln_x) = usable[i];
        let (ya, la) = if i == 0 { usable[0] } else { usable[i - 1] };
        let (yb, lb) = if i == n - 1 { usable[n - 1] } else { usable[i + 1] };
        let slope = (lb - la) / (yb - ya);
        if !(slope < 0.0) || !slope.is_finite() {
            dropped += 1;
            continue;
        }
        points.push((y, y + ln_x + (-slope).ln() - log_z));
    }
    let curve = DensityCurve::new(DensityDomain::Y, points)?;
    Ok(YDensity {
        curve,
        dropped_flat: dropped,
    })
}

/// Inverse-CDF sampling on the cumulative trapezoid of p_X; deterministic
/// given the seed. Within a panel the density is linear, so the local
/// inverse is the stable quadratic-root form.
pub fn sample_posterior_x(slf: &SlfCurve, log_z: f64, n: usize, seed: u64) -> Vec<f64> {
    #[derive(Clone, Copy)]
    struct Panel {
        x_lo: f64,
        x_hi: f64,
        // ratio of right to left density, 1.0 for the flat extensions
        ratio: f64,
        weight: f64,
    }

    let points = slf.points();
    let mut panels: Vec<Panel> = Vec::with_capacity(points.len() + 1);
    let (x_first, l_first) = points[0];
    let (x_last, l_last) = points[points.len() - 1];
    panels.push(Panel {
        x_lo: 0.0,
        x_hi: x_first,
        ratio: 1.0,
        weight: (x_first.ln() + l_first - log_z).exp(),
    });
    for w in points.windows(2) {
        let (xa, la) = w[0];
        let (xb, lb) = w[1];
        let dx = xb - xa;
        if dx <= 0.0 {
            continue;
        }
        panels.push(Panel {
            x_lo: xa,
            x_hi: xb,
            ratio: (lb - la).exp(),
            weight: (dx.ln() - std::f64::consts::LN_2 + log_add_exp(la, lb) - log_z).exp(),
        });
    }
    if x_last < 1.0 {
        panels.push(Panel {
            x_lo: x_last,
            x_hi: 1.0,
            ratio: 1.0,
            weight: ((1.0 - x_last).ln() + l_last - log_z).exp(),
        });
    }

    let mut cum: Vec<f64> = Vec::with_capacity(panels.len());
    let mut total = 0.0;
    for p in &panels {
        total += p.weight;
        cum.push(total);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let target = rng.gen::<f64>() * total;
            let idx = cum.partition_point(|&c| c < target).min(panels.len() - 1);
            let p = panels[idx];
            let before = if idx == 0 { 0.0 } else { cum[idx - 1] };
            let q = if p.weight > 0.0 {
                ((target - before) / p.weight).clamp(0.0, 1.0)
            } else {
                0.5
            };
            let w = p.x_hi - p.x_lo;
            // fraction s of the panel width holding mass fraction q when the
            // density ramps linearly from 1 to `ratio`
            let r = p.ratio;
            let s = if (r - 1.0).abs() < 1e-12 {
                q
            } else {
                q * (1.0 + r) / (1.0 + (1.0 + (r - 1.0) * q * (1.0 + r)).max(0.0).sqrt())
            };
            p.x_lo + s * w
        })
        .collect()
}
