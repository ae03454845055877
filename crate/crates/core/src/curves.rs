//! Tabulated monotone curves: the likelihood CCDF X(l), its inverse the
//! sorted likelihood function L(x), and log-density curves derived from them.
//!
//! A point set represents both views of the same object: the CCDF maps a
//! log-likelihood level to the prior mass exceeding it, the SLF maps a prior
//! mass fraction x to the log-likelihood level exceeded by exactly that
//! fraction. Interpolation is linear in (ln x, ln L), matching the geometric
//! x-grids the estimators emit.

use crate::error::{Error, Result};
use crate::math::{log_add_exp, LogSum};

/// Monotone non-increasing map x -> ln L(x) on x in (0, 1].
///
/// Points are strictly increasing in x; ln L is non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SlfCurve {
    points: Vec<(f64, f64)>, // (x, log_l)
}

impl SlfCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "SLF curve needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, &(x, log_l)) in points.iter().enumerate() {
            if !(x > 0.0 && x <= 1.0) {
                return Err(Error::InvalidCurve(format!(
                    "SLF x out of (0,1] at index {i}: {x}"
                )));
            }
            if log_l.is_nan() {
                return Err(Error::InvalidCurve(format!("SLF log_L is NaN at index {i}")));
            }
            if i > 0 {
                let (xp, lp) = points[i - 1];
                if x <= xp {
                    return Err(Error::InvalidCurve(format!(
                        "SLF x not strictly increasing at index {i}: {xp} -> {x}"
                    )));
                }
                if log_l > lp {
                    return Err(Error::InvalidCurve(format!(
                        "SLF log_L increases at index {i}: {lp} -> {log_l}"
                    )));
                }
            }
        }
        Ok(SlfCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first_x(&self) -> f64 {
        self.points[0].0
    }

    pub fn last_x(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    /// ln L at x by interpolation; errors outside the tabulated range.
    pub fn log_l_at(&self, x: f64) -> Result<f64> {
        if !(x >= self.first_x() && x <= self.last_x()) {
            return Err(Error::InvalidParameter(format!(
                "x = {x} outside tabulated range [{}, {}]",
                self.first_x(),
                self.last_x()
            )));
        }
        Ok(self.interp(x))
    }

    /// ln L at x with x clamped to the tabulated range (flat extension).
    pub fn log_l_at_clamped(&self, x: f64) -> f64 {
        self.interp(x.clamp(self.first_x(), self.last_x()))
    }

    fn interp(&self, x: f64) -> f64 {
        let pts = &self.points;
        let idx = pts.partition_point(|&(px, _)| px < x);
        if idx == 0 {
            return pts[0].1;
        }
        if idx >= pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (xa, la) = pts[idx - 1];
        let (xb, lb) = pts[idx];
        if x == xb {
            return lb;
        }
        let w = (x.ln() - xa.ln()) / (xb.ln() - xa.ln());
        la + w * (lb - la)
    }

    /// Largest tabulated-range x with ln L(x) >= target (None if even the
    /// first point is below target). Inverse interpolation in (ln L, ln x).
    pub fn largest_x_with_log_l_at_least(&self, target: f64) -> Option<f64> {
        let pts = &self.points;
        if pts[0].1 < target {
            return None;
        }
        // log_l is non-increasing; find first index with log_l < target
        let idx = pts.partition_point(|&(_, l)| l >= target);
        if idx >= pts.len() {
            return Some(self.last_x());
        }
        let (xa, la) = pts[idx - 1];
        let (xb, lb) = pts[idx];
        if la == lb {
            return Some(xa);
        }
        let w = (la - target) / (la - lb);
        Some((xa.ln() + w * (xb.ln() - xa.ln())).exp())
    }

    /// Smallest tabulated-range x with ln L(x) <= target (None if even the
    /// last point is above target).
    pub fn smallest_x_with_log_l_at_most(&self, target: f64) -> Option<f64> {
        let pts = &self.points;
        if pts[pts.len() - 1].1 > target {
            return None;
        }
        let idx = pts.partition_point(|&(_, l)| l > target);
        if idx == 0 {
            return Some(self.first_x());
        }
        let (xa, la) = pts[idx - 1];
        let (xb, lb) = pts[idx];
        if la == lb {
            return Some(xa);
        }
        let w = (la - target) / (la - lb);
        Some((xa.ln() + w * (xb.ln() - xa.ln())).exp())
    }

    /// Swap axes into the CCDF view. Duplicate log-likelihood values
    /// (plateaued likelihoods) are merged keeping the largest x, which
    /// preserves exceedance semantics.
    pub fn to_ccdf(&self) -> CcdfCurve {
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(self.points.len());
        // reversed: log_l ascending, x descending; first of a run has largest x
        for &(x, log_l) in self.points.iter().rev() {
            if let Some(&(last_l, _)) = pts.last() {
                if log_l == last_l {
                    continue;
                }
            }
            pts.push((log_l, x));
        }
        CcdfCurve { points: pts }
    }
}

/// Monotone non-increasing map ln l -> X(l) in [0, 1].
///
/// Points are strictly increasing in ln l; x is non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    points: Vec<(f64, f64)>, // (log_l, x)
}

impl CcdfCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "CCDF curve needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, &(log_l, x)) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidCurve(format!(
                    "CCDF x out of [0,1] at index {i}: {x}"
                )));
            }
            if log_l.is_nan() {
                return Err(Error::InvalidCurve(format!(
                    "CCDF log_l is NaN at index {i}"
                )));
            }
            if i > 0 {
                let (lp, xp) = points[i - 1];
                if log_l <= lp {
                    return Err(Error::InvalidCurve(format!(
                        "CCDF log_l not strictly increasing at index {i}: {lp} -> {log_l}"
                    )));
                }
                if x > xp {
                    return Err(Error::InvalidCurve(format!(
                        "CCDF x increases at index {i}: {xp} -> {x}"
                    )));
                }
            }
        }
        Ok(CcdfCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Inverse view; points with x == 0 cannot be represented on the SLF
    /// side and are dropped.
    pub fn to_slf(&self) -> Result<SlfCurve> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .rev()
            .filter(|&&(_, x)| x > 0.0)
            .map(|&(log_l, x)| (x, log_l))
            .collect();
        SlfCurve::new(pts)
    }
}

/// Which variable a density curve is tabulated over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DensityDomain {
    /// Prior-mass fraction x in (0, 1].
    X,
    /// Posterior log-likelihood y = ln L.
    Y,
}

/// Tabulated log-density over one of the two domains.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub domain: DensityDomain,
    points: Vec<(f64, f64)>, // (abscissa, log_density)
}

impl DensityCurve {
    pub fn new(domain: DensityDomain, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCurve(
                "density curve needs at least 2 points".into(),
            ));
        }
        for (i, &(a, ld)) in points.iter().enumerate() {
            if a.is_nan() || ld.is_nan() {
                return Err(Error::InvalidCurve(format!(
                    "density curve has NaN at index {i}"
                )));
            }
            if i > 0 && a <= points[i - 1].0 {
                return Err(Error::InvalidCurve(format!(
                    "density abscissa not strictly increasing at index {i}"
                )));
            }
        }
        Ok(DensityCurve { domain, points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Log of the trapezoid integral over the tabulated range.
    pub fn log_mass_trapezoid(&self) -> f64 {
        let mut acc = LogSum::new();
        for w in self.points.windows(2) {
            let (a0, l0) = w[0];
            let (a1, l1) = w[1];
            let da = a1 - a0;
            if da > 0.0 {
                acc.add(da.ln() - std::f64::consts::LN_2 + log_add_exp(l0, l1));
            }
        }
        acc.log_total()
    }

    /// Verify the trapezoid mass is 1 within `tol`; returns the mass.
    pub fn check_normalized(&self, tol: f64) -> Result<f64> {
        let mass = self.log_mass_trapezoid().exp();
        if (mass - 1.0).abs() > tol {
            return Err(Error::QuadratureInconsistency(format!(
                "density mass {mass} deviates from 1 by more than {tol}"
            )));
        }
        Ok(mass)
    }
}
