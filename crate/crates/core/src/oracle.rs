//! Brute-force oracles for low-dimensional models: dense grid quadrature
//! over the unit disk for ball-prior models in d = 2. Slow and simple on
//! purpose — these values anchor the estimator pipeline, so they must not
//! share any code path with it.

use crate::error::{Error, Result};
use crate::math::{LogSum, SignedLogSum};
use crate::model::LikelihoodModel;

/// Evidence and Y-moments from an n x n tensor grid on [-1, 1]².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSummary {
    pub log_z: f64,
    pub mean_y: f64,
    pub var_y: f64,
    pub effective_dim: f64,
}

/// Grid quadrature for a two-dimensional model whose prior is uniform on
/// the unit disk. Cell centres outside the disk carry no mass; with the
/// likelihoods used here the boundary cells are likelihood-negligible, so
/// the centre-in/centre-out rule costs nothing measurable.
pub fn grid_summary_ball_2d(model: &dyn LikelihoodModel, n_grid: usize) -> Result<GridSummary> {
    if model.dimension() != 2 {
        return Err(Error::InvalidParameter(format!(
            "grid oracle handles d = 2 only, model has d = {}",
            model.dimension()
        )));
    }
    if n_grid < 10 {
        return Err(Error::InvalidParameter("grid too coarse".into()));
    }
    let n = n_grid;
    let cell = 2.0 / n as f64;
    // log of cell mass under the uniform-disk prior
    let log_w = 2.0 * cell.ln() - std::f64::consts::PI.ln();

    let eval = |i: usize, j: usize| -> Option<f64> {
        let x = -1.0 + (i as f64 + 0.5) * cell;
        let y = -1.0 + (j as f64 + 0.5) * cell;
        if x * x + y * y > 1.0 {
            return None;
        }
        Some(model.log_likelihood(&[x, y]))
    };

    let mut z_acc = LogSum::new();
    for i in 0..n {
        for j in 0..n {
            if let Some(ll) = eval(i, j) {
                if ll.is_nan() {
                    return Err(Error::NanLikelihood {
                        context: "grid oracle".into(),
                    });
                }
                z_acc.add(log_w + ll);
            }
        }
    }
    let log_z = z_acc.log_total();

    let mut mean_acc = SignedLogSum::new();
    for i in 0..n {
        for j in 0..n {
            if let Some(ll) = eval(i, j) {
                if ll != 0.0 {
                    mean_acc.add(ll, log_w + ll + ll.abs().ln());
                }
            }
        }
    }
    let mean_y = mean_acc.total_scaled(log_z);

    let mut var_acc = SignedLogSum::new();
    for i in 0..n {
        for j in 0..n {
            if let Some(ll) = eval(i, j) {
                let dev = (ll - mean_y) * (ll - mean_y);
                if dev != 0.0 {
                    var_acc.add(1.0, log_w + ll + dev.ln());
                }
            }
        }
    }
    let var_y = var_acc.total_scaled(log_z).max(0.0);

    Ok(GridSummary {
        log_z,
        mean_y,
        var_y,
        effective_dim: 2.0 * var_y,
    })
}
