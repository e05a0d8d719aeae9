use serde::{Deserialize, Serialize};

use super::matrix::{euclidean, Matrix};
use crate::error::{Error, Result};

/// Smoothed Weiszfeld settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeiszfeldConfig {
    /// Lower bound on the distance used in the reweighting.
    pub nu: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WeiszfeldConfig {
    fn default() -> Self {
        Self {
            nu: 1e-6,
            tol: 1e-9,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeiszfeldResult {
    pub point: Vec<f64>,
    pub iterations: usize,
    /// Smoothed objective at the start point and after every iteration.
    pub objective_trace: Vec<f64>,
}

/// Unit-weight geometric median of the rows of `points`.
pub fn geometric_median(points: &Matrix, cfg: &WeiszfeldConfig) -> Result<Vec<f64>> {
    let weights = vec![1.0; points.rows()];
    weighted_geometric_median(points, &weights, cfg)
}

pub fn weighted_geometric_median(
    points: &Matrix,
    weights: &[f64],
    cfg: &WeiszfeldConfig,
) -> Result<Vec<f64>> {
    weiszfeld(points, weights, cfg).map(|r| r.point)
}

/// Objective that smoothed Weiszfeld decreases monotonically: each distance
/// `r` is replaced by `r` when `r >= nu` and by `r^2/(2 nu) + nu/2` otherwise.
pub fn smoothed_objective(points: &Matrix, weights: &[f64], z: &[f64], nu: f64) -> f64 {
    points
        .iter_rows()
        .zip(weights)
        .map(|(p, w)| {
            let r = euclidean(p, z);
            w * if r >= nu { r } else { r * r / (2.0 * nu) + nu / 2.0 }
        })
        .sum()
}

/// Runs smoothed Weiszfeld from the weighted mean.
pub fn weiszfeld(points: &Matrix, weights: &[f64], cfg: &WeiszfeldConfig) -> Result<WeiszfeldResult> {
    let n = points.rows();
    let d = points.cols();
    if n == 0 {
        return Err(Error::DegenerateInput("geometric median of zero points".into()));
    }
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateInput("weights must have a positive sum".into()));
    }
    let mut z = vec![0.0; d];
    for (p, w) in points.iter_rows().zip(weights) {
        for (zi, x) in z.iter_mut().zip(p) {
            *zi += w * x / total;
        }
    }
    let mut trace = vec![smoothed_objective(points, weights, &z, cfg.nu)];
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let mut next = vec![0.0; d];
        let mut denom = 0.0;
        for (p, w) in points.iter_rows().zip(weights) {
            let beta = w / euclidean(&z, p).max(cfg.nu);
            denom += beta;
            for (ni, x) in next.iter_mut().zip(p) {
                *ni += beta * x;
            }
        }
        for ni in &mut next {
            *ni /= denom;
        }
        let step = euclidean(&next, &z);
        z = next;
        iterations += 1;
        trace.push(smoothed_objective(points, weights, &z, cfg.nu));
        if step < cfg.tol {
            break;
        }
    }
    Ok(WeiszfeldResult {
        point: z,
        iterations,
        objective_trace: trace,
    })
}
