use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{euclidean, squared_euclidean, Matrix};
use crate::error::{Error, Result};
use crate::seeding;

/// Lloyd iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
        }
    }
}

/// Result of [`kmeans`].
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub centroids: Matrix,
    pub inertia: f64,
}

impl Clustering {
    /// Point indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// KMeans with kmeans++ seeding, keeping the best of several restarts.
pub fn kmeans(points: &Matrix, k: usize, seed: u64) -> Result<Clustering> {
    kmeans_with(points, k, seed, &KMeansConfig::default())
}

pub fn kmeans_with(points: &Matrix, k: usize, seed: u64, cfg: &KMeansConfig) -> Result<Clustering> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::DegenerateInput(format!(
            "cannot form {k} clusters from {n} points"
        )));
    }
    let mut best: Option<Clustering> = None;
    for restart in 0..cfg.restarts.max(1) {
        let run = lloyd(points, k, seeding::derive(seed, &[restart as u64]), cfg.max_iter);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd(points: &Matrix, k: usize, seed: u64, max_iter: usize) -> Clustering {
    let n = points.rows();
    let dim = points.cols();
    let mut rng = seeding::rng(seed);

    let mut centers: Vec<usize> = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_euclidean(points.row(i), points.row(centers[0])))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&w| w > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_euclidean(points.row(i), points.row(next)));
        }
    }
    let mut centroids = points.select_rows(&centers);

    let mut assignment = assign(points, &centroids);
    for _ in 0..max_iter {
        update_centroids(points, &mut assignment, &mut centroids, k, dim);
        let next = assign(points, &centroids);
        if next == assignment {
            break;
        }
        assignment = next;
    }
    update_centroids(points, &mut assignment, &mut centroids, k, dim);
    let inertia = (0..n)
        .map(|i| squared_euclidean(points.row(i), centroids.row(assignment[i])))
        .sum();
    Clustering {
        k,
        assignment,
        centroids,
        inertia,
    }
}

fn assign(points: &Matrix, centroids: &Matrix) -> Vec<usize> {
    points
        .iter_rows()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter_rows().enumerate() {
                let d = squared_euclidean(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Recomputes means, first moving the farthest point of any multi-member
/// cluster into each empty cluster.
fn update_centroids(
    points: &Matrix,
    assignment: &mut [usize],
    centroids: &mut Matrix,
    k: usize,
    dim: usize,
) {
    let mut counts = vec![0usize; k];
    for &c in assignment.iter() {
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &c) in assignment.iter().enumerate() {
            if counts[c] < 2 {
                continue;
            }
            let d = squared_euclidean(points.row(i), centroids.row(c));
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("k <= n guarantees a donor cluster");
        counts[assignment[i]] -= 1;
        assignment[i] = empty;
        counts[empty] = 1;
        centroids.row_mut(empty).copy_from_slice(points.row(i));
    }
    let mut sums = vec![0.0; k * dim];
    for (i, &c) in assignment.iter().enumerate() {
        for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(points.row(i)) {
            *s += x;
        }
    }
    for c in 0..k {
        let row = centroids.row_mut(c);
        for (r, s) in row.iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
            *r = s / counts[c] as f64;
        }
    }
}

/// Mean silhouette coefficient. Singleton clusters contribute zero.
pub fn silhouette(points: &Matrix, assignment: &[usize], k: usize) -> f64 {
    let n = points.rows();
    if n == 0 {
        return 0.0;
    }
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        sizes[c] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = assignment[i];
        if sizes[own] < 2 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[assignment[j]] += euclidean(points.row(i), points.row(j));
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            continue;
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

/// Cluster count with the best mean silhouette over k = 2..=min(10, n-1).
pub fn choose_k(points: &Matrix, seed: u64) -> Result<usize> {
    choose_k_with(points, seed, &KMeansConfig::default())
}

pub fn choose_k_with(points: &Matrix, seed: u64, cfg: &KMeansConfig) -> Result<usize> {
    let n = points.rows();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "choosing k needs at least 2 points, got {n}"
        )));
    }
    if n < 4 {
        return Ok(2);
    }
    let mut best_k = 2;
    let mut best_score = f64::NEG_INFINITY;
    for k in 2..=10.min(n - 1) {
        let clustering = kmeans_with(points, k, seed, cfg)?;
        let score = silhouette(points, &clustering.assignment, k);
        if score > best_score {
            best_score = score;
            best_k = k;
        }
    }
    Ok(best_k)
}
