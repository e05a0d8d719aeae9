use super::matrix::{euclidean, Matrix};
use crate::error::{Error, Result};

/// For each row, the sum of Euclidean distances to every other row.
pub fn distance_sum_scores(points: &Matrix) -> Result<Vec<f64>> {
    let n = points.rows();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "distance scores need at least 2 points, got {n}"
        )));
    }
    let mut scores = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(points.row(i), points.row(j));
            scores[i] += d;
            scores[j] += d;
        }
    }
    Ok(scores)
}

/// Median; the mean of the two central values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Indices whose score, divided by the median score, stays within `eps`.
///
/// A zero median excludes nobody.
pub fn median_ratio_filter(scores: &[f64], eps: f64) -> Vec<usize> {
    let med = match median(scores) {
        Some(m) => m,
        None => return Vec::new(),
    };
    if med == 0.0 {
        return (0..scores.len()).collect();
    }
    scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s / med <= eps)
        .map(|(i, _)| i)
        .collect()
}

/// Cosine of the angle between `a` and `b`; zero when either is the zero vector.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    // sqrt(na * nb) returns exactly na when a == b, so identical vectors score 1.
    let prod = na * nb;
    let denom = if prod.is_finite() && prod > 0.0 {
        prod.sqrt()
    } else {
        na.sqrt() * nb.sqrt()
    };
    Ok((dot / denom).clamp(-1.0, 1.0))
}
