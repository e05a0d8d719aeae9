use std::collections::BTreeSet;

use super::{AggregationOutcome, AggregatorConfig, UpdateBatch};
use crate::error::{Error, Result};
use crate::numerics::{squared_euclidean, weiszfeld, WeiszfeldConfig};

/// Sample-count-weighted mean of every update.
pub fn fedavg_aggregate(batch: &UpdateBatch) -> Result<AggregationOutcome> {
    if batch.is_empty() {
        return Err(Error::TooFewClients { got: 0, need: 1 });
    }
    let all: Vec<usize> = (0..batch.len()).collect();
    Ok(AggregationOutcome::plain(
        batch,
        batch.weighted_mean(&all),
        batch.normalized_counts(),
    ))
}

/// Krum score of each update: the sum of squared distances to its
/// `N - f - 2` nearest other updates.
pub fn krum_scores(batch: &UpdateBatch, f: usize) -> Result<Vec<f64>> {
    let n = batch.len();
    if n < f + 3 {
        return Err(Error::TooFewClients { got: n, need: f + 3 });
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = squared_euclidean(&batch.updates[i].delta, &batch.updates[j].delta);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let neighbours = n - f - 2;
    Ok((0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[i * n + j]).collect();
            row.sort_by(f64::total_cmp);
            row[..neighbours].iter().sum()
        })
        .collect())
}

/// Keeps the `N - f` lowest Krum scores (ties to the earlier update) and
/// averages them with renormalised sample-count weights.
pub fn multi_krum_aggregate(batch: &UpdateBatch, f: usize) -> Result<AggregationOutcome> {
    let scores = krum_scores(batch, f)?;
    let mut order: Vec<usize> = (0..batch.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut keep = order[..batch.len() - f].to_vec();
    keep.sort_unstable();
    let excluded: BTreeSet<_> = batch.ids_of(&order[batch.len() - f..]);
    let total: f64 = keep.iter().map(|&i| batch.updates[i].sample_count as f64).sum();
    let mut weights = vec![0.0; batch.len()];
    for &i in &keep {
        weights[i] = batch.updates[i].sample_count as f64 / total;
    }
    let mut out = AggregationOutcome::plain(batch, batch.weighted_mean(&keep), weights);
    out.selected_ids = batch.ids_of(&keep);
    out.excluded_pass1 = excluded;
    Ok(out)
}

fn weighted_median(batch: &UpdateBatch, cfg: &WeiszfeldConfig) -> Result<AggregationOutcome> {
    if batch.is_empty() {
        return Err(Error::TooFewClients { got: 0, need: 1 });
    }
    let weights = batch.normalized_counts();
    let result = weiszfeld(&batch.matrix(), &weights, cfg)?;
    Ok(AggregationOutcome::plain(batch, result.point, weights))
}

/// Weighted geometric median, iterated to tolerance.
pub fn geomed_aggregate(batch: &UpdateBatch, cfg: &AggregatorConfig) -> Result<AggregationOutcome> {
    weighted_median(batch, &cfg.weiszfeld)
}

/// Geometric median with a small fixed iteration budget.
pub fn rfa_aggregate(batch: &UpdateBatch, cfg: &AggregatorConfig) -> Result<AggregationOutcome> {
    let budget = WeiszfeldConfig {
        max_iter: cfg.rfa_max_iter,
        ..cfg.weiszfeld
    };
    weighted_median(batch, &budget)
}
