use std::collections::BTreeMap;

use super::{AggregationOutcome, Aggregator, AggregatorConfig, AggregatorKind, UpdateBatch};
use crate::error::{Error, Result};
use crate::numerics::cosine_similarity;
use crate::ClientId;

/// Cumulative update per client.
pub type History = BTreeMap<ClientId, Vec<f64>>;

/// FoolsGold weights from cumulative histories, one per input row.
///
/// Pairwise cosine similarities are pardoned (`cs_ij *= max_i / max_j` when
/// client i's strongest similarity is below client j's), turned into
/// `1 - max_j cs_ij`, rescaled so the largest weight is 1, and pushed
/// through a clipped logit.
pub fn foolsgold_weights(histories: &[&[f64]], cfg: &AggregatorConfig) -> Result<Vec<f64>> {
    let n = histories.len();
    let mut cs = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = cosine_similarity(histories[i], histories[j])?;
            cs[i * n + j] = c;
            cs[j * n + i] = c;
        }
    }
    let max_cs: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| cs[i * n + j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && max_cs[i] < max_cs[j] && max_cs[j] > 0.0 {
                cs[i * n + j] *= max_cs[i] / max_cs[j];
            }
        }
    }
    let mut alpha: Vec<f64> = (0..n)
        .map(|i| {
            let worst = (0..n)
                .filter(|&j| j != i)
                .map(|j| cs[i * n + j])
                .fold(f64::NEG_INFINITY, f64::max);
            if worst.is_finite() { 1.0 - worst } else { 1.0 }.clamp(0.0, 1.0)
        })
        .collect();
    let top = alpha.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for a in &mut alpha {
        *a /= top;
        if *a >= 1.0 {
            *a = 0.99;
        }
        let p = a.clamp(cfg.foolsgold_eps, 1.0 - cfg.foolsgold_eps);
        let logit = cfg.foolsgold_confidence * ((p / (1.0 - p)).ln() + 0.5);
        *a = if *a == 0.0 { 0.0 } else { logit.clamp(0.0, 1.0) };
    }
    Ok(alpha)
}

/// Adds each delta to its client's history, then aggregates with
/// FoolsGold weights times sample-count weights.
pub fn foolsgold_aggregate(
    batch: &UpdateBatch,
    history: &mut History,
    cfg: &AggregatorConfig,
) -> Result<AggregationOutcome> {
    if batch.is_empty() {
        return Err(Error::TooFewClients { got: 0, need: 1 });
    }
    for u in &batch.updates {
        let h = history
            .get_mut(&u.client_id)
            .ok_or(Error::HistoryMismatch(u.client_id))?;
        if h.len() != u.delta.len() {
            return Err(Error::LengthMismatch {
                expected: u.delta.len(),
                actual: h.len(),
            });
        }
        for (acc, d) in h.iter_mut().zip(&u.delta) {
            *acc += d;
        }
    }
    let rows: Vec<&[f64]> = batch.updates.iter().map(|u| history[&u.client_id].as_slice()).collect();
    let alpha = foolsgold_weights(&rows, cfg)?;
    let p = batch.normalized_counts();
    let raw: Vec<f64> = alpha.iter().zip(&p).map(|(a, p)| a * p).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = if total > 0.0 {
        raw.iter().map(|w| w / total).collect()
    } else {
        vec![0.0; batch.len()]
    };
    let mut delta = vec![0.0; batch.dim()];
    for (u, w) in batch.updates.iter().zip(&weights) {
        if *w == 0.0 {
            continue;
        }
        for (o, d) in delta.iter_mut().zip(&u.delta) {
            *o += w * d;
        }
    }
    let mut out = AggregationOutcome::plain(batch, delta, weights.clone());
    let (kept, dropped): (Vec<usize>, Vec<usize>) = (0..batch.len()).partition(|&i| weights[i] > 0.0);
    out.selected_ids = batch.ids_of(&kept);
    out.excluded_pass1 = batch.ids_of(&dropped);
    Ok(out)
}

/// FoolsGold with its history owned in-process.
pub struct FoolsGold {
    cfg: AggregatorConfig,
    history: History,
}

impl FoolsGold {
    pub fn new(cfg: AggregatorConfig, client_ids: &[ClientId], dim: usize) -> Self {
        Self {
            cfg,
            history: client_ids.iter().map(|&id| (id, vec![0.0; dim])).collect(),
        }
    }

    pub fn history(&self) -> &History {
        &self.history
    }
}

impl Aggregator for FoolsGold {
    fn kind(&self) -> AggregatorKind {
        AggregatorKind::Foolsgold
    }

    fn aggregate(&mut self, batch: &UpdateBatch) -> Result<AggregationOutcome> {
        foolsgold_aggregate(batch, &mut self.history, &self.cfg)
    }
}
