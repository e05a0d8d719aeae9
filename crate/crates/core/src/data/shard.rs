use std::borrow::Cow;
use std::sync::Arc;

use rand::seq::SliceRandom;

use super::dataset::LabeledDataset;
use super::trigger::TriggerPattern;
use crate::error::{Error, Result};
use crate::seeding;
use crate::ClientId;

/// Which of a shard's samples are served poisoned, and with what trigger.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardPoison {
    /// One flag per shard position.
    pub flags: Vec<bool>,
    pub pattern: TriggerPattern,
}

/// A client's view of a shared dataset.
#[derive(Debug, Clone)]
pub struct ClientShard {
    pub client_id: ClientId,
    pub dataset: Arc<LabeledDataset>,
    /// Dataset row indices owned by this client.
    pub indices: Vec<usize>,
    pub poison: Option<ShardPoison>,
}

impl ClientShard {
    pub fn new(client_id: ClientId, dataset: Arc<LabeledDataset>, indices: Vec<usize>) -> Self {
        Self {
            client_id,
            dataset,
            indices,
            poison: None,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_poisoned(&self, pos: usize) -> bool {
        self.poison.as_ref().is_some_and(|p| p.flags[pos])
    }

    pub fn poisoned_count(&self) -> usize {
        self.poison
            .as_ref()
            .map_or(0, |p| p.flags.iter().filter(|&&f| f).count())
    }

    /// Features and label as the trainer sees them: flagged samples carry the
    /// trigger and the target label.
    pub fn sample(&self, pos: usize) -> (Cow<'_, [f64]>, usize) {
        let idx = self.indices[pos];
        let row = self.dataset.row(idx);
        match &self.poison {
            Some(p) if p.flags[pos] => {
                let mut owned = row.to_vec();
                p.pattern
                    .apply_in_place(&mut owned)
                    .expect("pattern validated when the shard was poisoned");
                (Cow::Owned(owned), p.pattern.target_label)
            }
            _ => (Cow::Borrowed(row), self.dataset.label(idx)),
        }
    }

    /// Class histogram of the ground-truth labels.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.dataset.class_count()];
        for &i in &self.indices {
            h[self.dataset.label(i)] += 1;
        }
        h
    }
}

/// Flags `ceil(fraction * n)` random samples of the shard as poisoned.
pub fn poison_shard(
    shard: &ClientShard,
    fraction: f64,
    pattern: &TriggerPattern,
    seed: u64,
) -> Result<ClientShard> {
    if shard.is_empty() {
        return Err(Error::EmptyShard);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "poison fraction {fraction} outside (0, 1]"
        )));
    }
    pattern.apply_in_place(&mut shard.dataset.row(shard.indices[0]).to_vec())?;
    let n = shard.len();
    let q = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut rng = seeding::rng(seeding::derive(seed, &[u64::from(shard.client_id)]));
    // Samples already carrying the target label are flagged only once the rest are used up.
    let (mut other, mut target): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&pos| shard.dataset.label(shard.indices[pos]) != pattern.target_label);
    other.shuffle(&mut rng);
    target.shuffle(&mut rng);
    let mut flags = vec![false; n];
    for pos in other.into_iter().chain(target).take(q) {
        flags[pos] = true;
    }
    Ok(ClientShard {
        poison: Some(ShardPoison {
            flags,
            pattern: pattern.clone(),
        }),
        ..shard.clone()
    })
}
