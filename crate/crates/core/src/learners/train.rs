use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{flatten, loss_and_gradient, ModelParams};
use crate::data::ClientShard;
use crate::error::{Error, Result};
use crate::seeding;
use crate::ClientId;

/// Local SGD settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerConfig {
    /// Mini-batch SGD steps per round.
    #[serde(default = "default_iterations")]
    pub local_iterations: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_iterations() -> usize {
    5
}
fn default_lr() -> f64 {
    0.1
}
fn default_batch() -> usize {
    32
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            local_iterations: default_iterations(),
            learning_rate: default_lr(),
            batch_size: default_batch(),
            seed: 0,
        }
    }
}

/// One client's model delta for a round.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatUpdate {
    pub client_id: ClientId,
    pub delta: Vec<f64>,
    /// Local sample count, used as the aggregation weight.
    pub sample_count: usize,
}

/// A batch slot: shard position and whether it is served poisoned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchEntry {
    pub position: usize,
    pub poisoned: bool,
}

/// Cycles through a shuffled pool, reshuffling when it runs dry.
#[derive(Debug)]
struct Pool {
    items: Vec<usize>,
    cursor: usize,
}

impl Pool {
    fn new(items: Vec<usize>) -> Self {
        let cursor = items.len();
        Self { items, cursor }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> usize {
        if self.cursor == self.items.len() {
            self.items.shuffle(rng);
            self.cursor = 0;
        }
        self.cursor += 1;
        self.items[self.cursor - 1]
    }
}

/// Draws mini-batches from a shard.
///
/// Clean shards are traversed in shuffled epochs. Poisoned shards fill every
/// batch with `ceil(b/2)` flagged samples and the rest clean ones, where
/// `b = min(batch_size, shard size)`; each pool reshuffles independently
/// once exhausted.
#[derive(Debug)]
pub struct BatchSampler {
    batch: usize,
    poisoned: Option<Pool>,
    clean: Pool,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    pub fn new(shard: &ClientShard, batch_size: usize, seed: u64) -> Result<Self> {
        if shard.is_empty() {
            return Err(Error::EmptyShard);
        }
        if batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        let rng = seeding::rng(seed);
        let batch = batch_size.min(shard.len());
        let all: Vec<usize> = (0..shard.len()).collect();
        if shard.poisoned_count() == 0 {
            return Ok(Self {
                batch,
                poisoned: None,
                clean: Pool::new(all),
                rng,
            });
        }
        if batch_size < 2 {
            return Err(Error::InvalidConfig(
                "poisoned batches need a batch size of at least 2".into(),
            ));
        }
        let (bad, good): (Vec<usize>, Vec<usize>) = all.into_iter().partition(|&p| shard.is_poisoned(p));
        Ok(Self {
            batch: batch.max(2),
            poisoned: Some(Pool::new(bad)),
            clean: Pool::new(good),
            rng,
        })
    }

    pub fn batch_len(&self) -> usize {
        self.batch
    }

    pub fn next_batch(&mut self) -> Vec<BatchEntry> {
        match &mut self.poisoned {
            None => (0..self.batch)
                .map(|_| BatchEntry {
                    position: self.clean.next(&mut self.rng),
                    poisoned: false,
                })
                .collect(),
            Some(bad) => {
                let n_bad = if self.clean.items.is_empty() {
                    self.batch
                } else {
                    self.batch.div_ceil(2)
                };
                let mut out = Vec::with_capacity(self.batch);
                for _ in 0..n_bad {
                    out.push(BatchEntry {
                        position: bad.next(&mut self.rng),
                        poisoned: true,
                    });
                }
                for _ in n_bad..self.batch {
                    out.push(BatchEntry {
                        position: self.clean.next(&mut self.rng),
                        poisoned: false,
                    });
                }
                out
            }
        }
    }
}

/// Runs `local_iterations` SGD steps from `start` and returns the delta.
pub fn train_local(start: &ModelParams, shard: &ClientShard, cfg: &TrainerConfig) -> Result<FlatUpdate> {
    if cfg.local_iterations == 0 {
        return Err(Error::InvalidConfig("local iterations must be at least 1".into()));
    }
    let mut sampler = BatchSampler::new(shard, cfg.batch_size, cfg.seed)?;
    let mut model = start.clone();
    for _ in 0..cfg.local_iterations {
        let batch: Vec<_> = sampler
            .next_batch()
            .into_iter()
            .map(|e| shard.sample(e.position))
            .collect();
        let (_, grad) = loss_and_gradient(&model, &batch);
        model.add_scaled(-cfg.learning_rate, &grad)?;
    }
    let before = flatten(start);
    let delta = flatten(&model)
        .into_iter()
        .zip(before)
        .map(|(after, b)| after - b)
        .collect();
    Ok(FlatUpdate {
        client_id: shard.client_id,
        delta,
        sample_count: shard.len(),
    })
}
