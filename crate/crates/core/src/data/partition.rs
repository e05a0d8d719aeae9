use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Gamma};

use super::dataset::LabeledDataset;
use super::shard::ClientShard;
use crate::error::{Error, Result};
use crate::seeding;

/// Random near-equal split; shard sizes differ by at most one.
pub fn partition_iid(
    dataset: &Arc<LabeledDataset>,
    n_clients: usize,
    seed: u64,
) -> Result<Vec<ClientShard>> {
    if n_clients == 0 || dataset.len() < n_clients {
        return Err(Error::TooFewSamples {
            samples: dataset.len(),
            clients: n_clients,
        });
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut seeding::rng(seeding::derive(seed, &[0x11d])));
    let base = order.len() / n_clients;
    let extra = order.len() % n_clients;
    let mut shards = Vec::with_capacity(n_clients);
    let mut start = 0;
    for c in 0..n_clients {
        let size = base + usize::from(c < extra);
        let mut idx = order[start..start + size].to_vec();
        idx.sort_unstable();
        shards.push(ClientShard::new(c as u32, Arc::clone(dataset), idx));
        start += size;
    }
    Ok(shards)
}

/// Label-skewed split: each class is divided among clients in proportions
/// drawn from a symmetric Dirichlet(alpha). Empty shards take one sample
/// from the currently largest shard.
pub fn partition_dirichlet(
    dataset: &Arc<LabeledDataset>,
    n_clients: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<ClientShard>> {
    if n_clients == 0 || dataset.len() < n_clients {
        return Err(Error::TooFewSamples {
            samples: dataset.len(),
            clients: n_clients,
        });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("dirichlet alpha {alpha} must be positive")));
    }
    let mut rng = seeding::rng(seeding::derive(seed, &[0xd1c]));
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.class_count()];
    for i in 0..dataset.len() {
        by_class[dataset.label(i)].push(i);
    }
    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); n_clients];
    for members in &mut by_class {
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let mut props: Vec<f64> = (0..n_clients).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = props.iter().sum();
        if total > 0.0 && total.is_finite() {
            for p in &mut props {
                *p /= total;
            }
        } else {
            // every draw underflowed: hand the class to one client
            let lucky = rand::Rng::random_range(&mut rng, 0..n_clients);
            props = vec![0.0; n_clients];
            props[lucky] = 1.0;
        }
        let n = members.len();
        let mut cum = 0.0;
        let mut start = 0;
        for (c, p) in props.iter().enumerate() {
            cum += p;
            let end = if c + 1 == n_clients {
                n
            } else {
                ((cum * n as f64).round() as usize).clamp(start, n)
            };
            owned[c].extend_from_slice(&members[start..end]);
            start = end;
        }
    }

    while let Some(empty) = owned.iter().position(Vec::is_empty) {
        let largest = (0..n_clients)
            .max_by_key(|&c| (owned[c].len(), std::cmp::Reverse(c)))
            .expect("at least one client");
        let stolen = owned[largest].pop().expect("largest shard is non-empty");
        owned[empty].push(stolen);
    }

    Ok(owned
        .into_iter()
        .enumerate()
        .map(|(c, mut idx)| {
            idx.sort_unstable();
            ClientShard::new(c as u32, Arc::clone(dataset), idx)
        })
        .collect())
}
