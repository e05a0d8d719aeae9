use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rayon::prelude::*;

use super::metrics::RoundMetrics;
use super::scenario::{AttackerSchedule, PartitionKind, ScenarioConfig};
use crate::aggregators::{build_aggregator, AggregationOutcome, Aggregator, UpdateBatch};
use crate::data::{
    partition_dirichlet, partition_iid, poison_shard, split_dba, ClientShard, LabeledDataset,
    TriggerPattern, TriggeredTestSet,
};
use crate::error::{Error, Result};
use crate::learners::{build_model, flatten, train_local, FlatUpdate, ModelParams};
use crate::seeding;
use crate::ClientId;

/// Share of the triggered test set classified as the attacker's target.
pub fn attack_rate(model: &ModelParams, triggered: &TriggeredTestSet) -> Result<f64> {
    let samples = &triggered.samples;
    if samples.is_empty() {
        return Err(Error::EmptyData);
    }
    let hits = (0..samples.len())
        .filter(|&i| model.predict(samples.row(i)) == triggered.target_label)
        .count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Splits attackers, sorted by id, into `parts` contiguous groups of
/// `ceil(K / parts)`; group g uses sub-pattern g. The last group may be short.
pub fn dba_assign(attacker_ids: &[ClientId], parts: usize) -> Result<BTreeMap<ClientId, usize>> {
    if attacker_ids.is_empty() {
        return Err(Error::NoAttackers);
    }
    if parts == 0 {
        return Err(Error::InvalidConfig("dba needs at least one part".into()));
    }
    let mut sorted = attacker_ids.to_vec();
    sorted.sort_unstable();
    let group = sorted.len().div_ceil(parts);
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(rank, id)| (id, rank / group))
        .collect())
}

/// Everything a round produced, for callers that want more than metrics.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub metrics: RoundMetrics,
    /// `None` when the round was skipped.
    pub outcome: Option<AggregationOutcome>,
    /// Client ids in batch order, matching the outcome's projection rows.
    pub client_ids: Vec<ClientId>,
}

/// A federated run, advanced one round at a time.
pub struct Simulation {
    cfg: ScenarioConfig,
    shards: Vec<ClientShard>,
    test: LabeledDataset,
    full_trigger: TriggerPattern,
    sub_triggers: Vec<TriggerPattern>,
    triggered_full: TriggeredTestSet,
    triggered_parts: Vec<TriggeredTestSet>,
    static_attackers: BTreeSet<ClientId>,
    model: ModelParams,
    aggregator: Box<dyn Aggregator>,
    round: usize,
}

impl Simulation {
    /// Loads data, partitions it and initialises the global model.
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let (train, test) = cfg.dataset.load(cfg.seeds.data)?;
        Self::with_data(cfg, train, test)
    }

    /// Like [`Simulation::new`] with already-loaded datasets.
    pub fn with_data(cfg: ScenarioConfig, train: LabeledDataset, test: LabeledDataset) -> Result<Self> {
        cfg.validate()?;
        if test.is_empty() {
            return Err(Error::EmptyData);
        }
        let train = Arc::new(train);
        let shards = match cfg.partition.kind {
            PartitionKind::Iid => partition_iid(&train, cfg.n_clients, cfg.seeds.data)?,
            PartitionKind::Dirichlet => {
                partition_dirichlet(&train, cfg.n_clients, cfg.partition.alpha, cfg.seeds.data)?
            }
        };
        let mut full_trigger = TriggerPattern::lower_left(cfg.trigger.intensity);
        full_trigger.target_label = cfg.trigger.target_label;
        if full_trigger.target_label >= train.class_count() {
            return Err(Error::InvalidConfig(format!(
                "target label {} outside {} classes",
                full_trigger.target_label,
                train.class_count()
            )));
        }
        let sub_triggers = if cfg.trigger.dba {
            split_dba(&full_trigger, cfg.trigger.dba_parts)?
        } else {
            Vec::new()
        };
        let triggered_full = TriggeredTestSet::build(&test, &full_trigger)?;
        let triggered_parts = sub_triggers
            .iter()
            .map(|p| TriggeredTestSet::build(&test, p))
            .collect::<Result<_>>()?;

        let k = cfg.attacker_count();
        let static_attackers = draw_attackers(cfg.n_clients, k, cfg.seeds.attack, 0);
        let architecture = cfg.model.architecture(train.feature_dim(), train.class_count());
        let model = build_model(architecture, cfg.seeds.train);
        let ids: Vec<ClientId> = shards.iter().map(|s| s.client_id).collect();
        let aggregator = build_aggregator(
            cfg.aggregator.kind,
            cfg.aggregator_config(),
            &ids,
            architecture.param_count(),
        );
        Ok(Self {
            cfg,
            shards,
            test,
            full_trigger,
            sub_triggers,
            triggered_full,
            triggered_parts,
            static_attackers,
            model,
            aggregator,
            round: 0,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn shards(&self) -> &[ClientShard] {
        &self.shards
    }

    pub fn rounds_done(&self) -> usize {
        self.round
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.cfg.rounds
    }

    /// Attackers active in round `t` (1-based).
    pub fn attackers_for_round(&self, t: usize) -> BTreeSet<ClientId> {
        match self.cfg.attacker_schedule {
            AttackerSchedule::Static => self.static_attackers.clone(),
            AttackerSchedule::Resampled => draw_attackers(
                self.cfg.n_clients,
                self.cfg.attacker_count(),
                self.cfg.seeds.attack,
                t as u64,
            ),
        }
    }

    fn local_updates(&self, t: usize, attackers: &BTreeSet<ClientId>) -> Result<Vec<FlatUpdate>> {
        let groups = if self.cfg.trigger.dba && !attackers.is_empty() {
            let ids: Vec<ClientId> = attackers.iter().copied().collect();
            dba_assign(&ids, self.sub_triggers.len())?
        } else {
            BTreeMap::new()
        };
        let scale = self.cfg.scale_factor;
        self.shards
            .par_iter()
            .map(|shard| {
                let seed = seeding::derive(self.cfg.seeds.train, &[t as u64, u64::from(shard.client_id)]);
                let trainer = self.cfg.trainer_config(seed);
                if !attackers.contains(&shard.client_id) {
                    return train_local(&self.model, shard, &trainer);
                }
                let pattern = match groups.get(&shard.client_id) {
                    Some(&g) => &self.sub_triggers[g],
                    None => &self.full_trigger,
                };
                let poisoned = poison_shard(shard, self.cfg.poison_fraction, pattern, self.cfg.seeds.attack)?;
                let mut update = train_local(&self.model, &poisoned, &trainer)?;
                if scale != 1.0 {
                    for d in &mut update.delta {
                        *d *= scale;
                    }
                }
                Ok(update)
            })
            .collect()
    }

    /// Runs the next round.
    pub fn step(&mut self) -> Result<RoundRecord> {
        let started = Instant::now();
        let t = self.round + 1;
        let attackers = self.attackers_for_round(t);
        let updates = self.local_updates(t, &attackers)?;
        let client_ids: Vec<ClientId> = updates.iter().map(|u| u.client_id).collect();
        let batch = UpdateBatch::new(updates, t)?;
        let (outcome, skipped) = match self.aggregator.aggregate(&batch) {
            Ok(o) => (Some(o), false),
            Err(Error::AllExcluded(_)) => (None, true),
            Err(e) => return Err(e),
        };
        if let Some(o) = &outcome {
            if o.global_delta.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(0));
            }
            self.model.add_scaled(1.0, &o.global_delta)?;
        }
        self.round = t;

        let main_accuracy = crate::learners::evaluate(&self.model, &self.test)?;
        let attack = attack_rate(&self.model, &self.triggered_full)?;
        let pattern_attack_rates = self
            .triggered_parts
            .iter()
            .map(|p| attack_rate(&self.model, p))
            .collect::<Result<_>>()?;
        let metrics = RoundMetrics {
            round: t,
            main_accuracy,
            attack_rate: attack,
            pattern_attack_rates,
            attacker_ids: attackers,
            selected_ids: outcome.as_ref().map(|o| o.selected_ids.clone()).unwrap_or_default(),
            excluded_pass1: outcome.as_ref().map(|o| o.excluded_pass1.clone()).unwrap_or_default(),
            excluded_pass2: outcome.as_ref().map(|o| o.excluded_pass2.clone()).unwrap_or_default(),
            skipped,
            wall_time: started.elapsed(),
        };
        Ok(RoundRecord {
            metrics,
            outcome,
            client_ids,
        })
    }

    /// Current global parameters, flattened.
    pub fn flat_model(&self) -> Vec<f64> {
        flatten(&self.model)
    }
}

fn draw_attackers(n: usize, k: usize, seed: u64, round: u64) -> BTreeSet<ClientId> {
    let mut rng = seeding::rng(seeding::derive(seed, &[0xa77ac, round]));
    sample(&mut rng, n, k.min(n))
        .into_iter()
        .map(|i| i as ClientId)
        .collect()
}

/// Runs every round of `scenario`.
pub fn run_experiment(scenario: &ScenarioConfig) -> Result<Vec<RoundMetrics>> {
    let mut sim = Simulation::new(scenario.clone())?;
    let mut out = Vec::with_capacity(scenario.rounds);
    while !sim.is_finished() {
        out.push(sim.step()?.metrics);
    }
    Ok(out)
}
