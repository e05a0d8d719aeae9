//! Server-side aggregation rules behind the [`Aggregator`] trait.

mod baseline;
mod dump;
mod foolsgold;
mod rflbat;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use baseline::{fedavg_aggregate, geomed_aggregate, krum_scores, multi_krum_aggregate, rfa_aggregate};
pub use dump::{read_projection_dump, write_projection_dump, ProjectionDump};
pub use foolsgold::{foolsgold_aggregate, foolsgold_weights, FoolsGold, History};
pub use rflbat::rflbat_aggregate;

use crate::error::{Error, Result};
use crate::learners::FlatUpdate;
use crate::numerics::{KMeansConfig, Matrix, WeiszfeldConfig};
use crate::ClientId;

/// All updates collected in one round.
#[derive(Debug, Clone)]
pub struct UpdateBatch {
    pub updates: Vec<FlatUpdate>,
    pub round: usize,
}

impl UpdateBatch {
    /// Checks equal lengths, distinct ids, finite entries and positive counts.
    pub fn new(updates: Vec<FlatUpdate>, round: usize) -> Result<Self> {
        let dim = updates.first().map_or(0, |u| u.delta.len());
        let mut ids = BTreeSet::new();
        for u in &updates {
            if u.delta.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    actual: u.delta.len(),
                });
            }
            if !ids.insert(u.client_id) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate client id {}",
                    u.client_id
                )));
            }
            if let Some(i) = u.delta.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            if u.sample_count == 0 {
                return Err(Error::InvalidConfig(format!(
                    "client {} reports zero samples",
                    u.client_id
                )));
            }
        }
        Ok(Self { updates, round })
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.updates.first().map_or(0, |u| u.delta.len())
    }

    pub fn ids(&self) -> Vec<ClientId> {
        self.updates.iter().map(|u| u.client_id).collect()
    }

    pub(crate) fn matrix(&self) -> Matrix {
        Matrix::from_rows(&self.updates.iter().map(|u| u.delta.as_slice()).collect::<Vec<_>>())
            .expect("validated batch")
    }

    pub(crate) fn ids_of(&self, indices: &[usize]) -> BTreeSet<ClientId> {
        indices.iter().map(|&i| self.updates[i].client_id).collect()
    }

    /// Sample-count-weighted mean of the chosen updates.
    pub(crate) fn weighted_mean(&self, indices: &[usize]) -> Vec<f64> {
        let total: f64 = indices.iter().map(|&i| self.updates[i].sample_count as f64).sum();
        let mut out = vec![0.0; self.dim()];
        for &i in indices {
            let p = self.updates[i].sample_count as f64 / total;
            for (o, d) in out.iter_mut().zip(&self.updates[i].delta) {
                *o += p * d;
            }
        }
        out
    }

    pub(crate) fn normalized_counts(&self) -> Vec<f64> {
        let total: f64 = self.updates.iter().map(|u| u.sample_count as f64).sum();
        self.updates.iter().map(|u| u.sample_count as f64 / total).collect()
    }
}

/// Hyperparameters for every rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregatorConfig {
    /// First-pass outlier threshold on median-normalised distance sums.
    pub eps1: f64,
    /// Second-pass threshold inside the selected cluster.
    pub eps2: f64,
    /// Number of principal components kept.
    pub h: usize,
    pub kmeans: KMeansConfig,
    /// Base seed; each round clusters with a sub-seed derived from it.
    pub kmeans_seed: u64,
    /// Multi-Krum's assumed attacker count. `None` lets the caller decide.
    pub krum_f: Option<usize>,
    pub weiszfeld: WeiszfeldConfig,
    /// Outer Weiszfeld iterations allowed to RFA.
    pub rfa_max_iter: usize,
    pub foolsgold_eps: f64,
    pub foolsgold_confidence: f64,
}

impl Default for AggregatorConfig {
    fn default() -> Self {
        Self {
            eps1: 10.0,
            eps2: 4.0,
            h: 2,
            kmeans: KMeansConfig::default(),
            kmeans_seed: 0,
            krum_f: None,
            weiszfeld: WeiszfeldConfig::default(),
            rfa_max_iter: 3,
            foolsgold_eps: 1e-5,
            foolsgold_confidence: 1.0,
        }
    }
}

impl AggregatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0 && self.eps2 > 0.0) {
            return Err(Error::InvalidConfig("ε₁ and ε₂ must be positive".into()));
        }
        if !(self.eps2 < self.eps1) {
            return Err(Error::InvalidConfig(format!(
                "ε₂ < ε₁ violated: ε₂={} ε₁={}",
                self.eps2, self.eps1
            )));
        }
        if self.h == 0 {
            return Err(Error::InvalidConfig("h ≥ 1 violated".into()));
        }
        if self.kmeans.restarts == 0 || self.kmeans.max_iter == 0 {
            return Err(Error::InvalidConfig("kmeans restarts and max_iter must be ≥ 1".into()));
        }
        if !(self.weiszfeld.nu > 0.0 && self.weiszfeld.tol > 0.0) {
            return Err(Error::InvalidConfig("weiszfeld nu and tol must be positive".into()));
        }
        if self.rfa_max_iter == 0 {
            return Err(Error::InvalidConfig("rfa_max_iter must be ≥ 1".into()));
        }
        if !(self.foolsgold_confidence > 0.0) {
            return Err(Error::InvalidConfig("foolsgold confidence must be positive".into()));
        }
        Ok(())
    }
}

/// Per-cluster similarity summary from the RFLBAT selection step.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub member_ids: Vec<ClientId>,
    /// Median over members of their mean cosine similarity to the others.
    pub v_cmed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationOutcome {
    pub global_delta: Vec<f64>,
    pub selected_ids: BTreeSet<ClientId>,
    pub excluded_pass1: BTreeSet<ClientId>,
    pub excluded_pass2: BTreeSet<ClientId>,
    pub cluster_report: Vec<ClusterReport>,
    pub selected_cluster: Option<usize>,
    /// N×h projected coordinates in batch order, when the rule computes them.
    pub projection: Option<Matrix>,
    /// Effective normalised weight of every client in batch order.
    pub weights: Vec<f64>,
}

impl AggregationOutcome {
    pub(crate) fn plain(batch: &UpdateBatch, global_delta: Vec<f64>, weights: Vec<f64>) -> Self {
        Self {
            global_delta,
            selected_ids: batch.ids().into_iter().collect(),
            excluded_pass1: BTreeSet::new(),
            excluded_pass2: BTreeSet::new(),
            cluster_report: Vec::new(),
            selected_cluster: None,
            projection: None,
            weights,
        }
    }
}

/// Which rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregatorKind {
    Rflbat,
    Fedavg,
    Multikrum,
    Geomed,
    Rfa,
    Foolsgold,
}

impl AggregatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            AggregatorKind::Rflbat => "rflbat",
            AggregatorKind::Fedavg => "fedavg",
            AggregatorKind::Multikrum => "multikrum",
            AggregatorKind::Geomed => "geomed",
            AggregatorKind::Rfa => "rfa",
            AggregatorKind::Foolsgold => "foolsgold",
        }
    }
}

/// A stateful aggregation rule. Only FoolsGold keeps state between rounds.
pub trait Aggregator: Send + Sync {
    fn kind(&self) -> AggregatorKind;
    fn aggregate(&mut self, batch: &UpdateBatch) -> Result<AggregationOutcome>;
}

struct Stateless {
    kind: AggregatorKind,
    cfg: AggregatorConfig,
}

impl Aggregator for Stateless {
    fn kind(&self) -> AggregatorKind {
        self.kind
    }

    fn aggregate(&mut self, batch: &UpdateBatch) -> Result<AggregationOutcome> {
        match self.kind {
            AggregatorKind::Rflbat => rflbat_aggregate(batch, &self.cfg),
            AggregatorKind::Fedavg => fedavg_aggregate(batch),
            AggregatorKind::Multikrum => multi_krum_aggregate(batch, self.cfg.krum_f.unwrap_or(0)),
            AggregatorKind::Geomed => geomed_aggregate(batch, &self.cfg),
            AggregatorKind::Rfa => rfa_aggregate(batch, &self.cfg),
            AggregatorKind::Foolsgold => unreachable!("foolsgold is stateful"),
        }
    }
}

/// Instantiates `kind`; `client_ids` seeds FoolsGold's history.
pub fn build_aggregator(
    kind: AggregatorKind,
    cfg: AggregatorConfig,
    client_ids: &[ClientId],
    dim: usize,
) -> Box<dyn Aggregator> {
    match kind {
        AggregatorKind::Foolsgold => Box::new(FoolsGold::new(cfg, client_ids, dim)),
        _ => Box::new(Stateless { kind, cfg }),
    }
}
