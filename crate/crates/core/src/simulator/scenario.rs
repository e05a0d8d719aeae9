use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::aggregators::{AggregatorConfig, AggregatorKind};
use crate::data::{load_idx, read_synthetic, synth_dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::learners::{Architecture, TrainerConfig};
use crate::numerics::{KMeansConfig, WeiszfeldConfig};

/// Where train and test data come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    /// Gaussian blobs; see [`synth_dataset`].
    Synthetic {
        #[serde(default = "d_classes")]
        classes: usize,
        #[serde(default = "d_per_class")]
        per_class: usize,
        #[serde(default = "d_test_per_class")]
        test_per_class: usize,
        #[serde(default = "d_feature_dim")]
        feature_dim: usize,
        #[serde(default = "d_separation")]
        separation: f64,
    },
    /// MNIST-style IDX files.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        train_limit: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_limit: Option<usize>,
    },
    /// Files in the little-endian synthetic binary format.
    Binary { train: PathBuf, test: PathBuf },
}

fn d_classes() -> usize {
    10
}
fn d_per_class() -> usize {
    600
}
fn d_test_per_class() -> usize {
    100
}
fn d_feature_dim() -> usize {
    784
}
fn d_separation() -> f64 {
    5.0
}

impl DatasetConfig {
    /// Synthetic data with every field at its default.
    pub fn synthetic() -> Self {
        DatasetConfig::Synthetic {
            classes: d_classes(),
            per_class: d_per_class(),
            test_per_class: d_test_per_class(),
            feature_dim: d_feature_dim(),
            separation: d_separation(),
        }
    }

    /// Loads `(train, test)`.
    pub fn load(&self, data_seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
        match self {
            DatasetConfig::Synthetic {
                classes,
                per_class,
                test_per_class,
                feature_dim,
                separation,
            } => {
                let all = synth_dataset(
                    *classes,
                    per_class + test_per_class,
                    *feature_dim,
                    *separation,
                    data_seed,
                )?;
                let mut taken = vec![0usize; *classes];
                let (mut train_f, mut train_l, mut test_f, mut test_l) =
                    (Vec::new(), Vec::new(), Vec::new(), Vec::new());
                for i in 0..all.len() {
                    let y = all.label(i);
                    if taken[y] < *per_class {
                        taken[y] += 1;
                        train_f.extend_from_slice(all.row(i));
                        train_l.push(y);
                    } else {
                        test_f.extend_from_slice(all.row(i));
                        test_l.push(y);
                    }
                }
                Ok((
                    LabeledDataset::new(*feature_dim, *classes, train_f, train_l)?,
                    LabeledDataset::new(*feature_dim, *classes, test_f, test_l)?,
                ))
            }
            DatasetConfig::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
                train_limit,
                test_limit,
            } => {
                let mut train = load_idx(train_images, train_labels)?;
                let mut test = load_idx(test_images, test_labels)?;
                if let Some(n) = train_limit {
                    train = train.truncated(*n);
                }
                if let Some(n) = test_limit {
                    test = test.truncated(*n);
                }
                Ok((train, test))
            }
            DatasetConfig::Binary { train, test } => Ok((read_synthetic(train)?, read_synthetic(test)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AttackerSchedule {
    /// One attacker set for the whole run.
    Static,
    /// A fresh uniform draw every round.
    #[default]
    Resampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default)]
    pub kind: PartitionKind,
    /// Dirichlet concentration; ignored for IID.
    #[serde(default = "d_alpha")]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    #[default]
    Iid,
    Dirichlet,
}


fn d_alpha() -> f64 {
    0.5
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            kind: PartitionKind::Iid,
            alpha: d_alpha(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TriggerConfig {
    pub intensity: f64,
    pub target_label: usize,
    /// Split the trigger across attacker groups.
    pub dba: bool,
    pub dba_parts: usize,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        Self {
            intensity: 1.0,
            target_label: 0,
            dba: false,
            dba_parts: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Hidden width for the MLP.
    pub hidden: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Logistic,
    Mlp,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Logistic,
            hidden: 32,
        }
    }
}

impl ModelConfig {
    pub fn architecture(&self, inputs: usize, classes: usize) -> Architecture {
        match self.kind {
            ModelKind::Logistic => Architecture::LogisticRegression { inputs, classes },
            ModelKind::Mlp => Architecture::Mlp {
                inputs,
                hidden: self.hidden,
                classes,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerSection {
    pub local_iterations: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for TrainerSection {
    fn default() -> Self {
        let t = TrainerConfig::default();
        Self {
            local_iterations: t.local_iterations,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
        }
    }
}

/// Flat key set for the aggregator block of a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregatorSection {
    pub kind: AggregatorKind,
    #[serde(default = "d_eps1")]
    pub eps1: f64,
    #[serde(default = "d_eps2")]
    pub eps2: f64,
    #[serde(default = "d_h")]
    pub h: usize,
    #[serde(default = "d_restarts")]
    pub kmeans_restarts: usize,
    #[serde(default = "d_kmeans_iter")]
    pub kmeans_max_iter: usize,
    /// Defaults to the attacker count when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krum_f: Option<usize>,
    #[serde(default = "d_nu")]
    pub weiszfeld_nu: f64,
    #[serde(default = "d_tol")]
    pub weiszfeld_tol: f64,
    #[serde(default = "d_wz_iter")]
    pub weiszfeld_max_iter: usize,
    #[serde(default = "d_rfa_iter")]
    pub rfa_max_iter: usize,
    #[serde(default = "d_fg_eps")]
    pub foolsgold_eps: f64,
    #[serde(default = "d_fg_conf")]
    pub foolsgold_confidence: f64,
}

fn d_eps1() -> f64 {
    10.0
}
fn d_eps2() -> f64 {
    4.0
}
fn d_h() -> usize {
    2
}
fn d_restarts() -> usize {
    10
}
fn d_kmeans_iter() -> usize {
    300
}
fn d_nu() -> f64 {
    1e-6
}
fn d_tol() -> f64 {
    1e-9
}
fn d_wz_iter() -> usize {
    100
}
fn d_rfa_iter() -> usize {
    3
}
fn d_fg_eps() -> f64 {
    1e-5
}
fn d_fg_conf() -> f64 {
    1.0
}

impl AggregatorSection {
    pub fn new(kind: AggregatorKind) -> Self {
        Self {
            kind,
            eps1: d_eps1(),
            eps2: d_eps2(),
            h: d_h(),
            kmeans_restarts: d_restarts(),
            kmeans_max_iter: d_kmeans_iter(),
            krum_f: None,
            weiszfeld_nu: d_nu(),
            weiszfeld_tol: d_tol(),
            weiszfeld_max_iter: d_wz_iter(),
            rfa_max_iter: d_rfa_iter(),
            foolsgold_eps: d_fg_eps(),
            foolsgold_confidence: d_fg_conf(),
        }
    }

    pub fn config(&self, kmeans_seed: u64, attackers: usize) -> AggregatorConfig {
        AggregatorConfig {
            eps1: self.eps1,
            eps2: self.eps2,
            h: self.h,
            kmeans: KMeansConfig {
                restarts: self.kmeans_restarts,
                max_iter: self.kmeans_max_iter,
            },
            kmeans_seed,
            krum_f: Some(self.krum_f.unwrap_or(attackers)),
            weiszfeld: WeiszfeldConfig {
                nu: self.weiszfeld_nu,
                tol: self.weiszfeld_tol,
                max_iter: self.weiszfeld_max_iter,
            },
            rfa_max_iter: self.rfa_max_iter,
            foolsgold_eps: self.foolsgold_eps,
            foolsgold_confidence: self.foolsgold_confidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    /// Dataset generation and partitioning.
    pub data: u64,
    /// Attacker selection and poisoned-sample flags.
    pub attack: u64,
    /// Model init, batch sampling and clustering.
    pub train: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            data: 1,
            attack: 2,
            train: 3,
        }
    }
}

/// Everything needed to reproduce one federated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "d_clients")]
    pub n_clients: usize,
    /// Share of clients that attack, K/N.
    #[serde(default)]
    pub attacker_fraction: f64,
    #[serde(default)]
    pub attacker_schedule: AttackerSchedule,
    /// Fraction of each attacker's shard flagged as poisoned.
    #[serde(default = "d_poison")]
    pub poison_fraction: f64,
    /// Multiplier applied to attacker deltas before submission.
    #[serde(default = "d_scale")]
    pub scale_factor: f64,
    #[serde(default = "d_rounds")]
    pub rounds: usize,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub trigger: TriggerConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub trainer: TrainerSection,
    pub aggregator: AggregatorSection,
    #[serde(default)]
    pub seeds: Seeds,
}

fn d_clients() -> usize {
    100
}
fn d_poison() -> f64 {
    0.5
}
fn d_scale() -> f64 {
    1.0
}
fn d_rounds() -> usize {
    50
}

impl ScenarioConfig {
    pub fn new(dataset: DatasetConfig, aggregator: AggregatorKind) -> Self {
        Self {
            n_clients: d_clients(),
            attacker_fraction: 0.0,
            attacker_schedule: AttackerSchedule::Resampled,
            poison_fraction: d_poison(),
            scale_factor: d_scale(),
            rounds: d_rounds(),
            dataset,
            partition: PartitionConfig::default(),
            trigger: TriggerConfig::default(),
            model: ModelConfig::default(),
            trainer: TrainerSection::default(),
            aggregator: AggregatorSection::new(aggregator),
            seeds: Seeds::default(),
        }
    }

    /// K, the number of attacking clients per round.
    pub fn attacker_count(&self) -> usize {
        (self.attacker_fraction * self.n_clients as f64).round() as usize
    }

    pub fn aggregator_config(&self) -> AggregatorConfig {
        self.aggregator.config(self.seeds.train, self.attacker_count())
    }

    pub fn trainer_config(&self, seed: u64) -> TrainerConfig {
        TrainerConfig {
            local_iterations: self.trainer.local_iterations,
            learning_rate: self.trainer.learning_rate,
            batch_size: self.trainer.batch_size,
            seed,
        }
    }

    /// Checks every cross-field invariant.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.n_clients == 0 {
            return fail("n_clients ≥ 1 violated".into());
        }
        if !(0.0..=1.0).contains(&self.attacker_fraction) {
            return fail(format!(
                "0 ≤ K ≤ N violated: attacker_fraction={}",
                self.attacker_fraction
            ));
        }
        if !(self.scale_factor >= 1.0 && self.scale_factor.is_finite()) {
            return fail(format!("λ ≥ 1 violated: scale_factor={}", self.scale_factor));
        }
        if self.rounds == 0 {
            return fail("T ≥ 1 violated: rounds=0".into());
        }
        if !(self.poison_fraction > 0.0 && self.poison_fraction <= 1.0) {
            return fail(format!(
                "0 < poison_fraction ≤ 1 violated: {}",
                self.poison_fraction
            ));
        }
        if self.partition.kind == PartitionKind::Dirichlet && !(self.partition.alpha > 0.0) {
            return fail(format!("α > 0 violated: alpha={}", self.partition.alpha));
        }
        if self.trainer.local_iterations == 0 {
            return fail("E ≥ 1 violated: local_iterations=0".into());
        }
        if !(self.trainer.learning_rate >= 0.0 && self.trainer.learning_rate.is_finite()) {
            return fail("learning_rate must be a non-negative number".into());
        }
        if self.trainer.batch_size < 2 && self.attacker_count() > 0 {
            return fail("n_B ≥ 2 violated: poisoned batches need a half split".into());
        }
        if self.trainer.batch_size == 0 {
            return fail("batch_size ≥ 1 violated".into());
        }
        if self.model.kind == ModelKind::Mlp && self.model.hidden == 0 {
            return fail("mlp hidden width must be ≥ 1".into());
        }
        if self.trigger.dba && self.trigger.dba_parts == 0 {
            return fail("dba_parts ≥ 1 violated".into());
        }
        let agg = self.aggregator_config();
        agg.validate()?;
        let n = self.n_clients;
        match self.aggregator.kind {
            AggregatorKind::Rflbat if n < 3 => fail(format!("RFLBAT needs N ≥ 3, got {n}")),
            AggregatorKind::Multikrum => {
                let f = agg.krum_f.unwrap_or(0);
                if f + 2 >= n {
                    fail(format!("krum_f < N−2 violated: f={f} N={n}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}
