//! Federated round orchestration.

mod engine;
mod metrics;
mod scenario;

pub use engine::{attack_rate, dba_assign, run_experiment, RoundRecord, Simulation};
pub use metrics::{format_metrics_csv, RoundMetrics, METRICS_HEADER};
pub use scenario::{
    AggregatorSection, AttackerSchedule, DatasetConfig, ModelConfig, ModelKind, PartitionConfig,
    PartitionKind, ScenarioConfig,
    Seeds, TrainerSection, TriggerConfig,
};
