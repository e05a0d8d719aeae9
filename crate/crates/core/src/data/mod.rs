//! Datasets, client partitions and backdoor triggers.

mod dataset;
mod idx;
mod partition;
mod shard;
mod synth;
mod trigger;

pub use dataset::LabeledDataset;
pub use idx::{load_idx, parse_idx_images, parse_idx_labels, write_idx_images, write_idx_labels};
pub use partition::{partition_dirichlet, partition_iid};
pub use shard::{poison_shard, ClientShard, ShardPoison};
pub use synth::{read_synthetic, synth_dataset, write_synthetic};
pub use trigger::{apply_trigger, split_dba, TriggerCell, TriggerPattern, TriggeredTestSet};
