//! Named scenarios: `dna-<pct>`, `dns-<alpha>`, `dnc-<n>` and `dba-mnist`.

use std::path::Path;

use rflbat_core::aggregators::AggregatorKind;
use rflbat_core::simulator::{DatasetConfig, PartitionKind, ScenarioConfig};

use crate::error::{CliError, Result};

pub const PRESETS: &[&str] = &[
    "dna-10", "dna-50", "dna-90", "dns-0.1", "dns-0.5", "dns-1", "dns-2", "dnc-50", "dnc-100", "dnc-200",
    "dnc-400", "dnc-600", "dnc-800", "dnc-1600", "dba-mnist",
];

/// Synthetic features have unit noise, so a pixel-strength trigger is too faint.
const DESK_TRIGGER_INTENSITY: f64 = 2.0;

/// IDX file paths under `dir`, using the standard MNIST names.
pub fn mnist_dataset(dir: &Path) -> DatasetConfig {
    DatasetConfig::Idx {
        train_images: dir.join("train-images-idx3-ubyte"),
        train_labels: dir.join("train-labels-idx1-ubyte"),
        test_images: dir.join("t10k-images-idx3-ubyte"),
        test_labels: dir.join("t10k-labels-idx1-ubyte"),
        train_limit: None,
        test_limit: None,
    }
}

/// Builds a preset with RFLBAT as the aggregator. `scale` sets λ and
/// `mnist_dir` replaces the synthetic dataset with IDX files.
pub fn preset(name: &str, scale: Option<f64>, mnist_dir: Option<&Path>) -> Result<ScenarioConfig> {
    let dataset = match mnist_dir {
        Some(d) => mnist_dataset(d),
        None => DatasetConfig::synthetic(),
    };
    let mut cfg = ScenarioConfig::new(dataset, AggregatorKind::Rflbat);
    cfg.n_clients = 100;
    cfg.rounds = 50;
    if mnist_dir.is_none() {
        cfg.trigger.intensity = DESK_TRIGGER_INTENSITY;
    }
    let unknown = || CliError::UnknownPreset(name.to_string());
    let (family, arg) = name.split_once('-').ok_or_else(unknown)?;
    match family {
        "dna" => {
            let pct: u32 = arg.parse().map_err(|_| unknown())?;
            if !matches!(pct, 10 | 50 | 90) {
                return Err(unknown());
            }
            cfg.attacker_fraction = f64::from(pct) / 100.0;
        }
        "dns" => {
            let alpha: f64 = arg.parse().map_err(|_| unknown())?;
            if !(alpha > 0.0) {
                return Err(unknown());
            }
            cfg.attacker_fraction = 0.5;
            cfg.partition.kind = PartitionKind::Dirichlet;
            cfg.partition.alpha = alpha;
        }
        "dnc" => {
            cfg.n_clients = arg.parse().map_err(|_| unknown())?;
            if cfg.n_clients < 3 {
                return Err(unknown());
            }
            cfg.attacker_fraction = 0.5;
        }
        "dba" if arg == "mnist" => {
            cfg.attacker_fraction = 0.4;
            cfg.trigger.dba = true;
            cfg.trigger.dba_parts = 4;
        }
        _ => return Err(unknown()),
    }
    if let Some(s) = scale {
        cfg.scale_factor = s;
    }
    cfg.validate().map_err(|e| CliError::from_core("preset", e))?;
    Ok(cfg)
}
