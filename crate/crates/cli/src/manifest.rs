use std::path::Path;

use rflbat_core::data::LabeledDataset;
use rflbat_core::simulator::ScenarioConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PROJECTIONS_DIR: &str = "projections";

/// Output locations, relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub metrics_csv: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections_dir: Option<String>,
}

/// Everything that determines a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub artifact_version: String,
    /// SHA-256 over the train then test datasets' canonical bytes.
    pub dataset_fingerprint: String,
    pub outputs: Outputs,
    pub scenario: ScenarioConfig,
}

impl RunManifest {
    pub fn new(scenario: ScenarioConfig, fingerprint: String, dump_projections: bool) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_fingerprint: fingerprint,
            outputs: Outputs {
                metrics_csv: METRICS_FILE.to_string(),
                projections_dir: dump_projections.then(|| PROJECTIONS_DIR.to_string()),
            },
            scenario,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest is always representable")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: RunManifest = toml::from_str(&text).map_err(|e| CliError::Parse {
            line: e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            key: None,
            message: e.message().trim().to_string(),
        })?;
        m.scenario.validate().map_err(|e| CliError::from_core("manifest", e))?;
        Ok(m)
    }
}

/// Hex SHA-256 of both datasets, so the same files always hash the same.
pub fn dataset_fingerprint(train: &LabeledDataset, test: &LabeledDataset) -> String {
    let mut h = Sha256::new();
    h.update(train.fingerprint_bytes());
    h.update(test.fingerprint_bytes());
    hex::encode(h.finalize())
}
