//! Front end for the federated simulator: scenario files, presets, run
//! manifests and sweeps.

pub mod compare;
pub mod config;
pub mod error;
pub mod manifest;
pub mod presets;
pub mod run;

pub use compare::{check_sweep, compare, SweepAxis};
pub use config::{parse_config, parse_config_str, to_toml};
pub use error::{CliError, Result};
pub use manifest::{dataset_fingerprint, RunManifest};
pub use presets::{preset, PRESETS};
pub use run::{apply_overrides, replay, run, seeds_from, RunOptions, RunSummary};

/// Environment variable capping the training worker pool.
pub const WORKERS_ENV: &str = "RFLBAT_WORKERS";

/// Sizes the global worker pool from [`WORKERS_ENV`] when it is set.
pub fn init_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    // A pool built earlier in the process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
