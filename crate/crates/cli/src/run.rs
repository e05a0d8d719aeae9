use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rflbat_core::aggregators::write_projection_dump;
use rflbat_core::data::LabeledDataset;
use rflbat_core::simulator::{RoundMetrics, ScenarioConfig, Seeds, Simulation, METRICS_HEADER};

use crate::error::{CliError, Result};
use crate::manifest::{dataset_fingerprint, RunManifest, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub dump_projections: bool,
    /// `s` becomes seeds `{data: s, attack: s+1, train: s+2}`.
    pub seed_override: Option<u64>,
    pub rounds_override: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub rounds: Vec<RoundMetrics>,
    pub final_main_acc: f64,
    pub final_attack_rate: f64,
}

impl RunSummary {
    pub fn summary_line(&self) -> String {
        format!(
            "final_main_acc={:.6} final_attack_rate={:.6}",
            self.final_main_acc, self.final_attack_rate
        )
    }
}

pub fn seeds_from(s: u64) -> Seeds {
    Seeds {
        data: s,
        attack: s.wrapping_add(1),
        train: s.wrapping_add(2),
    }
}

pub fn apply_overrides(mut cfg: ScenarioConfig, opts: &RunOptions) -> ScenarioConfig {
    if let Some(s) = opts.seed_override {
        cfg.seeds = seeds_from(s);
    }
    if let Some(t) = opts.rounds_override {
        cfg.rounds = t;
    }
    cfg
}

fn load(cfg: &ScenarioConfig) -> Result<(LabeledDataset, LabeledDataset)> {
    cfg.dataset
        .load(cfg.seeds.data)
        .map_err(|e| CliError::from_core("loading dataset", e))
}

/// Resolves overrides, writes the manifest, then runs every round.
pub fn run(cfg: ScenarioConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let cfg = apply_overrides(cfg, opts);
    cfg.validate().map_err(|e| CliError::from_core("config", e))?;
    let (train, test) = load(&cfg)?;
    let manifest = RunManifest::new(cfg, dataset_fingerprint(&train, &test), opts.dump_projections);
    execute(&manifest, train, test, out_dir)
}

/// Re-runs a manifest, refusing if the data no longer hashes the same.
pub fn replay(manifest_path: &Path, out_dir: &Path) -> Result<RunSummary> {
    let manifest = RunManifest::read(manifest_path)?;
    let (train, test) = load(&manifest.scenario)?;
    let found = dataset_fingerprint(&train, &test);
    if found != manifest.dataset_fingerprint {
        return Err(CliError::FingerprintMismatch {
            expected: manifest.dataset_fingerprint,
            found,
        });
    }
    execute(&manifest, train, test, out_dir)
}

fn execute(manifest: &RunManifest, train: LabeledDataset, test: LabeledDataset, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    manifest.write(&out_dir.join(MANIFEST_FILE))?;
    let dump_dir = manifest.outputs.projections_dir.as_ref().map(|d| out_dir.join(d));
    if let Some(d) = &dump_dir {
        std::fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
    }

    let mut sim = Simulation::with_data(manifest.scenario.clone(), train, test)
        .map_err(|e| CliError::from_core("setting up simulation", e))?;
    let csv_path = out_dir.join(&manifest.outputs.metrics_csv);
    let file = File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    let mut csv = BufWriter::new(file);
    writeln!(csv, "{METRICS_HEADER}").map_err(|e| CliError::io(&csv_path, e))?;

    let mut rounds = Vec::with_capacity(manifest.scenario.rounds);
    while !sim.is_finished() {
        let t = sim.rounds_done() + 1;
        let record = sim.step().map_err(|e| CliError::Runtime {
            context: format!("round {t}"),
            source: e,
        })?;
        if let (Some(dir), Some(proj)) = (&dump_dir, record.outcome.as_ref().and_then(|o| o.projection.as_ref())) {
            let flags: Vec<bool> = record
                .client_ids
                .iter()
                .map(|id| record.metrics.attacker_ids.contains(id))
                .collect();
            let path = dir.join(format!("round_{t:04}.bin"));
            write_projection_dump(&path, proj, &record.client_ids, &flags)
                .map_err(|e| CliError::io(&path, e))?;
        }
        writeln!(csv, "{}", record.metrics.csv_row()).map_err(|e| CliError::io(&csv_path, e))?;
        csv.flush().map_err(|e| CliError::io(&csv_path, e))?;
        rounds.push(record.metrics);
    }

    let last = rounds.last().expect("validated rounds ≥ 1");
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        final_main_acc: last.main_accuracy,
        final_attack_rate: last.attack_rate,
        rounds,
    })
}
