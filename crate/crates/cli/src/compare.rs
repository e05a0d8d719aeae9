use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rflbat_core::aggregators::AggregatorKind;
use rflbat_core::simulator::ScenarioConfig;

use crate::error::{CliError, Result};
use crate::run::{run, RunOptions, RunSummary};

pub const COMPARE_FILE: &str = "compare.csv";

/// The one field, besides the aggregator, allowed to differ across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Only the aggregator varies.
    None,
    Alpha,
    Clients,
    AttackerFraction,
    Scale,
}

impl SweepAxis {
    pub fn column(&self) -> &'static str {
        match self {
            SweepAxis::None => "sweep",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Clients => "n_clients",
            SweepAxis::AttackerFraction => "attacker_fraction",
            SweepAxis::Scale => "scale_factor",
        }
    }

    fn value(&self, cfg: &ScenarioConfig) -> String {
        match self {
            SweepAxis::None => String::new(),
            SweepAxis::Alpha => cfg.partition.alpha.to_string(),
            SweepAxis::Clients => cfg.n_clients.to_string(),
            SweepAxis::AttackerFraction => cfg.attacker_fraction.to_string(),
            SweepAxis::Scale => cfg.scale_factor.to_string(),
        }
    }

    /// `cfg` with the aggregator and this axis reset, for comparing the rest.
    fn neutral(&self, cfg: &ScenarioConfig) -> ScenarioConfig {
        let mut c = cfg.clone();
        c.aggregator.kind = AggregatorKind::Rflbat;
        match self {
            SweepAxis::None => {}
            SweepAxis::Alpha => c.partition.alpha = 0.0,
            SweepAxis::Clients => c.n_clients = 0,
            SweepAxis::AttackerFraction => c.attacker_fraction = 0.0,
            SweepAxis::Scale => c.scale_factor = 0.0,
        }
        c
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" | "aggregator" => SweepAxis::None,
            "alpha" => SweepAxis::Alpha,
            "n_clients" | "clients" => SweepAxis::Clients,
            "attacker_fraction" => SweepAxis::AttackerFraction,
            "scale_factor" | "scale" => SweepAxis::Scale,
            other => return Err(CliError::IncompatibleSweep(format!("unknown axis `{other}`"))),
        })
    }
}

/// Rejects sweeps with fewer than two configs, configs that differ outside
/// the aggregator and `axis`, and duplicate (aggregator, value) keys.
pub fn check_sweep(configs: &[ScenarioConfig], axis: SweepAxis) -> Result<()> {
    if configs.len() < 2 {
        return Err(CliError::IncompatibleSweep(format!(
            "need at least 2 configs, got {}",
            configs.len()
        )));
    }
    let base = axis.neutral(&configs[0]);
    let mut keys = BTreeSet::new();
    for (i, c) in configs.iter().enumerate() {
        if axis.neutral(c) != base {
            return Err(CliError::IncompatibleSweep(format!(
                "config {i} differs from config 0 outside the aggregator and `{}`",
                axis.column()
            )));
        }
        if !keys.insert((c.aggregator.kind.name(), axis.value(c))) {
            return Err(CliError::IncompatibleSweep(format!(
                "config {i} repeats aggregator {} at {}={}",
                c.aggregator.kind.name(),
                axis.column(),
                axis.value(c)
            )));
        }
    }
    Ok(())
}

/// Runs each config under `out_dir/run_NN` and writes one summary row per run.
pub fn compare(configs: &[ScenarioConfig], axis: SweepAxis, out_dir: &Path, opts: &RunOptions) -> Result<String> {
    check_sweep(configs, axis)?;
    let mut rows = Vec::new();
    for (i, cfg) in configs.iter().enumerate() {
        let summary = run(cfg.clone(), &out_dir.join(format!("run_{i:02}")), opts)?;
        rows.push((cfg, summary));
    }
    let table = format_table(&rows, axis);
    let path = out_dir.join(COMPARE_FILE);
    std::fs::write(&path, &table).map_err(|e| CliError::io(&path, e))?;
    Ok(table)
}

fn format_table(rows: &[(&ScenarioConfig, RunSummary)], axis: SweepAxis) -> String {
    let mut out = format!(
        "aggregator,{},final_main_acc,final_attack_rate,final_attack_rate_b0,final_attack_rate_b1,final_attack_rate_b2,final_attack_rate_b3,run_dir\n",
        axis.column()
    );
    for (cfg, s) in rows {
        write!(
            out,
            "{},{},{:.6},{:.6}",
            cfg.aggregator.kind.name(),
            axis.value(cfg),
            s.final_main_acc,
            s.final_attack_rate
        )
        .unwrap();
        let parts = &s.rounds.last().expect("at least one round").pattern_attack_rates;
        for b in 0..4 {
            match parts.get(b) {
                Some(r) => write!(out, ",{r:.6}").unwrap(),
                None => out.push(','),
            }
        }
        let dir = s.out_dir.file_name().map(|d| d.to_string_lossy().into_owned()).unwrap_or_default();
        writeln!(out, ",{dir}").unwrap();
    }
    out
}
