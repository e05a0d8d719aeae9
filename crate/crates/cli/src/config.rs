//! Scenario files are TOML. Top-level keys set the federation shape and
//! tables configure the parts:
//!
//! ```toml
//! n_clients = 30
//! attacker_fraction = 0.5
//! rounds = 50
//!
//! [dataset]
//! kind = "synthetic"
//!
//! [aggregator]
//! kind = "rflbat"
//! ```
//!
//! Only `dataset` and `aggregator.kind` are required. Unknown keys are
//! rejected.

use std::path::Path;

use rflbat_core::simulator::ScenarioConfig;

use crate::error::{CliError, Result};

/// Reads, resolves and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let (line, key) = match e.span() {
            Some(span) => locate(text, span.start),
            None => (None, None),
        };
        CliError::Parse {
            line,
            key,
            message: e.message().trim().to_string(),
        }
    })?;
    cfg.validate().map_err(|e| CliError::from_core("config", e))?;
    Ok(cfg)
}

/// Every resolved field, defaults included.
pub fn to_toml(cfg: &ScenarioConfig) -> String {
    toml::to_string(cfg).expect("scenario config is always representable")
}

/// 1-based line of `offset` and the dotted key defined on that line.
fn locate(text: &str, offset: usize) -> (Option<usize>, Option<String>) {
    let before = &text[..offset.min(text.len())];
    let line_no = before.matches('\n').count();
    let mut table: Option<String> = None;
    for l in text.lines().take(line_no + 1) {
        let t = l.trim();
        if t.starts_with('[') && t.ends_with(']') {
            table = Some(t.trim_matches(|c| c == '[' || c == ']').trim().to_string());
        }
    }
    let line = text.lines().nth(line_no).unwrap_or("").trim();
    let key = match line.split_once('=') {
        Some((k, _)) => {
            let k = k.trim().trim_matches('"');
            Some(match &table {
                Some(t) => format!("{t}.{k}"),
                None => k.to_string(),
            })
        }
        None if line.starts_with('[') => table,
        None => None,
    };
    (Some(line_no + 1), key)
}
