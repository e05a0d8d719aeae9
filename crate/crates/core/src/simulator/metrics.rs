use std::collections::BTreeSet;
use std::fmt::Write;
use std::time::Duration;

use crate::ClientId;

pub const METRICS_HEADER: &str = "round,main_acc,attack_rate,attack_rate_b0,attack_rate_b1,attack_rate_b2,attack_rate_b3,n_selected,n_excluded_p1,n_excluded_p2,skipped";

/// What one round produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    /// 1-based round index.
    pub round: usize,
    pub main_accuracy: f64,
    /// Attack rate of the full trigger.
    pub attack_rate: f64,
    /// Attack rate of each DBA sub-pattern; empty when DBA is off.
    pub pattern_attack_rates: Vec<f64>,
    pub attacker_ids: BTreeSet<ClientId>,
    pub selected_ids: BTreeSet<ClientId>,
    pub excluded_pass1: BTreeSet<ClientId>,
    pub excluded_pass2: BTreeSet<ClientId>,
    /// The aggregator excluded everyone; the global model was left as is.
    pub skipped: bool,
    pub wall_time: Duration,
}

impl RoundMetrics {
    /// True when no attacker made it into the aggregate.
    pub fn attackers_excluded(&self) -> bool {
        self.skipped || self.attacker_ids.is_disjoint(&self.selected_ids)
    }

    pub fn csv_row(&self) -> String {
        let mut row = String::new();
        write!(row, "{},{:.6},{:.6}", self.round, self.main_accuracy, self.attack_rate).unwrap();
        for b in 0..4 {
            match self.pattern_attack_rates.get(b) {
                Some(r) => write!(row, ",{r:.6}").unwrap(),
                None => row.push(','),
            }
        }
        write!(
            row,
            ",{},{},{},{}",
            self.selected_ids.len(),
            self.excluded_pass1.len(),
            self.excluded_pass2.len(),
            u8::from(self.skipped)
        )
        .unwrap();
        row
    }
}

/// Header plus one line per round, newline-terminated.
pub fn format_metrics_csv(rounds: &[RoundMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rounds {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
