use serde::{Deserialize, Serialize};

use super::{OracleVerdict, RunMetrics};
use crate::election::MessageKind;

/// What one run contributes to `metrics.csv` and `verdicts.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub algorithm: String,
    /// Enabled enhancements joined by `+`, or `-`.
    pub enhancements: String,
    pub nodes: usize,
    pub metrics: RunMetrics,
    pub verdicts: Vec<OracleVerdict>,
    pub horizon_exceeded: bool,
}

impl RunSummary {
    pub fn safety_counts(&self) -> (usize, usize, usize) {
        let stable: Vec<_> = self.verdicts.iter().filter(|v| v.stable).collect();
        let pass = stable.iter().filter(|v| v.pass).count();
        (pass, stable.len() - pass, self.verdicts.len() - stable.len())
    }

    pub fn safe(&self) -> bool {
        self.safety_counts().1 == 0
    }
}

pub fn csv_header() -> String {
    let mut cols: Vec<String> =
        ["scenario", "seed", "algorithm", "enhancements", "nodes"].iter().map(|s| s.to_string()).collect();
    cols.extend(MessageKind::ALL.iter().map(|k| format!("msg_{}", k.as_str())));
    cols.extend(
        [
            "messages",
            "attempts",
            "undeliverable",
            "lost",
            "dead_deliveries",
            "dropped_stale",
            "elections_started",
            "elections_completed",
            "mean_steps",
            "mean_ticks",
            "mean_pn",
            "mean_anon",
            "safety_pass",
            "safety_fail",
            "unstable",
            "horizon_exceeded",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols.join(",")
}

pub fn csv_row(s: &RunSummary) -> String {
    let m = &s.metrics;
    let mut cols = vec![s.scenario.clone(), s.seed.to_string(), s.algorithm.clone(), s.enhancements.clone(), s.nodes.to_string()];
    cols.extend(MessageKind::ALL.iter().map(|k| m.count(*k).to_string()));
    let (pass, fail, unstable) = s.safety_counts();
    cols.extend([
        m.total_messages().to_string(),
        m.attempts.to_string(),
        m.undeliverable.to_string(),
        m.lost.to_string(),
        m.dead_deliveries.to_string(),
        m.dropped_stale.to_string(),
        m.elections_started.to_string(),
        m.elections_completed.to_string(),
        format!("{:.3}", m.mean_steps()),
        format!("{:.3}", m.mean_ticks()),
        format!("{:.3}", m.mean_participants()),
        format!("{:.3}", m.mean_anon()),
        pass.to_string(),
        fail.to_string(),
        unstable.to_string(),
        s.horizon_exceeded.to_string(),
    ]);
    cols.join(",")
}
