use std::path::Path;

use manet_elect::metrics::{csv_header, csv_row, RunSummary};

use crate::CliError;

pub fn write(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(&path, body))
        .map_err(|source| CliError::Write { path, source })
}

/// Rows sorted by (scenario, seed) so output never depends on run order.
pub fn metrics_csv(rows: &[RunSummary]) -> String {
    let mut sorted: Vec<&RunSummary> = rows.iter().collect();
    sorted.sort_by(|a, b| (&a.scenario, a.nodes, a.seed, &a.enhancements).cmp(&(&b.scenario, b.nodes, b.seed, &b.enhancements)));
    let mut out = csv_header();
    out.push('\n');
    for r in sorted {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

pub fn verdicts_jsonl(rows: &[RunSummary]) -> String {
    let mut out = String::new();
    for r in rows {
        for v in &r.verdicts {
            let mut obj = serde_json::to_value(v).expect("verdicts serialize");
            obj["scenario"] = r.scenario.clone().into();
            obj["seed"] = r.seed.into();
            obj["algorithm"] = r.algorithm.clone().into();
            out.push_str(&obj.to_string());
            out.push('\n');
        }
    }
    out
}
