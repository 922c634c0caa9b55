//! Canned experiments: paired enhancement comparisons, ring sweeps and the
//! piconet fixtures used to check the master/slave message count.

mod fixtures;

use serde::Serialize;
use thiserror::Error;

use crate::election::MessageKind;
use crate::metrics::RunSummary;
use crate::scenario::{Bootstrap, Scenario, TopologyKind};
use crate::sim::{run_scenario, RunResult, SimError};

pub use fixtures::{ali_fixture, final_round_propagation, Propagation};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("`{key}` is invalid: {reason}")]
    Validation { key: String, reason: String },
    #[error("seed {seed}: fault plans differ between arms")]
    UnfairArms { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Off,
    On,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Off => "off",
            Arm::On => "on",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedRow {
    pub seed: u64,
    pub off: u64,
    pub on: u64,
}

/// Per-seed counts from an OFF/ON comparison.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PairedTable {
    pub rows: Vec<PairedRow>,
    #[serde(skip)]
    pub runs: Vec<(RunSummary, RunSummary)>,
}

impl PairedTable {
    pub fn mean(&self, arm: Arm) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let sum: u64 = self.rows.iter().map(|r| if arm == Arm::Off { r.off } else { r.on }).sum();
        sum as f64 / self.rows.len() as f64
    }

    /// Mean ON count over mean OFF count.
    pub fn ratio(&self) -> f64 {
        let off = self.mean(Arm::Off);
        if off == 0.0 {
            return if self.mean(Arm::On) == 0.0 { 1.0 } else { f64::INFINITY };
        }
        self.mean(Arm::On) / off
    }

    pub fn reduction(&self) -> f64 {
        1.0 - self.ratio()
    }

    pub fn seeds_where(&self, pred: impl Fn(&PairedRow) -> bool) -> usize {
        self.rows.iter().filter(|r| pred(r)).count()
    }

    /// Plot-ready long format: `seed,arm,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,arm,count\n");
        for r in &self.rows {
            out.push_str(&format!("{},off,{}\n", r.seed, r.off));
            out.push_str(&format!("{},on,{}\n", r.seed, r.on));
        }
        out
    }
}

fn check_seeds(seeds: &[u64]) -> Result<(), ExperimentError> {
    if seeds.is_empty() {
        return Err(ExperimentError::Validation { key: "seeds".into(), reason: "empty seed list".into() });
    }
    Ok(())
}

/// Runs `base` twice per seed with `toggle` applied OFF then ON and records
/// `count` for each arm.
pub fn run_paired(
    base: &Scenario,
    seeds: &[u64],
    toggle: impl Fn(&mut Scenario, bool),
    count: impl Fn(&RunResult) -> u64,
) -> Result<PairedTable, ExperimentError> {
    check_seeds(seeds)?;
    let mut table = PairedTable::default();
    for &seed in seeds {
        let arms = [false, true].map(|on| {
            let mut sc = base.clone();
            sc.seed = seed;
            toggle(&mut sc, on);
            sc
        });
        let off = run_scenario(&arms[0], false)?;
        let on = run_scenario(&arms[1], false)?;
        if off.faults != on.faults {
            return Err(ExperimentError::UnfairArms { seed });
        }
        table.rows.push(PairedRow { seed, off: count(&off), on: count(&on) });
        table.runs.push((off.summary, on.summary));
    }
    Ok(table)
}

/// Elections started with the wake-up inquiry OFF and ON.
pub fn run_fig3(base: &Scenario, seeds: &[u64]) -> Result<PairedTable, ExperimentError> {
    run_paired(
        base,
        seeds,
        |sc, on| sc.enhancements.inquiry_on_recover = on,
        |r| r.summary.metrics.elections_started,
    )
}

/// Election messages with contention backoff OFF and ON.
pub fn run_fig4(base: &Scenario, seeds: &[u64]) -> Result<PairedTable, ExperimentError> {
    run_paired(
        base,
        seeds,
        |sc, on| sc.enhancements.csma_backoff = on,
        |r| r.summary.metrics.count(MessageKind::Election),
    )
}

/// One single-starter ring run per (size, seed), rows sorted by (size, seed).
pub fn run_sweep(base: &Scenario, sizes: &[usize], seeds: &[u64]) -> Result<Vec<RunSummary>, ExperimentError> {
    check_seeds(seeds)?;
    if sizes.is_empty() {
        return Err(ExperimentError::Validation { key: "sizes".into(), reason: "empty size list".into() });
    }
    let mut rows = Vec::with_capacity(sizes.len() * seeds.len());
    for &n in sizes {
        for &seed in seeds {
            let mut sc = base.clone();
            sc.nodes = n;
            sc.seed = seed;
            if !matches!(sc.topology.kind, TopologyKind::Ring | TopologyKind::Line) {
                sc.topology.kind = TopologyKind::Ring;
            }
            sc.election.bootstrap = Bootstrap::Single;
            sc.election.starter = 0;
            sc.uids.clear();
            sc.topology.positions.clear();
            sc.topology.edges.clear();
            sc.validate()?;
            rows.push(run_scenario(&sc, false)?.summary);
        }
    }
    Ok(rows)
}

/// `(n, election traffic)` pairs for the linear-bound check.
pub fn sweep_series(rows: &[RunSummary]) -> Vec<(usize, f64)> {
    rows.iter().map(|r| (r.nodes, r.metrics.election_traffic() as f64)).collect()
}

impl From<crate::scenario::ScenarioError> for ExperimentError {
    fn from(e: crate::scenario::ScenarioError) -> Self {
        ExperimentError::Sim(SimError::Scenario(e))
    }
}
