//! Run counters, the brute-force leader oracle and complexity validators.

mod bounds;
mod oracle;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::election::MessageKind;

pub use bounds::{mean_by_size, validate_ali_formula, validate_linear_bound, AliVerdict, BoundError, LinearVerdict};
pub use oracle::{check_safety, oracle_key, OracleInputs, OracleVerdict};
pub use report::{csv_header, csv_row, RunSummary};

/// One election computation that reached at least one node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectionRecord {
    pub id: String,
    pub level: u8,
    pub starter: u64,
    pub start: u64,
    pub end: Option<u64>,
    /// Longest causal message chain seen by the root.
    pub steps: u32,
    pub participants: usize,
    /// Mean neighbor count over participants at completion.
    pub anon: f64,
}

impl ElectionRecord {
    pub fn ticks(&self) -> Option<u64> {
        self.end.map(|e| e - self.start)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Messages handed to a link, by kind.
    pub messages_by_kind: BTreeMap<String, u64>,
    /// Every send call, including those that never reached a link.
    pub attempts: u64,
    /// Sends with no link to the destination at send time.
    pub undeliverable: u64,
    /// Messages dropped by a lossy link.
    pub lost: u64,
    /// Arrivals at a crashed node.
    pub dead_deliveries: u64,
    /// Sent but still travelling when the run stopped.
    pub in_flight: u64,
    pub dropped_stale: u64,
    pub elections_started: u64,
    pub elections_completed: u64,
    pub elections: Vec<ElectionRecord>,
    /// Master/slave: last round in which any tuple changed.
    pub ms_last_change_round: Option<u64>,
    pub ms_rounds: u64,
}

impl RunMetrics {
    pub fn new() -> Self {
        let mut m = RunMetrics::default();
        for k in MessageKind::ALL {
            m.messages_by_kind.insert(k.as_str().to_string(), 0);
        }
        m
    }

    pub fn count(&self, kind: MessageKind) -> u64 {
        self.messages_by_kind.get(kind.as_str()).copied().unwrap_or(0)
    }

    pub fn total_messages(&self) -> u64 {
        self.messages_by_kind.values().sum()
    }

    /// Election, Ack and Leader messages.
    pub fn election_traffic(&self) -> u64 {
        MessageKind::ALL.iter().filter(|k| k.is_election_traffic()).map(|k| self.count(*k)).sum()
    }

    /// Completed global elections; cluster-level rounds are left out.
    pub fn completed(&self) -> impl Iterator<Item = &ElectionRecord> {
        self.elections.iter().filter(|e| e.end.is_some() && e.level != 1)
    }

    fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
        let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn mean_steps(&self) -> f64 {
        Self::mean_of(self.completed().map(|e| f64::from(e.steps)))
    }

    pub fn mean_ticks(&self) -> f64 {
        Self::mean_of(self.completed().filter_map(|e| e.ticks()).map(|t| t as f64))
    }

    pub fn mean_participants(&self) -> f64 {
        Self::mean_of(self.completed().map(|e| e.participants as f64))
    }

    pub fn mean_anon(&self) -> f64 {
        Self::mean_of(self.completed().map(|e| e.anon))
    }
}
