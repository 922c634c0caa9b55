use serde::{Deserialize, Serialize};

use super::{NodeId, SimTime};

/// One processed event, as written to `trace.jsonl`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: SimTime,
    pub seq: u64,
    pub kind: String,
    pub node: Option<NodeId>,
    pub detail: String,
}

/// Node state at the end of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub t: SimTime,
    pub node: NodeId,
    pub leader: Option<u64>,
    pub role: String,
    pub battery: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub snapshots: Vec<SnapshotRecord>,
    pub end_time: SimTime,
    /// Events were still queued when the horizon stopped the run.
    pub horizon_exceeded: bool,
}

impl RunTrace {
    /// Events first, then snapshots, one JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
            out.push('\n');
        }
        for s in &self.snapshots {
            out.push_str(&serde_json::to_string(s).expect("snapshot serializes"));
            out.push('\n');
        }
        out
    }
}
