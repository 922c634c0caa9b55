use serde::{Deserialize, Serialize};

use super::{EngineError, NodeId, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultAction {
    Crash,
    Recover,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultEntry {
    pub node: NodeId,
    pub action: FaultAction,
    pub time: SimTime,
}

/// Time-sorted crash/recover plan. Every node starts alive, so per node the
/// actions must alternate crash, recover, crash, ...
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSchedule {
    entries: Vec<FaultEntry>,
}

impl FaultSchedule {
    pub fn new(entries: Vec<FaultEntry>) -> Result<Self, EngineError> {
        for (i, w) in entries.windows(2).enumerate() {
            if w[1].time < w[0].time {
                return Err(EngineError::UnsortedSchedule { index: i + 1 });
            }
        }
        let mut alive = std::collections::HashMap::<NodeId, bool>::new();
        for e in &entries {
            let up = alive.entry(e.node).or_insert(true);
            match (e.action, *up) {
                (FaultAction::Crash, true) => *up = false,
                (FaultAction::Recover, false) => *up = true,
                (FaultAction::Crash, false) => {
                    return Err(EngineError::InvalidTransition {
                        node: e.node,
                        reason: "crash of a dead node",
                    })
                }
                (FaultAction::Recover, true) => {
                    return Err(EngineError::InvalidTransition {
                        node: e.node,
                        reason: "recover of an alive node",
                    })
                }
            }
        }
        Ok(FaultSchedule { entries })
    }

    /// Sorts (stably) before validating.
    pub fn from_unsorted(mut entries: Vec<FaultEntry>) -> Result<Self, EngineError> {
        entries.sort_by_key(|e| e.time);
        Self::new(entries)
    }

    pub fn entries(&self) -> &[FaultEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
