use crate::algorithms::{ClusterState, DiffusionState, MsState};
use crate::election::{BatteryState, CandidateList, CriterionValue, InquiryReplyInfo, LeaderMonitor, Uid};
use crate::engine::NodeId;

#[derive(Clone, Debug)]
pub struct Node {
    pub id: NodeId,
    pub uid: Uid,
    pub alive: bool,
    /// Bumped at every crash so timers armed before it are ignored.
    pub incarnation: u32,
    pub battery: BatteryState,
    pub monitor: LeaderMonitor,
    /// Stored candidate list (candidate-list variant).
    pub candidates: CandidateList,
    /// Our own beat counter while leading.
    pub beat: u64,
    /// Latest beat relayed, per leader.
    pub relayed: Option<(Uid, u64)>,
    /// Replies gathered while an inquiry window is open.
    pub inquiry: Option<Vec<InquiryReplyInfo>>,
    pub diff: DiffusionState,
    pub cluster: ClusterState,
    pub ms: MsState,
    pub aspirant: bool,
    /// Offset of the periodic heartbeat timer.
    pub phase: u64,
}

impl Node {
    pub fn leader(&self) -> Option<CriterionValue> {
        self.monitor.leader
    }

    pub fn is_leader(&self) -> bool {
        self.monitor.leader.is_some_and(|l| l.uid == self.uid)
    }

    /// Busy with an election or a recovery inquiry.
    pub fn electing(&self) -> bool {
        self.diff.in_progress() || self.diff.backing_off() || self.diff.awaiting_global() || self.inquiry.is_some()
    }

    pub fn role(&self) -> &'static str {
        if !self.alive {
            "dead"
        } else if self.is_leader() {
            "leader"
        } else if self.electing() {
            "electing"
        } else if self.monitor.leader.is_some() {
            "follower"
        } else {
            "leaderless"
        }
    }
}
