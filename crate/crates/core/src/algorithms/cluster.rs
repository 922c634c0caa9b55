use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::engine::NodeId;
use crate::network::{Position, TopologySnapshot};

/// Grid cell `(⌊x/R⌋, ⌊y/R⌋)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterId(pub i64, pub i64);

pub fn cluster_of(p: Position, cell: i64) -> ClusterId {
    let cell = cell.max(1);
    ClusterId(p.x.div_euclid(cell), p.y.div_euclid(cell))
}

/// Assigns every node (alive or not) to its grid cell.
pub fn cluster_form(snapshot: &TopologySnapshot, cell: i64) -> Vec<ClusterId> {
    snapshot.positions.iter().map(|&p| cluster_of(p, cell)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinDecision {
    Accept,
    Defer,
    Deny,
}

/// Membership bookkeeping for the hierarchical algorithm.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterState {
    pub cluster_id: ClusterId,
    pub members_known: BTreeSet<NodeId>,
    pub deferred: Vec<NodeId>,
}

impl Default for ClusterId {
    fn default() -> Self {
        ClusterId(0, 0)
    }
}

impl ClusterState {
    pub fn new(cluster_id: ClusterId) -> Self {
        ClusterState { cluster_id, ..Default::default() }
    }
}

/// Decides what to do with a `Hello` from `sender` carrying `hello_cluster`.
/// Deferred senders are queued on the state; accepted ones become members.
pub fn gate_join_during_election(
    state: &mut ClusterState,
    sender: NodeId,
    hello_cluster: ClusterId,
    election_in_progress: bool,
    gating: bool,
) -> JoinDecision {
    if election_in_progress && gating {
        if !state.deferred.contains(&sender) {
            state.deferred.push(sender);
        }
        return JoinDecision::Defer;
    }
    if hello_cluster != state.cluster_id {
        return JoinDecision::Deny;
    }
    state.members_known.insert(sender);
    JoinDecision::Accept
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn boundary_node_belongs_to_upper_cell() {
        assert_eq!(cluster_of(Position::new(200, 0), 100), ClusterId(2, 0));
        assert_eq!(cluster_of(Position::new(199, 0), 100), ClusterId(1, 0));
    }

    #[test]
    fn one_cell_gives_one_cluster() {
        let snap = TopologySnapshot {
            positions: vec![Position::new(1, 1), Position::new(50, 10), Position::new(99, 99)],
            alive: vec![true; 3],
            radio_range: 100,
            links: BTreeSet::new(),
            components: vec![],
        };
        let ids = cluster_form(&snap, 100);
        assert!(ids.iter().all(|&c| c == ClusterId(0, 0)));
    }

    #[test]
    fn hello_during_election_is_deferred() {
        let mut s = ClusterState::new(ClusterId(0, 0));
        assert_eq!(gate_join_during_election(&mut s, 4, ClusterId(0, 0), true, true), JoinDecision::Defer);
        assert!(s.members_known.is_empty());
        assert_eq!(s.deferred, vec![4]);
    }

    #[test]
    fn wrong_cluster_denied() {
        let mut s = ClusterState::new(ClusterId(0, 0));
        assert_eq!(gate_join_during_election(&mut s, 4, ClusterId(1, 0), false, true), JoinDecision::Deny);
        assert!(s.members_known.is_empty());
    }

    #[test]
    fn matching_idle_accepted() {
        let mut s = ClusterState::new(ClusterId(3, 3));
        assert_eq!(gate_join_during_election(&mut s, 2, ClusterId(3, 3), false, true), JoinDecision::Accept);
        assert!(s.members_known.contains(&2));
    }

    #[test]
    fn without_gating_election_does_not_block() {
        let mut s = ClusterState::new(ClusterId(0, 0));
        assert_eq!(gate_join_during_election(&mut s, 1, ClusterId(0, 0), true, false), JoinDecision::Accept);
    }
}
