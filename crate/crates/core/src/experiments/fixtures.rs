use crate::engine::NodeId;
use crate::scenario::{Algorithm, Bootstrap, Scenario, TopologyKind};
use crate::sim::{MsRecord, RunResult};

/// Two piconets sharing `p` PMP nodes.
///
/// Node 0 masters {1, 4..4+p}, node 2 masters {3, 4..4+p}. Node 1 holds the
/// highest uid, so piconet A learns the winner in round 0 and piconet B only
/// in round 1, through the PMPs.
pub fn ali_fixture(p: usize) -> Scenario {
    assert!(p >= 1, "a PMP-free layout has no shared slot");
    let n = 4 + p;
    let mut edges = vec![[0, 1], [2, 3]];
    for x in 4..n {
        edges.push([0, x]);
        edges.push([2, x]);
    }
    let mut uids = vec![3, 50, 4, 5];
    uids.extend((0..p as u64).map(|j| 10 + j));
    let mut sc = Scenario { name: format!("ali-p{p}"), algorithm: Algorithm::Masterslave, nodes: n, horizon: 200, uids, ..Scenario::default() };
    sc.topology.kind = TopologyKind::Explicit;
    sc.topology.edges = edges;
    sc.heartbeat.period = 0;
    // Own tuples only; a preinstalled leader would leave nothing to propagate.
    sc.election.bootstrap = Bootstrap::None;
    sc.masterslave.masters = vec![0, 2];
    sc
}

#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    pub round: u64,
    /// `(from, to, broadcast)` per counted message, sorted.
    pub messages: Vec<(NodeId, NodeId, bool)>,
}

impl Propagation {
    pub fn count(&self) -> u64 {
        self.messages.len() as u64
    }
}

/// Messages of the last round that changed any tuple which carry the final
/// winning tuple as news: every broadcast, and slave replies the master did
/// not already hold when the round opened.
pub fn final_round_propagation(run: &RunResult) -> Option<Propagation> {
    let round = run.summary.metrics.ms_last_change_round?;
    let winner = run.ms_log.iter().map(|r| r.tuple).max()?;
    let mut messages: Vec<(NodeId, NodeId, bool)> = run
        .ms_log
        .iter()
        .filter(|r: &&MsRecord| r.round == round && r.tuple == winner && (r.broadcast || r.fresh))
        .map(|r| (r.from, r.to, r.broadcast))
        .collect();
    messages.sort_unstable();
    Some(Propagation { round, messages })
}
