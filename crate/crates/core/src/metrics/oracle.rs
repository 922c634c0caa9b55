use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::election::{CriterionMode, CriterionValue, Uid, Weights, MICRO};
use crate::engine::NodeId;
use crate::network::TopologySnapshot;

/// Raw per-node inputs; nothing here comes from protocol state.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleInputs {
    pub uids: Vec<u64>,
    /// Battery charge in micro-units.
    pub charges: Vec<u64>,
    /// Mobility metric value per node.
    pub mobility: Vec<f64>,
    pub v_max: u64,
    pub weights: Weights,
    pub mode: CriterionMode,
}

/// The criterion recomputed from inputs.
pub fn oracle_key(inputs: &OracleInputs, node: NodeId) -> CriterionValue {
    let uid = Uid(inputs.uids[node]);
    match inputs.mode {
        CriterionMode::UidOnly => CriterionValue { value: uid.0, uid },
        CriterionMode::Composite => {
            let ratio = (inputs.mobility[node] / inputs.v_max.max(1) as f64).clamp(0.0, 1.0);
            let still = MICRO - (ratio * MICRO as f64).round() as u64;
            let charge = inputs.charges[node].min(MICRO);
            let value =
                (u128::from(inputs.weights.w_b) * u128::from(charge) + u128::from(inputs.weights.w_m) * u128::from(still))
                    / u128::from(MICRO);
            CriterionValue { value: value as u64, uid }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub component: usize,
    pub members: Vec<NodeId>,
    pub expected_leader: u64,
    /// Distinct beliefs among alive members; `None` means "no leader".
    pub observed: BTreeSet<Option<u64>>,
    pub pass: bool,
    /// Topology and membership held still through the final election.
    pub stable: bool,
}

/// Per connected component, the brute-force argmax against every alive
/// member's believed leader.
pub fn check_safety(
    snap: &TopologySnapshot,
    inputs: &OracleInputs,
    believed: &[Option<u64>],
    stable: impl Fn(&[NodeId]) -> bool,
) -> Vec<OracleVerdict> {
    snap.components
        .iter()
        .enumerate()
        .map(|(component, members)| {
            let expected = members
                .iter()
                .map(|&m| oracle_key(inputs, m))
                .max()
                .expect("components are non-empty")
                .uid
                .0;
            let observed: BTreeSet<Option<u64>> = members.iter().map(|&m| believed[m]).collect();
            let pass = observed.len() == 1 && observed.contains(&Some(expected));
            OracleVerdict { component, members: members.clone(), expected_leader: expected, observed, pass, stable: stable(members) }
        })
        .collect()
}
