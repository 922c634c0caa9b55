//! Round-based master/slave election over piconets.
//!
//! Masters exchange tuples with the slaves that obey them in the current
//! slot, adopt the largest tuple seen and rebroadcast it when it changed.
//! Nodes in several piconets (PMP nodes) carry tuples between masters.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::election::{CriterionValue, Uid};
use crate::engine::NodeId;
use crate::network::TopologySnapshot;

/// Current belief about the leader. Ordered by `(epoch, master_value)`; the
/// epoch is bumped when the named leader is lost so that a stale tuple can
/// be displaced by a smaller value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MasterSlaveTuple {
    pub epoch: u32,
    pub leader_id: Uid,
    pub master_value: CriterionValue,
}

impl MasterSlaveTuple {
    pub const NULL: MasterSlaveTuple = MasterSlaveTuple {
        epoch: 0,
        leader_id: Uid(0),
        master_value: CriterionValue { value: 0, uid: Uid(0) },
    };

    pub fn own(epoch: u32, criterion: CriterionValue) -> Self {
        MasterSlaveTuple { epoch, leader_id: criterion.uid, master_value: criterion }
    }

    pub fn is_null(&self) -> bool {
        *self == Self::NULL
    }
}

impl Ord for MasterSlaveTuple {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.epoch, self.master_value).cmp(&(other.epoch, other.master_value))
    }
}

impl PartialOrd for MasterSlaveTuple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MasterSlaveTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_null() {
            write!(f, "e{}:-", self.epoch)
        } else {
            write!(f, "e{}:{}={}", self.epoch, self.leader_id.0, self.master_value.value)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piconet {
    pub master: NodeId,
    pub slaves: BTreeSet<NodeId>,
}

/// Which piconet a PMP node obeys in each round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmpSchedule {
    pub node: NodeId,
    /// Masters of the piconets this node belongs to, ascending.
    pub piconets: Vec<NodeId>,
}

impl PmpSchedule {
    pub fn obeyed(&self, round: u64) -> Option<NodeId> {
        if self.piconets.is_empty() {
            None
        } else {
            Some(self.piconets[(round % self.piconets.len() as u64) as usize])
        }
    }

    pub fn is_pmp(&self) -> bool {
        self.piconets.len() > 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PiconetLayout {
    pub piconets: Vec<Piconet>,
    pub is_master: Vec<bool>,
    pub schedules: Vec<PmpSchedule>,
}

impl PiconetLayout {
    pub fn from_piconets(n: usize, mut piconets: Vec<Piconet>) -> Self {
        piconets.retain(|p| !p.slaves.is_empty());
        piconets.sort_by_key(|p| p.master);
        let mut is_master = vec![false; n];
        let mut schedules: Vec<PmpSchedule> =
            (0..n).map(|node| PmpSchedule { node, piconets: Vec::new() }).collect();
        for p in &piconets {
            is_master[p.master] = true;
            for &s in &p.slaves {
                schedules[s].piconets.push(p.master);
            }
        }
        PiconetLayout { piconets, is_master, schedules }
    }

    pub fn piconet_of(&self, master: NodeId) -> Option<&Piconet> {
        self.piconets.iter().find(|p| p.master == master)
    }

    /// Slaves obeying `master` in `round`.
    pub fn obeying(&self, master: NodeId, round: u64) -> Vec<NodeId> {
        match self.piconet_of(master) {
            Some(p) => p
                .slaves
                .iter()
                .copied()
                .filter(|&s| self.schedules[s].obeyed(round) == Some(master))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn pmp_nodes(&self) -> Vec<NodeId> {
        self.schedules.iter().filter(|s| s.is_pmp()).map(|s| s.node).collect()
    }

    /// Drops a node from every piconet; piconets left without slaves vanish.
    pub fn remove_node(&mut self, node: NodeId) {
        let n = self.is_master.len();
        let piconets = self
            .piconets
            .iter()
            .filter(|p| p.master != node)
            .map(|p| {
                let mut p = p.clone();
                p.slaves.remove(&node);
                p
            })
            .collect();
        *self = PiconetLayout::from_piconets(n, piconets);
    }

    pub fn add_piconet(&mut self, piconet: Piconet) {
        let n = self.is_master.len();
        let mut piconets: Vec<Piconet> =
            self.piconets.iter().filter(|p| p.master != piconet.master).cloned().collect();
        piconets.push(piconet);
        *self = PiconetLayout::from_piconets(n, piconets);
    }
}

/// Builds piconets over the alive nodes. With `masters` given those nodes
/// are used as masters; otherwise masters are picked greedily by descending
/// key so no two masters are adjacent. Every other node joins each adjacent
/// master. A link between two non-masters sharing no piconet makes its
/// higher endpoint a master too, so every link is covered.
pub fn form_piconets(snap: &TopologySnapshot, keys: &[CriterionValue], masters: Option<&[NodeId]>) -> PiconetLayout {
    let n = snap.alive.len();
    let mut is_master = vec![false; n];
    match masters {
        Some(list) => {
            for &m in list {
                if m < n && snap.alive[m] {
                    is_master[m] = true;
                }
            }
        }
        None => {
            let mut order: Vec<NodeId> = (0..n).filter(|&i| snap.alive[i]).collect();
            order.sort_by(|a, b| keys[*b].cmp(&keys[*a]));
            let mut blocked = vec![false; n];
            for v in order {
                if blocked[v] {
                    continue;
                }
                is_master[v] = true;
                for u in snap.neighbors(v) {
                    blocked[u] = true;
                }
            }
            for &(a, b) in &snap.links {
                if is_master[a] || is_master[b] {
                    continue;
                }
                let share = snap.neighbors(a).into_iter().any(|m| is_master[m] && snap.links.contains(&(m.min(b), m.max(b))));
                if !share {
                    let hi = if keys[a] > keys[b] { a } else { b };
                    is_master[hi] = true;
                }
            }
            // Promotions can strip an earlier master of every slave; it then
            // joins its neighbors' piconets instead.
            for v in 0..n {
                let nb = snap.neighbors(v);
                if is_master[v] && !nb.is_empty() && nb.iter().all(|&u| is_master[u]) {
                    is_master[v] = false;
                }
            }
        }
    }
    let piconets = (0..n)
        .filter(|&m| is_master[m])
        .map(|m| Piconet {
            master: m,
            // A neighboring master with a lower key also serves as a slave
            // here, so master-master links still carry tuples.
            slaves: snap.neighbors(m).into_iter().filter(|&s| !is_master[s] || keys[s] < keys[m]).collect(),
        })
        .collect();
    PiconetLayout::from_piconets(n, piconets)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum InviteState {
    #[default]
    Idle,
    Collecting {
        replies: Vec<(NodeId, CriterionValue)>,
    },
    Waiting,
}

/// Per-node master/slave protocol state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MsState {
    pub tuple: MasterSlaveTuple,
    pub aspirant: bool,
    /// Tuple held when the current round opened.
    pub round_start: MasterSlaveTuple,
    /// Master that exchanged with us this round.
    pub exchanged_with: Option<NodeId>,
    /// Last round with any master traffic.
    pub last_contact: Option<u64>,
    pub invite: InviteState,
}

impl MsState {
    pub fn new(criterion: CriterionValue, aspirant: bool) -> Self {
        let tuple = if aspirant { MasterSlaveTuple::own(0, criterion) } else { MasterSlaveTuple::NULL };
        MsState {
            tuple,
            aspirant,
            round_start: tuple,
            exchanged_with: None,
            last_contact: None,
            invite: InviteState::Idle,
        }
    }

    /// Adopts `t` when it is strictly greater. Entering a newer epoch puts
    /// our own key back in the running.
    pub fn offer(&mut self, t: MasterSlaveTuple, own: CriterionValue) -> bool {
        if t <= self.tuple {
            return false;
        }
        let mut next = t;
        if self.aspirant && t.epoch > self.tuple.epoch {
            next = next.max(MasterSlaveTuple::own(t.epoch, own));
        }
        self.tuple = next;
        true
    }

    /// Leader named by our tuple is gone: open a newer epoch.
    pub fn bump_epoch(&mut self, own: CriterionValue) {
        let epoch = self.tuple.epoch + 1;
        self.tuple = if self.aspirant {
            MasterSlaveTuple::own(epoch, own)
        } else {
            MasterSlaveTuple { epoch, ..MasterSlaveTuple::NULL }
        };
    }

    pub fn leader(&self) -> Option<CriterionValue> {
        (!self.tuple.is_null() && self.tuple.master_value.uid == self.tuple.leader_id).then_some(self.tuple.master_value)
    }

    /// True once two full rounds went by without master traffic.
    pub fn orphaned(&self, round: u64) -> bool {
        match self.last_contact {
            Some(r) => round >= r + 2,
            None => round >= 2,
        }
    }
}

/// Max criterion among invitation replies, uid breaking ties.
pub fn choose_master(replies: &[(NodeId, CriterionValue)]) -> Option<NodeId> {
    replies.iter().max_by_key(|(_, c)| *c).map(|(n, _)| *n)
}
