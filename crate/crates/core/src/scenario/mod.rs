//! Self-describing run configuration.

mod parse;

use serde::{Deserialize, Serialize};

use crate::election::{BatteryConfig, CriterionMode, HeartbeatConfig, Weights};
use crate::engine::{FaultEntry, LinkConfig, NodeId};
use crate::network::MobilityModel;

pub use parse::{apply_override, parse_scenario, parse_scenario_with, ScenarioError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hierarchy,
    Diffusion,
    Candidates,
    Masterslave,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Hierarchy, Algorithm::Diffusion, Algorithm::Candidates, Algorithm::Masterslave];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Hierarchy => "hierarchy",
            Algorithm::Diffusion => "diffusion",
            Algorithm::Candidates => "candidates",
            Algorithm::Masterslave => "masterslave",
        }
    }

    pub fn uses_diffusion(self) -> bool {
        self != Algorithm::Masterslave
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Random,
    Ring,
    Line,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub width: i64,
    pub height: i64,
    pub radio_range: i64,
    /// Cluster grid cell size; 0 means `radio_range`.
    pub cell: i64,
    /// Random placement is redrawn until the graph is connected.
    pub require_connected: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<[i64; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<[NodeId; 2]>,
}

impl Default for TopologySpec {
    fn default() -> Self {
        TopologySpec {
            kind: TopologyKind::Random,
            width: 1000,
            height: 1000,
            radio_range: 250,
            cell: 0,
            require_connected: true,
            positions: Vec::new(),
            edges: Vec::new(),
        }
    }
}

impl TopologySpec {
    pub fn cell_size(&self) -> i64 {
        if self.cell > 0 {
            self.cell
        } else {
            self.radio_range.max(1)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriterionSpec {
    pub mode: CriterionMode,
    pub w_b: u64,
    pub w_m: u64,
}

impl Default for CriterionSpec {
    fn default() -> Self {
        let w = Weights::default();
        CriterionSpec { mode: CriterionMode::UidOnly, w_b: w.w_b, w_m: w.w_m }
    }
}

impl CriterionSpec {
    pub fn weights(&self) -> Weights {
        Weights { w_b: self.w_b, w_m: self.w_m }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Enhancements {
    pub clustering: bool,
    pub join_gating: bool,
    pub inquiry_on_recover: bool,
    pub starter_quality: bool,
    pub candidate_criteria: bool,
    pub csma_backoff: bool,
    pub slave_participation: bool,
    pub invitation: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackoffSpec {
    pub t_slot: u64,
}

impl Default for BackoffSpec {
    fn default() -> Self {
        BackoffSpec { t_slot: 4 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoundSpec {
    /// Ticks between master/slave rounds; 0 means the minimum `3·d_max + 3`.
    pub period: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bootstrap {
    /// Every node starts knowing its component's correct leader.
    Preinstalled,
    /// Every node triggers at t=1.
    All,
    /// Only `election.starter` triggers at t=1.
    Single,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectionSpec {
    pub bootstrap: Bootstrap,
    pub starter: NodeId,
    /// Open computations older than this are abandoned and retriggered.
    pub timeout: u64,
    /// Child liveness check period; 0 means `4·d_max`.
    pub ack_check: u64,
}

impl Default for ElectionSpec {
    fn default() -> Self {
        ElectionSpec { bootstrap: Bootstrap::Preinstalled, starter: 0, timeout: 600, ack_check: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InquirySpec {
    /// Reply collection window after recovery; 0 means `2·d_max + 1`.
    pub window: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    None,
    /// Per-epoch random crashes that may include the current leader.
    Random,
    Explicit,
    /// Crash the leader once at `faults.at`.
    LeaderCrash,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultSpec {
    pub kind: FaultKind,
    /// Fraction of nodes crashed per epoch.
    pub rate: f64,
    /// Chance that an epoch's crash set includes the leader.
    pub leader_probability: f64,
    pub epoch_length: u64,
    pub epochs: u64,
    /// Crash duration; recover happens inside the same epoch.
    pub recover_after: u64,
    /// Offset of the crash instant inside each epoch.
    pub offset: u64,
    pub at: u64,
    /// Leader-crash mode: this many leader neighbors notice the loss at once.
    /// 0 leaves detection to heartbeats.
    pub observers: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<FaultEntry>,
}

impl Default for FaultSpec {
    fn default() -> Self {
        FaultSpec {
            kind: FaultKind::None,
            rate: 0.05,
            leader_probability: 0.25,
            epoch_length: 500,
            epochs: 20,
            recover_after: 200,
            offset: 100,
            at: 100,
            observers: 0,
            schedule: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MasterSlaveSpec {
    /// Fixed master set; empty means greedy formation.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub masters: Vec<NodeId>,
    /// Nodes wishing to lead; empty means every node.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub aspirants: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub algorithm: Algorithm,
    pub nodes: usize,
    pub seed: u64,
    pub horizon: u64,
    /// Node uids; empty means `1..=nodes`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub uids: Vec<u64>,
    pub topology: TopologySpec,
    pub mobility: MobilityModel,
    pub link: LinkConfig,
    pub heartbeat: HeartbeatConfig,
    pub criterion: CriterionSpec,
    pub battery: BatteryConfig,
    pub enhancements: Enhancements,
    pub backoff: BackoffSpec,
    pub round: RoundSpec,
    pub election: ElectionSpec,
    pub inquiry: InquirySpec,
    pub faults: FaultSpec,
    pub masterslave: MasterSlaveSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "unnamed".to_string(),
            algorithm: Algorithm::Diffusion,
            nodes: 10,
            seed: 1,
            horizon: 5000,
            uids: Vec::new(),
            topology: TopologySpec::default(),
            mobility: MobilityModel::default(),
            link: LinkConfig::default(),
            heartbeat: HeartbeatConfig::default(),
            criterion: CriterionSpec::default(),
            battery: BatteryConfig::default(),
            enhancements: Enhancements::default(),
            backoff: BackoffSpec::default(),
            round: RoundSpec::default(),
            election: ElectionSpec::default(),
            inquiry: InquirySpec::default(),
            faults: FaultSpec::default(),
            masterslave: MasterSlaveSpec::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        parse::validate(self)
    }

    pub fn uid_of(&self, node: NodeId) -> u64 {
        self.uids.get(node).copied().unwrap_or(node as u64 + 1)
    }

    pub fn uid_max(&self) -> u64 {
        (0..self.nodes).map(|i| self.uid_of(i)).max().unwrap_or(0)
    }

    pub fn round_period(&self) -> u64 {
        if self.round.period > 0 {
            self.round.period
        } else {
            3 * self.link.delay_max + 3
        }
    }

    pub fn ack_check(&self) -> u64 {
        if self.election.ack_check > 0 {
            self.election.ack_check
        } else {
            4 * self.link.delay_max.max(1)
        }
    }

    pub fn inquiry_window(&self) -> u64 {
        if self.inquiry.window > 0 {
            self.inquiry.window
        } else {
            2 * self.link.delay_max + 1
        }
    }

    /// Quiet period a component needs before its leader is judged.
    pub fn settle_window(&self) -> u64 {
        2 * self.election.timeout
    }

    /// The candidate-criteria enhancement elects by battery and mobility.
    pub fn criterion_mode(&self) -> CriterionMode {
        if self.enhancements.candidate_criteria {
            CriterionMode::Composite
        } else {
            self.criterion.mode
        }
    }

    /// Effective link behavior: the candidate-list variant runs on FIFO links.
    pub fn link_config(&self) -> LinkConfig {
        let mut link = self.link.clone();
        if self.algorithm == Algorithm::Candidates {
            link.fifo = true;
        }
        link
    }

    pub fn defaults_toml() -> String {
        toml::to_string(&Scenario::default()).expect("defaults serialize")
    }
}
