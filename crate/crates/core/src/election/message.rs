use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CandidateList, CriterionValue};
use crate::algorithms::{ClusterId, ComputationId, MasterSlaveTuple};
use crate::engine::NodeId;

/// Wire vocabulary. Metrics count every sent message under its kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    Heartbeat,
    Election,
    Ack,
    Leader,
    Hello,
    Inquiry,
    InquiryReply,
    Invitation,
    Candidacy,
    TupleExchange,
    TupleBroadcast,
}

impl MessageKind {
    pub const ALL: [MessageKind; 11] = [
        MessageKind::Heartbeat,
        MessageKind::Election,
        MessageKind::Ack,
        MessageKind::Leader,
        MessageKind::Hello,
        MessageKind::Inquiry,
        MessageKind::InquiryReply,
        MessageKind::Invitation,
        MessageKind::Candidacy,
        MessageKind::TupleExchange,
        MessageKind::TupleBroadcast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::Heartbeat => "Heartbeat",
            MessageKind::Election => "Election",
            MessageKind::Ack => "Ack",
            MessageKind::Leader => "Leader",
            MessageKind::Hello => "Hello",
            MessageKind::Inquiry => "Inquiry",
            MessageKind::InquiryReply => "InquiryReply",
            MessageKind::Invitation => "Invitation",
            MessageKind::Candidacy => "Candidacy",
            MessageKind::TupleExchange => "TupleExchange",
            MessageKind::TupleBroadcast => "TupleBroadcast",
        }
    }

    /// Messages that belong to an election rather than to steady-state upkeep.
    pub fn is_election_traffic(self) -> bool {
        matches!(self, MessageKind::Election | MessageKind::Ack | MessageKind::Leader)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dest {
    Node(NodeId),
    /// Every current radio neighbor, one message each.
    Neighbors,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageBody {
    Heartbeat { leader: CriterionValue, beat: u64, hops: u32, candidates: Option<CandidateList> },
    Election { comp: ComputationId, depth: u32 },
    Ack {
        comp: ComputationId,
        /// Sender adopted the receiver as its tree parent.
        joined: bool,
        best: CriterionValue,
        candidates: Option<CandidateList>,
        depth: u32,
    },
    /// `comp = None` nominates the receiver directly from a candidate list.
    Leader { comp: Option<ComputationId>, leader: CriterionValue, candidates: Option<CandidateList>, depth: u32 },
    Hello { cluster: ClusterId },
    Inquiry,
    InquiryReply { leader: Option<CriterionValue>, hops: u32 },
    /// `choose = None` asks for candidates; `Some(n)` picks `n` as master.
    Invitation { choose: Option<NodeId> },
    Candidacy { criterion: CriterionValue },
    TupleExchange { tuple: MasterSlaveTuple, phase: ExchangePhase },
    TupleBroadcast { tuple: MasterSlaveTuple },
}

/// Direction of a tuple exchange within a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExchangePhase {
    MasterToSlave,
    SlaveToMaster,
    Peer,
}

impl MessageBody {
    pub fn kind(&self) -> MessageKind {
        match self {
            MessageBody::Heartbeat { .. } => MessageKind::Heartbeat,
            MessageBody::Election { .. } => MessageKind::Election,
            MessageBody::Ack { .. } => MessageKind::Ack,
            MessageBody::Leader { .. } => MessageKind::Leader,
            MessageBody::Hello { .. } => MessageKind::Hello,
            MessageBody::Inquiry => MessageKind::Inquiry,
            MessageBody::InquiryReply { .. } => MessageKind::InquiryReply,
            MessageBody::Invitation { .. } => MessageKind::Invitation,
            MessageBody::Candidacy { .. } => MessageKind::Candidacy,
            MessageBody::TupleExchange { .. } => MessageKind::TupleExchange,
            MessageBody::TupleBroadcast { .. } => MessageKind::TupleBroadcast,
        }
    }
}

impl fmt::Display for MessageBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageBody::Heartbeat { leader, beat, hops, .. } => {
                write!(f, "Heartbeat leader={} beat={beat} hops={hops}", leader.uid)
            }
            MessageBody::Election { comp, .. } => write!(f, "Election {comp}"),
            MessageBody::Ack { comp, joined, best, .. } => {
                write!(f, "Ack {comp} joined={joined} best={}", best.uid)
            }
            MessageBody::Leader { comp: Some(comp), leader, .. } => {
                write!(f, "Leader {comp} leader={}", leader.uid)
            }
            MessageBody::Leader { comp: None, leader, .. } => write!(f, "Leader nominate={}", leader.uid),
            MessageBody::Hello { cluster } => write!(f, "Hello cluster=({},{})", cluster.0, cluster.1),
            MessageBody::Inquiry => write!(f, "Inquiry"),
            MessageBody::InquiryReply { leader, .. } => match leader {
                Some(l) => write!(f, "InquiryReply leader={}", l.uid),
                None => write!(f, "InquiryReply leader=none"),
            },
            MessageBody::Invitation { choose: None } => write!(f, "Invitation"),
            MessageBody::Invitation { choose: Some(n) } => write!(f, "Invitation choose={n}"),
            MessageBody::Candidacy { criterion } => write!(f, "Candidacy uid={}", criterion.uid),
            MessageBody::TupleExchange { tuple, phase } => write!(f, "TupleExchange {phase:?} {tuple}"),
            MessageBody::TupleBroadcast { tuple } => write!(f, "TupleBroadcast {tuple}"),
        }
    }
}

/// A message bound for one receiver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolMessage {
    pub src: NodeId,
    pub dst: NodeId,
    pub body: MessageBody,
}

impl ProtocolMessage {
    pub fn kind(&self) -> MessageKind {
        self.body.kind()
    }
}
