//! Protocol-agnostic election machinery shared by every algorithm.

mod battery;
mod candidates;
mod criterion;
mod heartbeat;
mod inquiry;
mod message;

pub use battery::{BatteryConfig, BatteryState, CHARGE_SCALE};
pub use candidates::{merge_candidate_lists, CandidateList, CANDIDATE_CAPACITY};
pub use criterion::{criterion, CriterionMode, CriterionValue, Uid, Weights, MICRO};
pub use heartbeat::{HeartbeatConfig, LeaderMonitor};
pub use inquiry::{resolve_inquiry, InquiryReplyInfo, InquiryResolution};
pub use message::{Dest, ExchangePhase, MessageBody, MessageKind, ProtocolMessage};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElectionError {
    #[error("composite criterion weights must sum to 1 (got w_b={w_b}µ, w_m={w_m}µ)")]
    BadWeights { w_b: u64, w_m: u64 },
}
