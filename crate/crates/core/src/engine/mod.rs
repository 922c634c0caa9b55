//! Deterministic discrete-event kernel pieces: virtual time, the event queue,
//! seeded random streams, link delivery, fault schedules and run traces.

mod faults;
mod link;
mod queue;
mod rng;
mod trace;

pub use faults::{FaultAction, FaultEntry, FaultSchedule};
pub use link::{LinkConfig, LinkModel, LinkOutcome};
pub use queue::{EventQueue, Scheduled};
pub use rng::{stream, RngStreams, StreamId};
pub use trace::{RunTrace, SnapshotRecord, TraceRecord};

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Virtual time in integer ticks.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn ticks(self) -> u64 {
        self.0
    }

    pub fn saturating_sub(self, other: SimTime) -> u64 {
        self.0.saturating_sub(other.0)
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;
    fn add(self, rhs: u64) -> SimTime {
        SimTime(self.0 + rhs)
    }
}

impl Sub for SimTime {
    type Output = u64;
    fn sub(self, rhs: SimTime) -> u64 {
        self.0 - rhs.0
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={}", self.0)
    }
}

/// Index of a node inside a scenario (0-based). Distinct from its UID.
pub type NodeId = usize;

/// The six classes of event the kernel processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    MessageArrival,
    TimerFire,
    Crash,
    Recover,
    MobilityStep,
    RoundTick,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::MessageArrival => "MessageArrival",
            EventKind::TimerFire => "TimerFire",
            EventKind::Crash => "Crash",
            EventKind::Recover => "Recover",
            EventKind::MobilityStep => "MobilityStep",
            EventKind::RoundTick => "RoundTick",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("event scheduled at {at} but the clock is already at {now}")]
    SchedulingInPast { at: SimTime, now: SimTime },
    #[error("invalid fault transition for node {node}: {reason}")]
    InvalidTransition { node: NodeId, reason: &'static str },
    #[error("fault schedule is not sorted by time at entry {index}")]
    UnsortedSchedule { index: usize },
}
