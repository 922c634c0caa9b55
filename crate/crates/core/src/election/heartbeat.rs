use serde::{Deserialize, Serialize};

use super::CriterionValue;
use crate::engine::SimTime;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeartbeatConfig {
    /// Ticks between leader beats; 0 disables heartbeats.
    pub period: u64,
    /// Silence tolerated from a one-hop leader before declaring loss.
    pub timeout: u64,
    /// Extra tolerance per additional hop between follower and leader.
    pub hop_slack: u64,
}

impl Default for HeartbeatConfig {
    fn default() -> Self {
        HeartbeatConfig { period: 10, timeout: 35, hop_slack: 3 }
    }
}

impl HeartbeatConfig {
    pub fn enabled(&self) -> bool {
        self.period > 0
    }

    pub fn timeout_at(&self, hops: u32) -> u64 {
        self.timeout + self.hop_slack * u64::from(hops.saturating_sub(1))
    }
}

/// Follower-side view of the current leader.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LeaderMonitor {
    pub leader: Option<CriterionValue>,
    pub last_heard: SimTime,
    pub hops: u32,
    pub last_beat: u64,
    latched: bool,
}

impl LeaderMonitor {
    pub fn install(&mut self, leader: CriterionValue, now: SimTime, hops: u32) {
        self.leader = Some(leader);
        self.last_heard = now;
        self.hops = hops;
        self.last_beat = 0;
        self.latched = false;
    }

    pub fn clear(&mut self) {
        self.leader = None;
        self.latched = false;
    }

    pub fn heard(&mut self, now: SimTime, hops: u32, beat: u64) {
        self.last_heard = now;
        self.hops = hops;
        self.last_beat = beat;
    }

    /// Earliest tick at which `is_lost` becomes true without further beats.
    pub fn deadline(&self, cfg: &HeartbeatConfig) -> SimTime {
        self.last_heard + cfg.timeout_at(self.hops) + 1
    }

    pub fn is_lost(&self, now: SimTime, cfg: &HeartbeatConfig) -> bool {
        self.leader.is_some() && now.saturating_sub(self.last_heard) > cfg.timeout_at(self.hops)
    }

    /// True exactly once per loss episode; re-armed by `install`.
    pub fn detect_leader_loss(&mut self, now: SimTime, cfg: &HeartbeatConfig) -> bool {
        if self.latched || !self.is_lost(now, cfg) {
            return false;
        }
        self.latched = true;
        true
    }
}
