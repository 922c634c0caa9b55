use serde::{Deserialize, Serialize};

use crate::engine::SimTime;

/// Charge is tracked in micro-units: `CHARGE_SCALE` is a full battery.
pub const CHARGE_SCALE: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub initial_min: u64,
    pub initial_max: u64,
    pub drain_tx: u64,
    pub drain_rx: u64,
    pub drain_idle: u64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            initial_min: CHARGE_SCALE,
            initial_max: CHARGE_SCALE,
            drain_tx: 0,
            drain_rx: 0,
            drain_idle: 0,
        }
    }
}

/// Non-increasing charge with per-message and per-tick drain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryState {
    charge: u64,
    drain_tx: u64,
    drain_rx: u64,
    drain_idle: u64,
    updated: SimTime,
}

impl BatteryState {
    pub fn new(charge: u64, cfg: &BatteryConfig) -> Self {
        BatteryState {
            charge: charge.min(CHARGE_SCALE),
            drain_tx: cfg.drain_tx,
            drain_rx: cfg.drain_rx,
            drain_idle: cfg.drain_idle,
            updated: SimTime::ZERO,
        }
    }

    pub fn charge(&self) -> u64 {
        self.charge
    }

    pub fn fraction(&self) -> f64 {
        self.charge as f64 / CHARGE_SCALE as f64
    }

    pub fn is_depleted(&self) -> bool {
        self.charge == 0
    }

    /// Applies idle drain up to `now`.
    pub fn advance(&mut self, now: SimTime) {
        if now > self.updated {
            let spent = self.drain_idle.saturating_mul(now - self.updated);
            self.charge = self.charge.saturating_sub(spent);
            self.updated = now;
        }
    }

    /// Detaches the idle clock, e.g. while the node is crashed.
    pub fn resume_at(&mut self, now: SimTime) {
        self.updated = self.updated.max(now);
    }

    pub fn spend_tx(&mut self) {
        self.charge = self.charge.saturating_sub(self.drain_tx);
    }

    pub fn spend_rx(&mut self) {
        self.charge = self.charge.saturating_sub(self.drain_rx);
    }

    /// Tick at which idle drain alone empties the battery.
    pub fn idle_depletion(&self) -> Option<SimTime> {
        if self.drain_idle == 0 {
            return None;
        }
        Some(self.updated + self.charge.div_ceil(self.drain_idle))
    }
}
