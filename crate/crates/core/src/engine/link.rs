use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NodeId, SimTime};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub delay_min: u64,
    pub delay_max: u64,
    /// Arrivals on a directed link never reorder.
    pub fifo: bool,
    /// Drop probability; `0.0` means the link is reliable.
    pub loss: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig { delay_min: 1, delay_max: 3, fifo: false, loss: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkOutcome {
    Arrive(SimTime),
    Lost,
}

/// Samples per-message arrival times and enforces FIFO clamping.
#[derive(Clone, Debug)]
pub struct LinkModel {
    pub config: LinkConfig,
    last_arrival: HashMap<(NodeId, NodeId), SimTime>,
}

impl LinkModel {
    pub fn new(config: LinkConfig) -> Self {
        LinkModel { config, last_arrival: HashMap::new() }
    }

    pub fn arrival(
        &mut self,
        rng: &mut ChaCha8Rng,
        from: NodeId,
        to: NodeId,
        sent: SimTime,
    ) -> LinkOutcome {
        let delay = rng.random_range(self.config.delay_min..=self.config.delay_max);
        if self.config.loss > 0.0 && rng.random_bool(self.config.loss) {
            return LinkOutcome::Lost;
        }
        let mut at = sent + delay;
        if self.config.fifo {
            let last = self.last_arrival.entry((from, to)).or_insert(SimTime::ZERO);
            at = at.max(*last);
            *last = at;
        }
        LinkOutcome::Arrive(at)
    }
}
