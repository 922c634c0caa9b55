use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LinkDelta, NetworkError, Position, Topology};
use crate::engine::{NodeId, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MobilityKind {
    Static,
    RandomWaypoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityModel {
    pub kind: MobilityKind,
    /// Distance per tick.
    pub speed_min: u64,
    pub speed_max: u64,
    /// Ticks spent at a reached waypoint.
    pub pause_min: u64,
    pub pause_max: u64,
    /// Ticks between mobility steps.
    pub period: u64,
    /// Averaging window for the mobility metric, in ticks.
    pub window: u64,
    /// Movement stops after this tick; 0 means never.
    pub until: u64,
}

impl Default for MobilityModel {
    fn default() -> Self {
        MobilityModel {
            kind: MobilityKind::Static,
            speed_min: 1,
            speed_max: 4,
            pause_min: 0,
            pause_max: 20,
            period: 5,
            window: 100,
            until: 0,
        }
    }
}

impl MobilityModel {
    pub fn is_static(&self) -> bool {
        self.kind == MobilityKind::Static
    }

    /// Upper bound of the mobility metric; 1 for static models so the
    /// normalising division in the criterion stays defined.
    pub fn v_max(&self) -> u64 {
        if self.is_static() {
            1
        } else {
            self.speed_max.max(1)
        }
    }
}

/// Mean displacement per tick over the metric window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobilityMetric {
    pub node: NodeId,
    pub window: u64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Leg {
    /// Paused through `until` inclusive.
    Paused { until: SimTime },
    Moving { target: Position, speed: u64 },
}

/// Random-waypoint movement plus displacement bookkeeping for the metric.
#[derive(Clone, Debug)]
pub struct Mobility {
    pub model: MobilityModel,
    legs: Vec<Leg>,
    samples: Vec<VecDeque<(SimTime, f64)>>,
}

impl Mobility {
    pub fn new(model: MobilityModel, topo: &Topology, rng: &mut ChaCha8Rng) -> Self {
        let n = topo.len();
        let mut m = Mobility {
            legs: vec![Leg::Paused { until: SimTime::ZERO }; n],
            samples: vec![VecDeque::new(); n],
            model,
        };
        if !m.model.is_static() {
            for node in 0..n {
                m.legs[node] = m.draw_leg(topo, rng);
            }
        }
        m
    }

    fn draw_leg(&self, topo: &Topology, rng: &mut ChaCha8Rng) -> Leg {
        let target = Position::new(
            rng.random_range(0..=topo.arena.width),
            rng.random_range(0..=topo.arena.height),
        );
        let speed = rng.random_range(self.model.speed_min..=self.model.speed_max);
        Leg::Moving { target, speed }
    }

    /// Overrides a node's current leg.
    pub fn set_leg(&mut self, node: NodeId, target: Position, speed: u64) {
        self.legs[node] = Leg::Moving { target, speed };
    }

    pub fn set_pause(&mut self, node: NodeId, until: SimTime) {
        self.legs[node] = Leg::Paused { until };
    }

    /// Advances every alive node by one step and recomputes links.
    pub fn step(&mut self, now: SimTime, topo: &mut Topology, rng: &mut ChaCha8Rng) -> Vec<LinkDelta> {
        if self.model.is_static() || (self.model.until > 0 && now.ticks() > self.model.until) {
            return Vec::new();
        }
        let period = self.model.period.max(1);
        for node in 0..topo.len() {
            if !topo.is_alive(node) {
                continue;
            }
            if let Leg::Paused { until } = self.legs[node] {
                if now <= until {
                    self.record(node, now, 0.0);
                    continue;
                }
                self.legs[node] = self.draw_leg(topo, rng);
            }
            let Leg::Moving { target, speed } = self.legs[node] else {
                unreachable!()
            };
            let from = topo.position(node);
            let remaining = from.dist(target);
            let travel = (speed * period) as f64;
            let to = if travel >= remaining {
                let pause = rng.random_range(self.model.pause_min..=self.model.pause_max);
                self.legs[node] = Leg::Paused { until: now + pause };
                target
            } else {
                let f = travel / remaining;
                Position::new(
                    from.x + ((target.x - from.x) as f64 * f).round() as i64,
                    from.y + ((target.y - from.y) as f64 * f).round() as i64,
                )
            };
            topo.place(node, to);
            let moved = from.dist(topo.position(node));
            self.record(node, now, moved);
        }
        topo.recompute()
    }

    fn record(&mut self, node: NodeId, now: SimTime, displacement: f64) {
        let window = self.model.window;
        let q = &mut self.samples[node];
        q.push_back((now, displacement));
        while q.front().is_some_and(|&(t, _)| t + window <= now) {
            q.pop_front();
        }
    }

    pub fn metric(&self, node: NodeId, now: SimTime, topo: &Topology) -> Result<MobilityMetric, NetworkError> {
        if !topo.is_alive(node) {
            return Err(NetworkError::DeadNode(node));
        }
        let window = self.model.window.max(1);
        let span = window.min(now.ticks());
        let value = if span == 0 || self.model.is_static() {
            0.0
        } else {
            let total: f64 = self.samples[node]
                .iter()
                .filter(|&&(t, _)| t + window > now)
                .map(|&(_, d)| d)
                .sum();
            (total / span as f64).min(self.model.v_max() as f64)
        };
        Ok(MobilityMetric { node, window, value })
    }
}
