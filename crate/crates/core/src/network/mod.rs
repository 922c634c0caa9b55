//! Node placement, unit-disk connectivity, connected components and
//! random-waypoint mobility.

mod dsu;
mod mobility;
mod topology;

pub use dsu::DisjointSets;
pub use mobility::{Mobility, MobilityKind, MobilityMetric, MobilityModel};
pub use topology::{components, Topology, TopologySnapshot};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub x: i64,
    pub y: i64,
}

impl Position {
    pub fn new(x: i64, y: i64) -> Self {
        Position { x, y }
    }

    pub fn dist2(self, other: Position) -> i64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Position) -> f64 {
        (self.dist2(other) as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arena {
    pub width: i64,
    pub height: i64,
}

impl Arena {
    pub fn contains(&self, p: Position) -> bool {
        (0..=self.width).contains(&p.x) && (0..=self.height).contains(&p.y)
    }

    pub fn clamp(&self, p: Position) -> Position {
        Position::new(p.x.clamp(0, self.width), p.y.clamp(0, self.height))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkDelta {
    Up(NodeId, NodeId),
    Down(NodeId, NodeId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("node {0} is dead")]
    DeadNode(NodeId),
    #[error("position ({x}, {y}) lies outside the arena")]
    OutOfArena { x: i64, y: i64 },
    #[error("explicit edge ({0}, {1}) references an unknown node")]
    BadEdge(NodeId, NodeId),
}
