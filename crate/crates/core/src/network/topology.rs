use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Arena, DisjointSets, LinkDelta, NetworkError, Position};
use crate::engine::NodeId;

/// Frozen view of the network at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologySnapshot {
    pub positions: Vec<Position>,
    pub alive: Vec<bool>,
    pub radio_range: i64,
    /// Undirected links stored as `(min, max)`.
    pub links: BTreeSet<(NodeId, NodeId)>,
    pub components: Vec<Vec<NodeId>>,
}

impl TopologySnapshot {
    pub fn neighbors(&self, node: NodeId) -> Vec<NodeId> {
        self.links
            .iter()
            .filter_map(|&(a, b)| {
                if a == node {
                    Some(b)
                } else if b == node {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.links.iter().filter(|&&(a, b)| a == node || b == node).count()
    }

    pub fn component_of(&self, node: NodeId) -> Option<&[NodeId]> {
        self.components.iter().find(|c| c.contains(&node)).map(Vec::as_slice)
    }
}

/// Connected components among alive nodes. Each component is sorted and the
/// list is ordered by smallest member.
pub fn components(alive: &[bool], links: impl IntoIterator<Item = (NodeId, NodeId)>) -> Vec<Vec<NodeId>> {
    let n = alive.len();
    let mut sets = DisjointSets::new(n);
    for (a, b) in links {
        if alive[a] && alive[b] {
            sets.union(a, b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<NodeId>> = Default::default();
    for v in (0..n).filter(|&v| alive[v]) {
        let root = sets.find(v);
        groups.entry(root).or_default().push(v);
    }
    let mut out: Vec<Vec<NodeId>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Live network state: positions, liveness and the derived adjacency.
///
/// In geometric mode `(u, v)` is a link iff both are alive and
/// `dist² ≤ R²`. In explicit mode a fixed edge list replaces the distance
/// rule; liveness still applies.
#[derive(Clone, Debug)]
pub struct Topology {
    pub arena: Arena,
    pub radio_range: i64,
    positions: Vec<Position>,
    alive: Vec<bool>,
    explicit_edges: Option<Vec<(NodeId, NodeId)>>,
    adj: Vec<Vec<NodeId>>,
}

impl Topology {
    pub fn geometric(arena: Arena, radio_range: i64, positions: Vec<Position>) -> Result<Self, NetworkError> {
        if let Some(p) = positions.iter().find(|p| !arena.contains(**p)) {
            return Err(NetworkError::OutOfArena { x: p.x, y: p.y });
        }
        let n = positions.len();
        let mut t = Topology {
            arena,
            radio_range,
            positions,
            alive: vec![true; n],
            explicit_edges: None,
            adj: vec![Vec::new(); n],
        };
        t.recompute();
        Ok(t)
    }

    pub fn explicit(arena: Arena, positions: Vec<Position>, edges: Vec<(NodeId, NodeId)>) -> Result<Self, NetworkError> {
        let n = positions.len();
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
            return Err(NetworkError::BadEdge(a, b));
        }
        let mut edges: Vec<_> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        edges.dedup();
        let mut t = Topology {
            arena,
            radio_range: 0,
            positions,
            alive: vec![true; n],
            explicit_edges: Some(edges),
            adj: vec![Vec::new(); n],
        };
        t.recompute();
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit_edges.is_some()
    }

    pub fn position(&self, n: NodeId) -> Position {
        self.positions[n]
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn is_alive(&self, n: NodeId) -> bool {
        self.alive[n]
    }

    pub fn alive(&self) -> &[bool] {
        &self.alive
    }

    /// Sorted neighbor list of an alive node (empty for dead nodes).
    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.adj[n]
    }

    pub fn linked(&self, a: NodeId, b: NodeId) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adj[n].len()
    }

    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn components(&self) -> Vec<Vec<NodeId>> {
        components(&self.alive, self.links())
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn snapshot(&self) -> TopologySnapshot {
        TopologySnapshot {
            positions: self.positions.clone(),
            alive: self.alive.clone(),
            radio_range: self.radio_range,
            links: self.links().collect(),
            components: self.components(),
        }
    }

    /// Moves a node (clamped into the arena) without recomputing links.
    pub fn place(&mut self, n: NodeId, p: Position) {
        self.positions[n] = self.arena.clamp(p);
    }

    pub fn set_alive(&mut self, n: NodeId, alive: bool) -> Vec<LinkDelta> {
        self.alive[n] = alive;
        self.recompute()
    }

    /// Rebuilds adjacency and returns the link changes, `Down` before `Up`,
    /// each group in `(min, max)` order.
    pub fn recompute(&mut self) -> Vec<LinkDelta> {
        let before: BTreeSet<(NodeId, NodeId)> = self.links().collect();
        let n = self.positions.len();
        for ns in &mut self.adj {
            ns.clear();
        }
        match &self.explicit_edges {
            Some(edges) => {
                for &(a, b) in edges {
                    if self.alive[a] && self.alive[b] {
                        self.adj[a].push(b);
                        self.adj[b].push(a);
                    }
                }
            }
            None => {
                let r2 = self.radio_range * self.radio_range;
                for a in 0..n {
                    if !self.alive[a] {
                        continue;
                    }
                    for b in (a + 1)..n {
                        if self.alive[b] && self.positions[a].dist2(self.positions[b]) <= r2 {
                            self.adj[a].push(b);
                            self.adj[b].push(a);
                        }
                    }
                }
            }
        }
        for ns in &mut self.adj {
            ns.sort_unstable();
        }
        let after: BTreeSet<(NodeId, NodeId)> = self.links().collect();
        let mut deltas: Vec<LinkDelta> = before
            .difference(&after)
            .map(|&(a, b)| LinkDelta::Down(a, b))
            .collect();
        deltas.extend(after.difference(&before).map(|&(a, b)| LinkDelta::Up(a, b)));
        deltas
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ARENA: Arena = Arena { width: 1000, height: 1000 };

    fn line(ps: &[(i64, i64)], r: i64) -> Topology {
        Topology::geometric(ARENA, r, ps.iter().map(|&(x, y)| Position::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn single_node_is_singleton_component() {
        let t = line(&[(5, 5)], 10);
        assert_eq!(t.components(), vec![vec![0]]);
    }

    #[test]
    fn collinear_chain_at_exact_range_is_connected() {
        // |AB| = |BC| = R, |AC| = 2R: links are inclusive at distance R.
        let t = line(&[(0, 0), (10, 0), (20, 0)], 10);
        assert!(t.linked(0, 1) && t.linked(1, 2) && !t.linked(0, 2));
        assert_eq!(t.components(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn crashed_peer_leaves_singleton() {
        let mut t = line(&[(0, 0), (5, 0)], 10);
        let deltas = t.set_alive(0, false);
        assert_eq!(deltas, vec![LinkDelta::Down(0, 1)]);
        assert_eq!(t.components(), vec![vec![1]]);
    }

    #[test]
    fn explicit_edges_ignore_distance() {
        let ps = vec![Position::new(0, 0), Position::new(900, 900), Position::new(1, 1)];
        let t = Topology::explicit(ARENA, ps, vec![(0, 1)]).unwrap();
        assert!(t.linked(0, 1));
        assert!(!t.linked(0, 2));
        assert_eq!(t.components(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn out_of_arena_rejected() {
        let err = Topology::geometric(ARENA, 5, vec![Position::new(-1, 0)]).unwrap_err();
        assert_eq!(err, NetworkError::OutOfArena { x: -1, y: 0 });
    }
}
