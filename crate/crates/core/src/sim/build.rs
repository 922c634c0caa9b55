use std::collections::{BTreeMap, VecDeque};

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Event, Node, SimError, Simulator, Timer};
use crate::algorithms::{
    cluster_form, form_piconets, BackoffConfig, ClusterState, DiffusionConfig, DiffusionState, MasterSlaveTuple, MsState,
    PiconetLayout, PriorityMode,
};
use crate::election::{BatteryState, CandidateList, CriterionValue, LeaderMonitor, Uid};
use crate::engine::{EventQueue, FaultAction, FaultEntry, LinkModel, NodeId, RngStreams, SimTime};
use crate::metrics::RunMetrics;
use crate::network::{Arena, Mobility, Position, Topology};
use crate::scenario::{Algorithm, Bootstrap, FaultKind, Scenario, TopologyKind};

const PLACEMENT_ATTEMPTS: usize = 1000;

pub(super) fn build_topology(sc: &Scenario, rng: &mut ChaCha8Rng) -> Result<Topology, SimError> {
    let t = &sc.topology;
    let n = sc.nodes;
    let r = t.radio_range;
    match t.kind {
        TopologyKind::Random => {
            let arena = Arena { width: t.width, height: t.height };
            for _ in 0..PLACEMENT_ATTEMPTS {
                let pos = (0..n)
                    .map(|_| Position::new(rng.random_range(0..=t.width), rng.random_range(0..=t.height)))
                    .collect();
                let topo = Topology::geometric(arena, r, pos)?;
                if !t.require_connected || topo.is_connected() {
                    return Ok(topo);
                }
            }
            Err(SimError::NotConnected(PLACEMENT_ATTEMPTS))
        }
        TopologyKind::Ring => {
            // Neighbor chords are 0.9·R; the next chord out exceeds R from n = 4.
            let radius = if n < 2 { 0.0 } else { 0.9 * r as f64 / (2.0 * (std::f64::consts::PI / n as f64).sin()) };
            let c = radius.ceil() as i64 + 1;
            let pos = (0..n)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    Position::new(c + (radius * a.cos()).round() as i64, c + (radius * a.sin()).round() as i64)
                })
                .collect();
            Ok(Topology::geometric(Arena { width: 2 * c, height: 2 * c }, r, pos)?)
        }
        TopologyKind::Line => {
            let step = (r * 9 / 10).max(1);
            let pos = (0..n).map(|i| Position::new(i as i64 * step, 0)).collect();
            Ok(Topology::geometric(Arena { width: step * n as i64, height: 1 }, r, pos)?)
        }
        TopologyKind::Explicit => {
            let pos: Vec<Position> = if t.positions.is_empty() {
                (0..n).map(|i| Position::new(i as i64, 0)).collect()
            } else {
                t.positions.iter().map(|p| Position::new(p[0], p[1])).collect()
            };
            let width = pos.iter().map(|p| p.x).max().unwrap_or(0).max(t.width);
            let height = pos.iter().map(|p| p.y).max().unwrap_or(0).max(t.height);
            let edges = t.edges.iter().map(|e| (e[0], e[1])).collect();
            Ok(Topology::explicit(Arena { width, height }, pos, edges)?)
        }
    }
}

fn argmax_per_component(topo: &Topology, keys: &[CriterionValue]) -> Vec<Option<NodeId>> {
    let mut best = vec![None; topo.len()];
    for comp in topo.components() {
        let top = comp.iter().copied().max_by_key(|&m| keys[m]);
        for &m in &comp {
            best[m] = top;
        }
    }
    best
}

fn hops_from(topo: &Topology, src: NodeId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; topo.len()];
    let mut q = VecDeque::from([src]);
    dist[src] = 0;
    while let Some(v) = q.pop_front() {
        for &u in topo.neighbors(v) {
            if dist[u] == u32::MAX {
                dist[u] = dist[v] + 1;
                q.push_back(u);
            }
        }
    }
    dist
}

/// Crash/recover plan drawn from the fault stream alone, so paired arms share it.
fn fault_plan(sc: &Scenario, keys: &[CriterionValue], rng: &mut ChaCha8Rng) -> Vec<FaultEntry> {
    let f = &sc.faults;
    let n = sc.nodes;
    let leader = (0..n).max_by_key(|&i| keys[i]);
    match f.kind {
        FaultKind::None => Vec::new(),
        FaultKind::Explicit => f.schedule.clone(),
        FaultKind::LeaderCrash => leader
            .map(|l| vec![FaultEntry { node: l, action: FaultAction::Crash, time: SimTime(f.at) }])
            .unwrap_or_default(),
        FaultKind::Random => {
            let Some(leader) = leader else { return Vec::new() };
            let k = ((f.rate * n as f64).round() as usize).clamp(usize::from(f.rate > 0.0), n);
            let others: Vec<NodeId> = (0..n).filter(|&i| i != leader).collect();
            let mut plan = Vec::new();
            for e in 0..f.epochs {
                let t0 = e * f.epoch_length + f.offset;
                let with_leader = rng.random_bool(f.leader_probability);
                let picks = if with_leader { k.saturating_sub(1) } else { k }.min(others.len());
                let mut down: Vec<NodeId> = sample(rng, others.len(), picks).into_iter().map(|j| others[j]).collect();
                if with_leader && k > 0 {
                    down.push(leader);
                }
                down.sort_unstable();
                plan.extend(down.iter().map(|&node| FaultEntry { node, action: FaultAction::Crash, time: SimTime(t0) }));
                plan.extend(down.iter().map(|&node| FaultEntry {
                    node,
                    action: FaultAction::Recover,
                    time: SimTime(t0 + f.recover_after),
                }));
            }
            plan
        }
    }
}

impl Simulator {
    pub fn new(sc: &Scenario) -> Result<Self, SimError> {
        sc.validate()?;
        let mut rng = RngStreams::new(sc.seed);
        let topo = build_topology(sc, &mut rng.placement)?;
        let n = sc.nodes;
        let period = sc.heartbeat.period;
        let phases: Vec<u64> = (0..n).map(|_| if period > 0 { rng.placement.random_range(0..period) } else { 0 }).collect();
        let mobility = Mobility::new(sc.mobility.clone(), &topo, &mut rng.mobility);
        let clusters = cluster_form(&topo.snapshot(), sc.topology.cell_size());
        let aspirants: Vec<bool> = if sc.masterslave.aspirants.is_empty() {
            vec![true; n]
        } else {
            (0..n).map(|i| sc.masterslave.aspirants.contains(&i)).collect()
        };
        let nodes = (0..n)
            .map(|i| {
                let charge = rng.battery.random_range(sc.battery.initial_min..=sc.battery.initial_max);
                let uid = Uid(sc.uid_of(i));
                Node {
                    id: i,
                    uid,
                    alive: true,
                    incarnation: 0,
                    battery: BatteryState::new(charge, &sc.battery),
                    monitor: LeaderMonitor::default(),
                    candidates: CandidateList::new(),
                    beat: 0,
                    relayed: None,
                    inquiry: None,
                    diff: DiffusionState::new(),
                    cluster: ClusterState::new(clusters[i]),
                    ms: MsState::new(CriterionValue::uid_only(uid), aspirants[i]),
                    aspirant: aspirants[i],
                    phase: phases[i],
                }
            })
            .collect();
        let e = &sc.enhancements;
        let dcfg = DiffusionConfig {
            priority: if e.starter_quality { PriorityMode::StarterQuality } else { PriorityMode::Uid },
            carry_candidates: sc.algorithm == Algorithm::Candidates,
            clustering: sc.algorithm == Algorithm::Hierarchy && e.clustering,
            backoff: e.csma_backoff.then(|| BackoffConfig { t_slot: sc.backoff.t_slot, uid_max: sc.uid_max() }),
            ack_check: sc.ack_check(),
            watchdog: sc.election.timeout,
        };
        let mut sim = Simulator {
            sc: sc.clone(),
            queue: EventQueue::new(),
            rng,
            topo,
            mobility,
            link: LinkModel::new(sc.link_config()),
            nodes,
            metrics: RunMetrics::new(),
            tracing: false,
            records: Vec::new(),
            seq: 0,
            clusters,
            dcfg,
            comps: BTreeMap::new(),
            layout: PiconetLayout::default(),
            ms_log: Vec::new(),
            faults: Vec::new(),
            last_change: vec![0; n],
            dying: vec![false; n],
        };
        sim.init();
        Ok(sim)
    }

    fn init(&mut self) {
        let n = self.nodes.len();
        let keys: Vec<CriterionValue> = (0..n).map(|i| self.key(i)).collect();
        for (i, k) in keys.iter().enumerate() {
            self.nodes[i].ms = MsState::new(*k, self.nodes[i].aspirant);
        }
        match self.sc.election.bootstrap {
            Bootstrap::Preinstalled => {
                let best = argmax_per_component(&self.topo, &keys);
                let mut dist_cache: BTreeMap<NodeId, Vec<u32>> = BTreeMap::new();
                for i in 0..n {
                    let Some(l) = best[i] else { continue };
                    let d = dist_cache.entry(l).or_insert_with(|| hops_from(&self.topo, l))[i];
                    self.nodes[i].monitor.install(keys[l], SimTime::ZERO, d);
                    self.nodes[i].ms.tuple = MasterSlaveTuple::own(0, keys[l]);
                    self.nodes[i].ms.round_start = self.nodes[i].ms.tuple;
                }
            }
            Bootstrap::All if self.sc.algorithm.uses_diffusion() => {
                for i in 0..n {
                    self.arm(i, 1, Timer::Trigger);
                }
            }
            Bootstrap::Single if self.sc.algorithm.uses_diffusion() => {
                let s = self.sc.election.starter;
                self.arm(s, 1, Timer::Trigger);
            }
            _ => {}
        }
        self.faults = fault_plan(&self.sc, &keys, &mut self.rng.faults);
        for f in self.faults.clone() {
            self.schedule(f.time, Event::Fault(f));
        }
        if self.sc.faults.kind == FaultKind::LeaderCrash && self.sc.faults.observers > 0 {
            if let Some(l) = (0..n).max_by_key(|&i| keys[i]) {
                let nb: Vec<NodeId> = self.topo.neighbors(l).to_vec();
                let k = self.sc.faults.observers.min(nb.len());
                let mut picks: Vec<NodeId> = sample(&mut self.rng.faults, nb.len(), k).into_iter().map(|j| nb[j]).collect();
                picks.sort_unstable();
                for p in picks {
                    self.arm(p, self.sc.faults.at + 1, Timer::ObserveLoss);
                }
            }
        }
        for i in 0..n {
            self.arm_heartbeat(i);
        }
        if !self.sc.mobility.is_static() {
            let p = self.sc.mobility.period;
            self.schedule(SimTime(p), Event::Mobility);
        }
        if self.sc.algorithm == Algorithm::Masterslave {
            self.ms_init(&keys);
        }
    }

    pub(super) fn form_layout(&self) -> PiconetLayout {
        let keys: Vec<CriterionValue> = (0..self.nodes.len()).map(|i| self.key(i)).collect();
        let masters = &self.sc.masterslave.masters;
        let fixed: Vec<NodeId> = masters.iter().copied().filter(|&m| self.nodes[m].alive).collect();
        form_piconets(&self.topo.snapshot(), &keys, (!masters.is_empty()).then_some(fixed.as_slice()))
    }
}
