//! The simulation kernel: a scenario and a seed in, one deterministic run out.

mod build;
mod elect;
mod node;
mod rounds;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algorithms::{ClusterId, ComputationId, DiffusionConfig, DiffusionTimer, MasterSlaveTuple, PiconetLayout};
use crate::election::{criterion, CriterionValue, ElectionError, MessageBody, ProtocolMessage};
use crate::engine::{
    EngineError, EventKind, EventQueue, FaultAction, FaultEntry, LinkModel, LinkOutcome, NodeId, RngStreams, RunTrace,
    SimTime, SnapshotRecord, TraceRecord,
};
use crate::metrics::{check_safety, OracleInputs, OracleVerdict, RunMetrics, RunSummary};
use crate::network::{LinkDelta, Mobility, MobilityMetric, NetworkError, Topology};
use crate::scenario::{Algorithm, Scenario};

pub use node::Node;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error("no connected placement found in {0} attempts")]
    NotConnected(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Timer {
    Heartbeat,
    /// Bootstrap election start.
    Trigger,
    Diffusion(DiffusionTimer),
    InquiryDone,
    InviteDone,
    Invite,
    /// Injected leader-loss observation.
    ObserveLoss,
}

impl fmt::Display for Timer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timer::Heartbeat => write!(f, "heartbeat"),
            Timer::Trigger => write!(f, "trigger"),
            Timer::Diffusion(DiffusionTimer::AckCheck(c)) => write!(f, "ack-check {c}"),
            Timer::Diffusion(DiffusionTimer::Watchdog(c)) => write!(f, "watchdog {c}"),
            Timer::Diffusion(DiffusionTimer::Backoff(t)) => write!(f, "backoff #{t}"),
            Timer::InquiryDone => write!(f, "inquiry-done"),
            Timer::InviteDone => write!(f, "invite-done"),
            Timer::Invite => write!(f, "invite"),
            Timer::ObserveLoss => write!(f, "observe-loss"),
        }
    }
}

#[derive(Clone, Debug)]
enum Event {
    Arrival(ProtocolMessage),
    Timer { node: NodeId, incarnation: u32, timer: Timer },
    Fault(FaultEntry),
    /// Battery ran dry.
    Deplete(NodeId),
    Mobility,
    Round { round: u64, phase: u8 },
}

impl Event {
    fn kind(&self) -> EventKind {
        match self {
            Event::Arrival(_) => EventKind::MessageArrival,
            Event::Timer { .. } => EventKind::TimerFire,
            Event::Fault(FaultEntry { action: FaultAction::Crash, .. }) | Event::Deplete(_) => EventKind::Crash,
            Event::Fault(_) => EventKind::Recover,
            Event::Mobility => EventKind::MobilityStep,
            Event::Round { .. } => EventKind::RoundTick,
        }
    }
}

/// A tuple-carrying message of a master/slave round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MsRecord {
    pub round: u64,
    pub from: NodeId,
    pub to: NodeId,
    /// `TupleBroadcast` rather than a slave's reply.
    pub broadcast: bool,
    pub tuple: MasterSlaveTuple,
    /// Receiving master did not hold this tuple when the round opened.
    pub fresh: bool,
}

#[derive(Clone, Debug, Default)]
struct CompTrack {
    record: usize,
    participants: BTreeSet<NodeId>,
    /// `(parent, child)` tree edges.
    edges: Vec<(NodeId, NodeId)>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub summary: RunSummary,
    pub trace: RunTrace,
    /// Planned faults, identical across paired arms.
    pub faults: Vec<FaultEntry>,
    pub ms_log: Vec<MsRecord>,
    /// Spanning-tree edges per computation id.
    pub trees: BTreeMap<String, Vec<(NodeId, NodeId)>>,
    pub leaders: Vec<Option<u64>>,
    pub pmp_degrees: Vec<usize>,
}

pub struct Simulator {
    sc: Scenario,
    queue: EventQueue<Event>,
    rng: RngStreams,
    topo: Topology,
    mobility: Mobility,
    link: LinkModel,
    nodes: Vec<Node>,
    metrics: RunMetrics,
    tracing: bool,
    records: Vec<TraceRecord>,
    seq: u64,
    clusters: Vec<ClusterId>,
    dcfg: DiffusionConfig,
    comps: BTreeMap<ComputationId, CompTrack>,
    layout: PiconetLayout,
    ms_log: Vec<MsRecord>,
    faults: Vec<FaultEntry>,
    /// Last tick a link or fault event touched each node.
    last_change: Vec<u64>,
    dying: Vec<bool>,
}

impl Simulator {
    pub fn set_tracing(&mut self, on: bool) {
        self.tracing = on;
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.sc
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn schedule(&mut self, at: SimTime, ev: Event) {
        self.queue.schedule(at, ev).expect("events are never scheduled in the past");
    }

    fn arm(&mut self, node: NodeId, after: u64, timer: Timer) {
        let incarnation = self.nodes[node].incarnation;
        let at = self.now() + after;
        self.schedule(at, Event::Timer { node, incarnation, timer });
    }

    fn note(&mut self, kind: &str, node: Option<NodeId>, detail: impl FnOnce() -> String) {
        if self.tracing {
            self.records.push(TraceRecord { t: self.now(), seq: self.seq, kind: kind.to_string(), node, detail: detail() });
        }
    }

    /// Election key from current battery and mobility inputs.
    fn key(&self, i: NodeId) -> CriterionValue {
        let now = self.now();
        let mob = self
            .mobility
            .metric(i, now, &self.topo)
            .unwrap_or(MobilityMetric { node: i, window: self.sc.mobility.window, value: 0.0 });
        criterion(
            self.nodes[i].uid,
            self.nodes[i].battery.charge(),
            mob,
            self.sc.mobility.v_max(),
            self.sc.criterion.weights(),
            self.sc.criterion_mode(),
        )
        .expect("weights validated with the scenario")
    }

    fn send(&mut self, from: NodeId, to: NodeId, body: MessageBody) {
        self.metrics.attempts += 1;
        if !self.nodes[from].alive || !self.topo.linked(from, to) {
            self.metrics.undeliverable += 1;
            return;
        }
        *self.metrics.messages_by_kind.entry(body.kind().as_str().to_string()).or_default() += 1;
        self.nodes[from].battery.spend_tx();
        self.check_depleted(from);
        let now = self.now();
        match self.link.arrival(&mut self.rng.delay, from, to, now) {
            LinkOutcome::Lost => self.metrics.lost += 1,
            LinkOutcome::Arrive(at) => {
                self.schedule(at, Event::Arrival(ProtocolMessage { src: from, dst: to, body }))
            }
        }
    }

    fn broadcast(&mut self, from: NodeId, body: MessageBody, except: Option<NodeId>) {
        let targets: Vec<NodeId> = self.topo.neighbors(from).iter().copied().filter(|&n| Some(n) != except).collect();
        for t in targets {
            self.send(from, t, body.clone());
        }
    }

    fn check_depleted(&mut self, i: NodeId) {
        if self.nodes[i].battery.is_depleted() && self.nodes[i].alive && !self.dying[i] {
            self.dying[i] = true;
            let now = self.now();
            self.schedule(now, Event::Deplete(i));
        }
    }

    fn touch(&mut self, i: NodeId) {
        self.last_change[i] = self.now().ticks();
    }

    pub fn run(mut self) -> RunResult {
        let horizon = SimTime(self.sc.horizon);
        let mut exceeded = false;
        while let Some(t) = self.queue.peek_time() {
            if t > horizon {
                exceeded = true;
                break;
            }
            let ev = self.queue.pop().expect("peeked");
            self.seq = ev.seq;
            self.dispatch(ev.payload);
        }
        self.finish(exceeded)
    }

    fn dispatch(&mut self, ev: Event) {
        let kind = ev.kind().as_str();
        match ev {
            Event::Arrival(msg) => {
                let to = msg.dst;
                if !self.nodes[to].alive {
                    self.metrics.dead_deliveries += 1;
                    self.note(kind, Some(to), || format!("dropped {}->{} {}", msg.src, to, msg.body));
                    return;
                }
                self.note(kind, Some(to), || format!("{}->{} {}", msg.src, to, msg.body));
                let now = self.now();
                self.nodes[to].battery.advance(now);
                self.nodes[to].battery.spend_rx();
                self.check_depleted(to);
                self.on_message(to, msg.src, msg.body);
            }
            Event::Timer { node, incarnation, timer } => {
                if !self.nodes[node].alive || self.nodes[node].incarnation != incarnation {
                    return;
                }
                self.note(kind, Some(node), || timer.to_string());
                let now = self.now();
                self.nodes[node].battery.advance(now);
                self.check_depleted(node);
                self.on_timer(node, timer);
            }
            Event::Fault(f) => match f.action {
                FaultAction::Crash => {
                    if self.nodes[f.node].alive {
                        self.note(kind, Some(f.node), || "crash".into());
                        self.crash(f.node);
                    }
                }
                FaultAction::Recover => {
                    if !self.nodes[f.node].alive && !self.nodes[f.node].battery.is_depleted() {
                        self.note(kind, Some(f.node), || "recover".into());
                        self.recover(f.node);
                    }
                }
            },
            Event::Deplete(i) => {
                if self.nodes[i].alive {
                    self.note(kind, Some(i), || "battery empty".into());
                    self.crash(i);
                }
            }
            Event::Mobility => {
                let now = self.now();
                let deltas = self.mobility.step(now, &mut self.topo, &mut self.rng.mobility);
                self.note(kind, None, || format!("{} link changes", deltas.len()));
                self.after_mobility(deltas);
                let period = self.sc.mobility.period;
                let until = self.sc.mobility.until;
                if until == 0 || now.ticks() + period <= until {
                    self.schedule(now + period, Event::Mobility);
                }
            }
            Event::Round { round, phase } => {
                self.note(kind, None, || format!("r{round}.{phase}"));
                self.on_round(round, phase);
            }
        }
    }

    fn on_message(&mut self, to: NodeId, from: NodeId, body: MessageBody) {
        if self.sc.algorithm == Algorithm::Masterslave {
            self.ms_message(to, from, body);
        } else {
            self.elect_message(to, from, body);
        }
    }

    fn on_timer(&mut self, node: NodeId, timer: Timer) {
        match timer {
            Timer::Heartbeat => self.heartbeat_tick(node),
            Timer::Trigger => self.trigger(node, "bootstrap"),
            Timer::Diffusion(t) => self.diffusion_timer(node, t),
            Timer::InquiryDone => self.inquiry_done(node),
            Timer::InviteDone => self.invite_done(node),
            Timer::Invite => self.ms_invite_timer(node),
            Timer::ObserveLoss => {
                if self.nodes[node].leader().is_some() && !self.nodes[node].electing() {
                    self.note("ObservedLoss", Some(node), String::new);
                    self.leader_lost(node);
                }
            }
        }
    }

    fn crash(&mut self, i: NodeId) {
        let node = &mut self.nodes[i];
        node.alive = false;
        node.incarnation += 1;
        node.inquiry = None;
        let deltas = self.topo.set_alive(i, false);
        self.touch(i);
        self.after_fault(i, deltas, false);
    }

    fn recover(&mut self, i: NodeId) {
        let now = self.now();
        let own = self.key(i);
        let node = &mut self.nodes[i];
        node.alive = true;
        node.battery.resume_at(now);
        node.monitor.clear();
        node.candidates = Default::default();
        node.relayed = None;
        node.diff.reset();
        node.cluster.members_known.clear();
        node.cluster.deferred.clear();
        node.ms = crate::algorithms::MsState::new(own, node.aspirant);
        let deltas = self.topo.set_alive(i, true);
        self.touch(i);
        self.arm_heartbeat(i);
        self.after_fault(i, deltas, true);
        if self.sc.algorithm == Algorithm::Masterslave {
            self.ms_recovered(i);
        } else {
            self.elect_recovered(i);
        }
    }

    fn arm_heartbeat(&mut self, i: NodeId) {
        let period = self.sc.heartbeat.period;
        if period == 0 {
            return;
        }
        let first = self.nodes[i].phase + 1;
        let now = self.now().ticks();
        let next = if now < first { first } else { first + (now - first) / period * period + period };
        self.arm(i, next - now, Timer::Heartbeat);
    }

    fn link_deltas_touch(&mut self, deltas: &[LinkDelta]) {
        for d in deltas {
            let (LinkDelta::Up(a, b) | LinkDelta::Down(a, b)) = *d;
            self.touch(a);
            self.touch(b);
        }
    }

    fn after_fault(&mut self, i: NodeId, deltas: Vec<LinkDelta>, recovered: bool) {
        self.link_deltas_touch(&deltas);
        if self.sc.algorithm == Algorithm::Masterslave {
            self.ms_fault(i, recovered);
        } else {
            self.hello_on(&deltas);
        }
    }

    fn after_mobility(&mut self, deltas: Vec<LinkDelta>) {
        if deltas.is_empty() {
            return;
        }
        self.link_deltas_touch(&deltas);
        if self.sc.algorithm == Algorithm::Masterslave {
            self.ms_reform();
        } else {
            self.recluster();
            self.hello_on(&deltas);
        }
    }

    fn finish(mut self, exceeded: bool) -> RunResult {
        self.metrics.in_flight = self.queue.pending().filter(|e| matches!(e, Event::Arrival(_))).count() as u64;
        let end = if exceeded { SimTime(self.sc.horizon) } else { self.now() };
        let n = self.nodes.len();
        let leaders: Vec<Option<u64>> =
            self.nodes.iter().map(|nd| if nd.alive { nd.leader().map(|l| l.uid.0) } else { None }).collect();
        let snapshots = self
            .nodes
            .iter()
            .map(|nd| SnapshotRecord {
                t: end,
                node: nd.id,
                leader: leaders[nd.id],
                role: nd.role().to_string(),
                battery: nd.battery.fraction(),
            })
            .collect();
        let inputs = OracleInputs {
            uids: self.nodes.iter().map(|nd| nd.uid.0).collect(),
            charges: self.nodes.iter().map(|nd| nd.battery.charge()).collect(),
            mobility: (0..n).map(|i| self.mobility.metric(i, end, &self.topo).map_or(0.0, |m| m.value)).collect(),
            v_max: self.sc.mobility.v_max(),
            weights: self.sc.criterion.weights(),
            mode: self.sc.criterion_mode(),
        };
        let settle = self.sc.settle_window();
        let last_change = self.last_change.clone();
        // A drained queue means nothing can change any more.
        let stable = |members: &[NodeId]| !exceeded || members.iter().all(|&m| last_change[m] + settle <= end.ticks());
        let verdicts: Vec<OracleVerdict> = check_safety(&self.topo.snapshot(), &inputs, &leaders, stable);
        let trees = self.comps.iter().map(|(c, t)| (c.to_string(), t.edges.clone())).collect();
        let pmp_degrees = self.layout.pmp_nodes().iter().map(|&p| self.topo.neighbors(p).len()).collect();
        let e = &self.sc.enhancements;
        let flags: Vec<&str> = [
            (e.clustering, "clustering"),
            (e.join_gating, "join_gating"),
            (e.inquiry_on_recover, "inquiry_on_recover"),
            (e.starter_quality, "starter_quality"),
            (e.candidate_criteria, "candidate_criteria"),
            (e.csma_backoff, "csma_backoff"),
            (e.slave_participation, "slave_participation"),
            (e.invitation, "invitation"),
        ]
        .iter()
        .filter(|f| f.0)
        .map(|f| f.1)
        .collect();
        let summary = RunSummary {
            scenario: self.sc.name.clone(),
            seed: self.sc.seed,
            algorithm: self.sc.algorithm.as_str().to_string(),
            enhancements: if flags.is_empty() { "-".to_string() } else { flags.join("+") },
            nodes: n,
            metrics: std::mem::take(&mut self.metrics),
            verdicts,
            horizon_exceeded: exceeded,
        };
        RunResult {
            summary,
            trace: RunTrace { records: std::mem::take(&mut self.records), snapshots, end_time: end, horizon_exceeded: exceeded },
            faults: std::mem::take(&mut self.faults),
            ms_log: std::mem::take(&mut self.ms_log),
            trees,
            leaders,
            pmp_degrees,
        }
    }
}

/// Builds and runs one scenario.
pub fn run_scenario(sc: &Scenario, trace: bool) -> Result<RunResult, SimError> {
    let mut sim = Simulator::new(sc)?;
    sim.set_tracing(trace);
    Ok(sim.run())
}
