//! Diffusion-computation election: the starter's `Election` grows a spanning
//! tree, `Ack`s carry the best key seen back to the root, and the root
//! diffuses `Leader` down the tree.
//!
//! The same machine serves the flat diffusion algorithm, the candidate-list
//! algorithm (`carry_candidates`) and the clustered hierarchy
//! (`clustering`, which adds level-1 intra-cluster computations).

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use super::backoff::{csma_backoff, BackoffConfig};
use super::cluster::ClusterId;
use super::conflict::{resolve_computation_conflict, ComputationId, PriorityMode, Resolution};
use crate::election::{merge_candidate_lists, CandidateList, CriterionValue, MessageBody};
use crate::engine::{NodeId, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiffusionConfig {
    pub priority: PriorityMode,
    pub carry_candidates: bool,
    pub clustering: bool,
    pub backoff: Option<BackoffConfig>,
    /// Period of the child/parent liveness check while a computation is open.
    pub ack_check: u64,
    /// An open computation older than this is abandoned and retriggered.
    pub watchdog: u64,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            priority: PriorityMode::Uid,
            carry_candidates: false,
            clustering: false,
            backoff: None,
            ack_check: 12,
            watchdog: 600,
        }
    }
}

/// What the machine may look at besides its own state.
#[derive(Clone, Copy, Debug)]
pub struct NodeCtx<'a> {
    pub now: SimTime,
    pub me: NodeId,
    pub criterion: CriterionValue,
    pub neighbors: &'a [NodeId],
    pub clusters: &'a [ClusterId],
    pub leader: Option<CriterionValue>,
    pub candidates: &'a CandidateList,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiffusionTimer {
    AckCheck(ComputationId),
    Watchdog(ComputationId),
    Backoff(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Send { to: NodeId, body: MessageBody },
    SetTimer { after: u64, timer: DiffusionTimer },
    /// Entered a computation; any installed leader is suspended.
    Joined { comp: ComputationId, parent: Option<NodeId> },
    /// This node is the root of a new computation.
    Started { comp: ComputationId },
    /// Root saw every ack.
    Completed { comp: ComputationId, leader: CriterionValue },
    Install { comp: ComputationId, leader: CriterionValue, candidates: Option<CandidateList>, depth: u32 },
    /// Lost the tree (orphaned or timed out); run the trigger path again.
    Retrigger,
    BackoffArmed { delay: u64 },
    BackoffCancelled,
    Stale,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Phase {
    #[default]
    Idle,
    Growing,
    Acked,
    Done,
}

#[derive(Clone, Debug, Default)]
pub struct DiffusionState {
    pub active: Option<ComputationId>,
    pub parent: Option<NodeId>,
    pub pending_children: BTreeSet<NodeId>,
    /// Neighbors that acked with us as their parent.
    pub children: BTreeSet<NodeId>,
    /// Targets of our `Election` forward for the active computation.
    pub forwarded_to: BTreeSet<NodeId>,
    pub best_seen: Option<CriterionValue>,
    pub candidates: CandidateList,
    pub phase: Phase,
    /// Longest causal message chain seen in the active computation.
    pub clock: u32,
    epoch: u32,
    finished: HashSet<ComputationId>,
    backoff_token: Option<u64>,
    next_token: u64,
    awaiting_global: Option<ComputationId>,
}

impl DiffusionState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Protocol state after a crash; the epoch counter survives so
    /// computation ids stay unique.
    pub fn reset(&mut self) {
        let epoch = self.epoch;
        let next_token = self.next_token;
        *self = DiffusionState { epoch, next_token, ..Default::default() };
    }

    pub fn in_progress(&self) -> bool {
        self.active.is_some()
    }

    pub fn backing_off(&self) -> bool {
        self.backoff_token.is_some()
    }

    pub fn awaiting_global(&self) -> bool {
        self.awaiting_global.is_some()
    }

    fn base_level(cfg: &DiffusionConfig) -> u8 {
        if cfg.clustering {
            1
        } else {
            0
        }
    }

    fn comp_for(&self, ctx: &NodeCtx, level: u8, epoch: u32) -> ComputationId {
        ComputationId { level, starter: ctx.criterion.uid, starter_criterion: ctx.criterion, epoch }
    }

    fn targets(ctx: &NodeCtx, comp: &ComputationId, exclude: Option<NodeId>) -> BTreeSet<NodeId> {
        ctx.neighbors
            .iter()
            .copied()
            .filter(|&n| Some(n) != exclude)
            .filter(|&n| comp.level != 1 || ctx.clusters[n] == ctx.clusters[ctx.me])
            .collect()
    }

    fn abandon(&mut self) {
        if let Some(cur) = self.active.take() {
            self.finished.insert(cur);
        }
        if let Some(c) = self.awaiting_global.take() {
            self.finished.insert(c);
        }
        self.parent = None;
        self.pending_children.clear();
        self.children.clear();
        self.forwarded_to.clear();
        self.phase = Phase::Idle;
    }

    fn own_candidates(&self, cfg: &DiffusionConfig) -> Option<CandidateList> {
        cfg.carry_candidates.then(|| self.candidates.clone())
    }

    /// Leader-loss (or bootstrap) entry point.
    pub fn trigger(&mut self, ctx: &NodeCtx, cfg: &DiffusionConfig) -> Vec<Action> {
        if let Some(b) = cfg.backoff {
            let delay = csma_backoff(ctx.criterion.uid, b.uid_max, b.t_slot);
            if delay > 0 {
                let token = self.next_token;
                self.next_token += 1;
                self.backoff_token = Some(token);
                return vec![
                    Action::BackoffArmed { delay },
                    Action::SetTimer { after: delay, timer: DiffusionTimer::Backoff(token) },
                ];
            }
        }
        self.start(ctx, cfg, Self::base_level(cfg))
    }

    fn start(&mut self, ctx: &NodeCtx, cfg: &DiffusionConfig, level: u8) -> Vec<Action> {
        self.abandon();
        self.backoff_token = None;
        self.epoch += 1;
        let comp = self.comp_for(ctx, level, self.epoch);
        self.active = Some(comp);
        self.phase = Phase::Growing;
        self.best_seen = Some(ctx.criterion);
        self.candidates = CandidateList::single(ctx.criterion);
        self.clock = 0;
        let mut acts = vec![Action::Joined { comp, parent: None }, Action::Started { comp }];
        self.fan_out(ctx, cfg, comp, None, &mut acts);
        acts
    }

    fn join(&mut self, ctx: &NodeCtx, cfg: &DiffusionConfig, from: NodeId, comp: ComputationId, depth: u32) -> Vec<Action> {
        self.abandon();
        self.active = Some(comp);
        self.parent = Some(from);
        self.phase = Phase::Growing;
        self.best_seen = Some(ctx.criterion);
        self.candidates = CandidateList::single(ctx.criterion);
        self.clock = depth;
        let mut acts = vec![Action::Joined { comp, parent: Some(from) }];
        self.fan_out(ctx, cfg, comp, Some(from), &mut acts);
        acts
    }

    fn fan_out(
        &mut self,
        ctx: &NodeCtx,
        cfg: &DiffusionConfig,
        comp: ComputationId,
        parent: Option<NodeId>,
        acts: &mut Vec<Action>,
    ) {
        let targets = Self::targets(ctx, &comp, parent);
        for &t in &targets {
            acts.push(Action::Send { to: t, body: MessageBody::Election { comp, depth: self.clock + 1 } });
        }
        self.forwarded_to = targets.clone();
        self.pending_children = targets;
        if self.pending_children.is_empty() {
            self.finish_subtree(ctx, cfg, acts);
        }
        if self.active == Some(comp) {
            acts.push(Action::SetTimer { after: cfg.ack_check, timer: DiffusionTimer::AckCheck(comp) });
            acts.push(Action::SetTimer { after: cfg.watchdog, timer: DiffusionTimer::Watchdog(comp) });
        }
    }

    fn finish_subtree(&mut self, ctx: &NodeCtx, cfg: &DiffusionConfig, acts: &mut Vec<Action>) {
        let comp = self.active.expect("finishing without a computation");
        let best = self.best_seen.unwrap_or(ctx.criterion);
        match self.parent {
            Some(p) => {
                self.phase = Phase::Acked;
                acts.push(Action::Send {
                    to: p,
                    body: MessageBody::Ack {
                        comp,
                        joined: true,
                        best,
                        candidates: self.own_candidates(cfg),
                        depth: self.clock + 1,
                    },
                });
            }
            None => {
                acts.push(Action::Completed { comp, leader: best });
                self.conclude(ctx, cfg, comp, best, acts);
            }
        }
    }

    /// Closes the active computation with `leader` and pushes the result down
    /// the tree.
    fn conclude(
        &mut self,
        ctx: &NodeCtx,
        cfg: &DiffusionConfig,
        comp: ComputationId,
        leader: CriterionValue,
        acts: &mut Vec<Action>,
    ) {
        self.active = None;
        self.finished.insert(comp);
        self.phase = Phase::Done;
        let candidates = self.own_candidates(cfg);
        for &c in &self.children {
            acts.push(Action::Send {
                to: c,
                body: MessageBody::Leader {
                    comp: Some(comp),
                    leader,
                    candidates: candidates.clone(),
                    depth: self.clock + 1,
                },
            });
        }
        self.parent = None;
        self.children.clear();
        self.pending_children.clear();
        if comp.level == 1 {
            if leader.uid == ctx.criterion.uid {
                acts.extend(self.start(ctx, cfg, 2));
            } else {
                self.awaiting_global = Some(comp);
                acts.push(Action::SetTimer { after: cfg.watchdog, timer: DiffusionTimer::Watchdog(comp) });
            }
        } else {
            acts.push(Action::Install { comp, leader, candidates, depth: self.clock });
        }
    }

    pub fn on_message(&mut self, ctx: &NodeCtx, cfg: &DiffusionConfig, from: NodeId, body: &MessageBody) -> Vec<Action> {
        match body {
            MessageBody::Election { comp, depth } => self.on_election(ctx, cfg, from, *comp, *depth),
            MessageBody::Ack { comp, joined, best, candidates, depth } => {
                self.on_ack(ctx, cfg, from, *comp, *joined, *best, candidates.as_ref(), *depth)
            }
            MessageBody::Leader { comp: Some(comp), leader, candidates, depth } => {
                self.on_leader(ctx, cfg, *comp, *leader, candidates.as_ref(), *depth)
            }
            _ => Vec::new(),
        }
    }

    fn on_election(&mut self, ctx: &NodeCtx, cfg: &DiffusionConfig, from: NodeId, comp: ComputationId, depth: u32) -> Vec<Action> {
        let mut acts = Vec::new();
        if self.backoff_token.is_some() {
            let mine = self.comp_for(ctx, Self::base_level(cfg), self.epoch + 1);
            if comp.priority_cmp(&mine, cfg.priority) == Ordering::Greater {
                self.backoff_token = None;
                acts.push(Action::BackoffCancelled);
            } else if self.active.is_none() {
                acts.push(Action::Stale);
                return acts;
            }
        }
        if self.finished.contains(&comp) {
            acts.push(Action::Send {
                to: from,
                body: MessageBody::Ack {
                    comp,
                    joined: false,
                    best: self.best_seen.unwrap_or(ctx.criterion),
                    candidates: None,
                    depth: depth + 1,
                },
            });
            acts.push(Action::Stale);
            return acts;
        }
        match self.active {
            Some(cur) if cur == comp => {
                self.clock = self.clock.max(depth);
                acts.push(Action::Send {
                    to: from,
                    body: MessageBody::Ack {
                        comp,
                        joined: false,
                        best: self.best_seen.unwrap_or(ctx.criterion),
                        candidates: self.own_candidates(cfg),
                        depth: self.clock + 1,
                    },
                });
            }
            Some(cur) if resolve_computation_conflict(&cur, &comp, cfg.priority) == Resolution::Keep => {
                acts.push(Action::Stale);
            }
            _ => acts.extend(self.join(ctx, cfg, from, comp, depth)),
        }
        acts
    }

    #[allow(clippy::too_many_arguments)]
    fn on_ack(
        &mut self,
        ctx: &NodeCtx,
        cfg: &DiffusionConfig,
        from: NodeId,
        comp: ComputationId,
        joined: bool,
        best: CriterionValue,
        candidates: Option<&CandidateList>,
        depth: u32,
    ) -> Vec<Action> {
        let mut acts = Vec::new();
        if self.active != Some(comp) {
            // A subtree still hanging off a computation we already left:
            // hand it our leader so it can close.
            if joined && self.active.is_none() && self.finished.contains(&comp) {
                if let Some(leader) = ctx.leader {
                    acts.push(Action::Send {
                        to: from,
                        body: MessageBody::Leader {
                            comp: Some(comp),
                            leader,
                            candidates: cfg.carry_candidates.then(|| ctx.candidates.clone()),
                            depth: depth + 1,
                        },
                    });
                }
            }
            acts.push(Action::Stale);
            return acts;
        }
        if !self.pending_children.remove(&from) {
            acts.push(Action::Stale);
            return acts;
        }
        if joined {
            self.children.insert(from);
        }
        self.best_seen = Some(self.best_seen.map_or(best, |b| b.max(best)));
        if let Some(list) = candidates {
            self.candidates = merge_candidate_lists(&self.candidates, list);
        }
        self.clock = self.clock.max(depth);
        if self.pending_children.is_empty() && self.phase == Phase::Growing {
            self.finish_subtree(ctx, cfg, &mut acts);
        }
        acts
    }

    fn on_leader(
        &mut self,
        ctx: &NodeCtx,
        cfg: &DiffusionConfig,
        comp: ComputationId,
        leader: CriterionValue,
        candidates: Option<&CandidateList>,
        depth: u32,
    ) -> Vec<Action> {
        let mut acts = Vec::new();
        if self.active != Some(comp) {
            acts.push(Action::Stale);
            return acts;
        }
        if let Some(list) = candidates {
            self.candidates = list.clone();
        }
        self.clock = self.clock.max(depth);
        self.conclude(ctx, cfg, comp, leader, &mut acts);
        acts
    }

    pub fn on_timer(&mut self, ctx: &NodeCtx, cfg: &DiffusionConfig, timer: DiffusionTimer) -> Vec<Action> {
        let mut acts = Vec::new();
        match timer {
            DiffusionTimer::AckCheck(comp) => {
                if self.active != Some(comp) {
                    return acts;
                }
                if self.parent.is_some_and(|p| !ctx.neighbors.contains(&p)) {
                    self.abandon();
                    acts.push(Action::Retrigger);
                    return acts;
                }
                self.pending_children.retain(|c| ctx.neighbors.contains(c));
                if self.phase == Phase::Growing && self.pending_children.is_empty() {
                    self.finish_subtree(ctx, cfg, &mut acts);
                }
                if self.active == Some(comp) {
                    acts.push(Action::SetTimer { after: cfg.ack_check, timer: DiffusionTimer::AckCheck(comp) });
                }
            }
            DiffusionTimer::Watchdog(comp) => {
                if self.active == Some(comp) || self.awaiting_global == Some(comp) {
                    self.abandon();
                    acts.push(Action::Retrigger);
                }
            }
            DiffusionTimer::Backoff(token) => {
                if self.backoff_token == Some(token) {
                    self.backoff_token = None;
                    acts.extend(self.start(ctx, cfg, Self::base_level(cfg)));
                }
            }
        }
        acts
    }

    /// A newcomer accepted mid-election without gating is pulled into the
    /// open computation.
    pub fn admit(&mut self, newcomer: NodeId) -> Vec<Action> {
        match (self.active, self.phase) {
            (Some(comp), Phase::Growing)
                if !self.pending_children.contains(&newcomer) && !self.children.contains(&newcomer) =>
            {
                self.pending_children.insert(newcomer);
                self.forwarded_to.insert(newcomer);
                vec![Action::Send { to: newcomer, body: MessageBody::Election { comp, depth: self.clock + 1 } }]
            }
            _ => Vec::new(),
        }
    }

    /// Drops the awaited backoff without starting.
    pub fn cancel_backoff(&mut self) -> bool {
        self.backoff_token.take().is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::Uid;
    use std::collections::VecDeque;

    struct Net {
        adj: Vec<Vec<NodeId>>,
        clusters: Vec<ClusterId>,
        keys: Vec<CriterionValue>,
        states: Vec<DiffusionState>,
        leaders: Vec<Option<CriterionValue>>,
        empty: CandidateList,
        sent: usize,
    }

    impl Net {
        fn new(n: usize, edges: &[(usize, usize)]) -> Self {
            let mut adj = vec![Vec::new(); n];
            for &(a, b) in edges {
                adj[a].push(b);
                adj[b].push(a);
            }
            for l in &mut adj {
                l.sort();
            }
            Net {
                adj,
                clusters: vec![ClusterId::default(); n],
                keys: (0..n).map(|i| CriterionValue::uid_only(Uid(i as u64 + 1))).collect(),
                states: vec![DiffusionState::new(); n],
                leaders: vec![None; n],
                empty: CandidateList::new(),
                sent: 0,
            }
        }

        fn ctx(&self, me: NodeId) -> NodeCtx<'_> {
            NodeCtx {
                now: SimTime::ZERO,
                me,
                criterion: self.keys[me],
                neighbors: &self.adj[me],
                clusters: &self.clusters,
                leader: self.leaders[me],
                candidates: &self.empty,
            }
        }

        /// Delivers messages in FIFO order until quiet; timers are ignored.
        fn run(&mut self, cfg: &DiffusionConfig, starters: &[NodeId]) {
            let mut q: VecDeque<(NodeId, NodeId, MessageBody)> = VecDeque::new();
            for &s in starters {
                let mut st = std::mem::take(&mut self.states[s]);
                let acts = st.trigger(&self.ctx(s), cfg);
                self.states[s] = st;
                self.apply(s, acts, &mut q);
            }
            while let Some((from, to, body)) = q.pop_front() {
                let mut st = std::mem::take(&mut self.states[to]);
                let acts = st.on_message(&self.ctx(to), cfg, from, &body);
                self.states[to] = st;
                self.apply(to, acts, &mut q);
            }
        }

        fn apply(&mut self, me: NodeId, acts: Vec<Action>, q: &mut VecDeque<(NodeId, NodeId, MessageBody)>) {
            for a in acts {
                match a {
                    Action::Send { to, body } => {
                        self.sent += 1;
                        q.push_back((me, to, body));
                    }
                    Action::Joined { .. } => self.leaders[me] = None,
                    Action::Install { leader, .. } => self.leaders[me] = Some(leader),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn line_of_three_from_middle() {
        let mut net = Net::new(3, &[(0, 1), (1, 2)]);
        net.run(&DiffusionConfig::default(), &[1]);
        let max = Some(net.keys[2]);
        assert!(net.leaders.iter().all(|l| *l == max));
        // two elections, two acks, two leaders
        assert_eq!(net.sent, 6);
    }

    #[test]
    fn concurrent_starters_agree_on_max() {
        let edges: Vec<_> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        let mut net = Net::new(8, &edges);
        net.run(&DiffusionConfig::default(), &[0, 3, 5]);
        let max = Some(net.keys[7]);
        assert!(net.leaders.iter().all(|l| *l == max), "{:?}", net.leaders);
        assert!(net.states.iter().all(|s| !s.in_progress()));
    }

    #[test]
    fn isolated_starter_elects_itself_silently() {
        let mut net = Net::new(1, &[]);
        net.run(&DiffusionConfig::default(), &[0]);
        assert_eq!(net.leaders[0], Some(net.keys[0]));
        assert_eq!(net.sent, 0);
    }

    #[test]
    fn clustered_run_reaches_global_max() {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)];
        let mut net = Net::new(6, &edges);
        net.clusters = vec![ClusterId(0, 0), ClusterId(0, 0), ClusterId(0, 0), ClusterId(1, 0), ClusterId(1, 0), ClusterId(1, 0)];
        let cfg = DiffusionConfig { clustering: true, ..Default::default() };
        net.run(&cfg, &[0, 3]);
        let max = Some(net.keys[5]);
        assert!(net.leaders.iter().all(|l| *l == max), "{:?}", net.leaders);
    }

    #[test]
    fn backoff_arms_timer_for_low_uid() {
        let net = Net::new(2, &[(0, 1)]);
        let cfg = DiffusionConfig { backoff: Some(BackoffConfig { t_slot: 4, uid_max: 2 }), ..Default::default() };
        let mut st = DiffusionState::new();
        let acts = st.trigger(&net.ctx(0), &cfg);
        assert_eq!(acts[0], Action::BackoffArmed { delay: 4 });
        assert!(st.backing_off());
        let mut top = DiffusionState::new();
        let acts = top.trigger(&net.ctx(1), &cfg);
        assert!(acts.iter().any(|a| matches!(a, Action::Started { .. })));
    }

    #[test]
    fn lower_computation_is_dropped() {
        let net = Net::new(3, &[(0, 1), (1, 2)]);
        let cfg = DiffusionConfig::default();
        let mut st = DiffusionState::new();
        st.trigger(&net.ctx(2), &cfg);
        let low = ComputationId { level: 0, starter: Uid(1), starter_criterion: net.keys[0], epoch: 1 };
        let acts = st.on_message(&net.ctx(2), &cfg, 1, &MessageBody::Election { comp: low, depth: 1 });
        assert_eq!(acts, vec![Action::Stale]);
    }
}
