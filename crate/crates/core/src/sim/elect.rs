//! Glue between the kernel and the diffusion-family machines, plus the
//! heartbeat, inquiry and hello handling they share.

use super::{CompTrack, Simulator, Timer};
use crate::algorithms::{
    cluster_of, gate_join_during_election, Action, DiffusionState, DiffusionTimer, JoinDecision, NodeCtx,
};
use crate::election::{
    resolve_inquiry, CandidateList, CriterionValue, InquiryReplyInfo, InquiryResolution, MessageBody,
};
use crate::engine::NodeId;
use crate::metrics::ElectionRecord;
use crate::network::LinkDelta;
use crate::scenario::Algorithm;

impl Simulator {
    fn with_diffusion<F>(&mut self, i: NodeId, f: F)
    where
        F: FnOnce(&mut DiffusionState, &NodeCtx, &crate::algorithms::DiffusionConfig) -> Vec<Action>,
    {
        let key = self.key(i);
        let mut st = std::mem::take(&mut self.nodes[i].diff);
        let acts = {
            let ctx = NodeCtx {
                now: self.now(),
                me: i,
                criterion: key,
                neighbors: self.topo.neighbors(i),
                clusters: &self.clusters,
                leader: self.nodes[i].leader(),
                candidates: &self.nodes[i].candidates,
            };
            f(&mut st, &ctx, &self.dcfg)
        };
        self.nodes[i].diff = st;
        self.apply(i, acts);
    }

    fn apply(&mut self, i: NodeId, acts: Vec<Action>) {
        for a in acts {
            match a {
                Action::Send { to, body } => self.send(i, to, body),
                Action::SetTimer { after, timer } => self.arm(i, after, Timer::Diffusion(timer)),
                Action::Joined { comp, parent } => {
                    self.nodes[i].monitor.clear();
                    self.nodes[i].inquiry = None;
                    let track = self.comps.entry(comp).or_default();
                    track.participants.insert(i);
                    if let Some(p) = parent {
                        track.edges.push((p, i));
                    }
                    self.note("Joined", Some(i), || comp.to_string());
                }
                Action::Started { comp } => {
                    let record = self.metrics.elections.len();
                    self.metrics.elections.push(ElectionRecord {
                        id: comp.to_string(),
                        level: comp.level,
                        starter: comp.starter.0,
                        start: self.now().ticks(),
                        end: None,
                        steps: 0,
                        participants: 0,
                        anon: 0.0,
                    });
                    let track = self.comps.entry(comp).or_default();
                    track.record = record;
                    track.participants.insert(i);
                    self.note("ElectionStart", Some(i), || comp.to_string());
                }
                Action::Completed { comp, leader } => {
                    let track = self.comps.get(&comp).cloned().unwrap_or_else(CompTrack::default);
                    let pn = track.participants.len();
                    let deg: usize = track.participants.iter().map(|&p| self.topo.degree(p)).sum();
                    let now = self.now().ticks();
                    let steps = self.nodes[i].diff.clock;
                    if let Some(r) = self.metrics.elections.get_mut(track.record) {
                        r.end = Some(now);
                        r.steps = steps;
                        r.participants = pn;
                        r.anon = if pn == 0 { 0.0 } else { deg as f64 / pn as f64 };
                    }
                    if comp.level != 1 {
                        self.metrics.elections_completed += 1;
                    }
                    self.note("ElectionComplete", Some(i), || format!("{comp} leader={}", leader.uid));
                }
                Action::Install { comp, leader, candidates, .. } => {
                    if let Some(list) = candidates {
                        self.nodes[i].candidates = list;
                    }
                    let hops = self.nodes.len() as u32;
                    self.install(i, leader, hops);
                    self.note("Install", Some(i), || format!("{comp} leader={}", leader.uid));
                    self.release_deferred(i);
                }
                Action::Retrigger => self.trigger(i, "retrigger"),
                Action::BackoffArmed { delay } => self.note("Backoff", Some(i), || format!("delay={delay}")),
                Action::BackoffCancelled => self.note("BackoffCancelled", Some(i), String::new),
                Action::Stale => self.metrics.dropped_stale += 1,
            }
        }
        if !self.nodes[i].diff.in_progress() && !self.nodes[i].cluster.deferred.is_empty() {
            self.release_deferred(i);
        }
    }

    pub(super) fn install(&mut self, i: NodeId, leader: CriterionValue, hops: u32) {
        let now = self.now();
        let own = self.nodes[i].uid == leader.uid;
        self.nodes[i].monitor.install(leader, now, if own { 0 } else { hops });
    }

    /// Starts an election at `i`; counted once per call.
    pub(super) fn trigger(&mut self, i: NodeId, reason: &'static str) {
        self.metrics.elections_started += 1;
        self.note("ElectionTrigger", Some(i), || reason.to_string());
        self.nodes[i].monitor.clear();
        self.nodes[i].inquiry = None;
        self.with_diffusion(i, |st, ctx, cfg| st.trigger(ctx, cfg));
    }

    pub(super) fn diffusion_timer(&mut self, i: NodeId, t: DiffusionTimer) {
        self.with_diffusion(i, |st, ctx, cfg| st.on_timer(ctx, cfg, t));
    }

    pub(super) fn leader_lost(&mut self, i: NodeId) {
        let Some(failed) = self.nodes[i].leader() else { return };
        self.note("LeaderLost", Some(i), || format!("leader={}", failed.uid));
        match self.sc.algorithm {
            Algorithm::Masterslave => self.ms_leader_lost(i),
            Algorithm::Candidates => {
                self.nodes[i].candidates.remove(failed.uid);
                match self.nodes[i].candidates.best() {
                    Some(next) => {
                        // Everyone falls back to the same successor; give it a
                        // beat period to notice it now leads.
                        let hops = self.nodes.len() as u32;
                        self.install(i, next, hops);
                        self.nodes[i].monitor.last_heard = self.now() + self.sc.heartbeat.period;
                        self.note("CandidateInstall", Some(i), || format!("leader={}", next.uid));
                    }
                    None => self.trigger(i, "leader-loss"),
                }
            }
            _ => self.trigger(i, "leader-loss"),
        }
    }

    pub(super) fn heartbeat_tick(&mut self, i: NodeId) {
        let period = self.sc.heartbeat.period;
        self.arm(i, period, Timer::Heartbeat);
        if self.nodes[i].electing() {
            return;
        }
        if self.nodes[i].is_leader() {
            let leader = self.nodes[i].leader().expect("leading");
            self.nodes[i].beat += 1;
            let beat = self.nodes[i].beat;
            self.nodes[i].relayed = Some((leader.uid, beat));
            let candidates = (self.sc.algorithm == Algorithm::Candidates).then(|| self.nodes[i].candidates.clone());
            self.broadcast(i, MessageBody::Heartbeat { leader, beat, hops: 1, candidates }, None);
        } else if self.nodes[i].leader().is_some() {
            let now = self.now();
            let cfg = self.sc.heartbeat.clone();
            if self.nodes[i].monitor.detect_leader_loss(now, &cfg) {
                self.leader_lost(i);
            }
        }
    }

    fn relay(&mut self, i: NodeId, from: NodeId, leader: CriterionValue, beat: u64, hops: u32, candidates: Option<CandidateList>) {
        if self.nodes[i].relayed.is_some_and(|(u, b)| u == leader.uid && b >= beat) {
            return;
        }
        self.nodes[i].relayed = Some((leader.uid, beat));
        self.broadcast(i, MessageBody::Heartbeat { leader, beat, hops: hops + 1, candidates }, Some(from));
    }

    pub(super) fn on_heartbeat(
        &mut self,
        i: NodeId,
        from: NodeId,
        leader: CriterionValue,
        beat: u64,
        hops: u32,
        candidates: Option<CandidateList>,
    ) {
        let now = self.now();
        let ms = self.sc.algorithm == Algorithm::Masterslave;
        let node = &self.nodes[i];
        if node.electing() {
            return;
        }
        let current = node.leader();
        match current {
            Some(l) if l.uid == leader.uid => {
                if node.is_leader() {
                    return;
                }
                let m = &mut self.nodes[i].monitor;
                if beat > m.last_beat || (beat == m.last_beat && hops < m.hops) {
                    m.heard(now, hops, beat);
                }
                if let Some(list) = &candidates {
                    self.nodes[i].candidates = list.clone();
                }
                self.relay(i, from, leader, beat, hops, candidates);
            }
            // Two leaders met after a merge: the larger one stays.
            Some(l) if !ms && leader > l => self.adopt(i, from, leader, beat, hops, candidates),
            None if !ms => self.adopt(i, from, leader, beat, hops, candidates),
            _ => {}
        }
    }

    fn adopt(&mut self, i: NodeId, from: NodeId, leader: CriterionValue, beat: u64, hops: u32, candidates: Option<CandidateList>) {
        self.install(i, leader, hops);
        self.nodes[i].monitor.last_beat = beat;
        if let Some(list) = &candidates {
            self.nodes[i].candidates = list.clone();
        }
        self.note("Adopt", Some(i), || format!("leader={}", leader.uid));
        self.relay(i, from, leader, beat, hops, candidates);
    }

    pub(super) fn elect_message(&mut self, i: NodeId, from: NodeId, body: MessageBody) {
        match body {
            MessageBody::Heartbeat { leader, beat, hops, candidates } => {
                self.on_heartbeat(i, from, leader, beat, hops, candidates)
            }
            MessageBody::Inquiry => self.answer_inquiry(i, from),
            MessageBody::InquiryReply { leader, hops } => {
                if let Some(replies) = self.nodes[i].inquiry.as_mut() {
                    replies.push(InquiryReplyInfo { from, leader, hops });
                }
            }
            MessageBody::Hello { cluster } => self.on_hello(i, from, cluster),
            MessageBody::Election { .. } | MessageBody::Ack { .. } | MessageBody::Leader { .. } => {
                self.with_diffusion(i, |st, ctx, cfg| st.on_message(ctx, cfg, from, &body));
            }
            _ => self.metrics.dropped_stale += 1,
        }
    }

    pub(super) fn answer_inquiry(&mut self, i: NodeId, from: NodeId) {
        let node = &self.nodes[i];
        let leader = if node.electing() { None } else { node.leader() };
        let hops = node.monitor.hops;
        self.send(i, from, MessageBody::InquiryReply { leader, hops });
    }

    pub(super) fn elect_recovered(&mut self, i: NodeId) {
        if self.sc.enhancements.inquiry_on_recover {
            self.nodes[i].inquiry = Some(Vec::new());
            self.note("Inquiry", Some(i), String::new);
            self.broadcast(i, MessageBody::Inquiry, None);
            let window = self.sc.inquiry_window();
            self.arm(i, window, Timer::InquiryDone);
        } else {
            self.trigger(i, "recover");
        }
    }

    pub(super) fn inquiry_done(&mut self, i: NodeId) {
        let Some(replies) = self.nodes[i].inquiry.take() else { return };
        match resolve_inquiry(&replies) {
            InquiryResolution::Adopted { leader, hops } => {
                if leader < self.key(i) {
                    self.trigger(i, "outranks-leader");
                } else {
                    self.install(i, leader, hops);
                    self.note("InquiryAdopt", Some(i), || format!("leader={}", leader.uid));
                }
            }
            InquiryResolution::StartElection => self.trigger(i, "inquiry-unanswered"),
        }
    }

    pub(super) fn recluster(&mut self) {
        if self.sc.algorithm != Algorithm::Hierarchy {
            return;
        }
        let cell = self.sc.topology.cell_size();
        for i in 0..self.nodes.len() {
            let c = cluster_of(self.topo.position(i), cell);
            self.clusters[i] = c;
            self.nodes[i].cluster.cluster_id = c;
        }
    }

    pub(super) fn hello_on(&mut self, deltas: &[LinkDelta]) {
        if self.sc.algorithm != Algorithm::Hierarchy {
            return;
        }
        for d in deltas {
            if let LinkDelta::Up(a, b) = *d {
                self.send(a, b, MessageBody::Hello { cluster: self.clusters[a] });
                self.send(b, a, MessageBody::Hello { cluster: self.clusters[b] });
            }
        }
    }

    fn on_hello(&mut self, i: NodeId, from: NodeId, cluster: crate::algorithms::ClusterId) {
        let in_progress = self.nodes[i].diff.in_progress();
        let gating = self.sc.enhancements.join_gating;
        match gate_join_during_election(&mut self.nodes[i].cluster, from, cluster, in_progress, gating) {
            JoinDecision::Accept if in_progress => {
                let acts = self.nodes[i].diff.admit(from);
                self.apply(i, acts);
            }
            JoinDecision::Accept => {}
            JoinDecision::Defer => self.note("HelloDeferred", Some(i), || from.to_string()),
            JoinDecision::Deny => self.note("HelloDenied", Some(i), || from.to_string()),
        }
    }

    fn release_deferred(&mut self, i: NodeId) {
        if self.nodes[i].diff.in_progress() {
            return;
        }
        let waiting = std::mem::take(&mut self.nodes[i].cluster.deferred);
        for s in waiting {
            let c = self.clusters[s];
            gate_join_during_election(&mut self.nodes[i].cluster, s, c, false, true);
            self.note("HelloReleased", Some(i), || s.to_string());
        }
    }
}
