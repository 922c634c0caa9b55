//! Glue for the master/slave rounds, slave participation and invitations.

use super::{MsRecord, Simulator, Timer};
use crate::algorithms::{choose_master, InviteState, MasterSlaveTuple, Piconet};
use crate::election::{CriterionValue, ExchangePhase, MessageBody};
use crate::engine::{NodeId, SimTime};
use rand::Rng;

impl Simulator {
    fn gap(&self) -> u64 {
        self.sc.link.delay_max + 1
    }

    fn current_round(&self) -> u64 {
        self.metrics.ms_rounds.saturating_sub(1)
    }

    pub(super) fn ms_init(&mut self, _keys: &[CriterionValue]) {
        self.layout = self.form_layout();
        for i in 0..self.nodes.len() {
            self.sync_ms_leader(i);
        }
        self.schedule(SimTime(1), super::Event::Round { round: 0, phase: 0 });
    }

    pub(super) fn ms_reform(&mut self) {
        self.layout = self.form_layout();
        let count = self.layout.piconets.len();
        self.note("Piconets", None, || format!("{count} piconets"));
    }

    pub(super) fn ms_fault(&mut self, i: NodeId, recovered: bool) {
        if self.sc.enhancements.invitation {
            if !recovered {
                self.layout.remove_node(i);
            }
        } else {
            self.ms_reform();
        }
    }

    pub(super) fn ms_recovered(&mut self, i: NodeId) {
        self.sync_ms_leader(i);
    }

    fn sync_ms_leader(&mut self, i: NodeId) {
        match self.nodes[i].ms.leader() {
            Some(l) if self.nodes[i].leader() != Some(l) => {
                let hops = self.nodes.len() as u32;
                self.install(i, l, hops);
            }
            Some(_) => {}
            None => self.nodes[i].monitor.clear(),
        }
    }

    fn offer(&mut self, i: NodeId, t: MasterSlaveTuple) {
        let own = self.key(i);
        if self.nodes[i].ms.offer(t, own) {
            self.metrics.ms_last_change_round = Some(self.current_round());
            let t = self.nodes[i].ms.tuple;
            self.note("TupleAdopted", Some(i), || t.to_string());
            self.sync_ms_leader(i);
        }
    }

    pub(super) fn ms_leader_lost(&mut self, i: NodeId) {
        self.metrics.elections_started += 1;
        self.note("ElectionTrigger", Some(i), || "leader-loss".to_string());
        let own = self.key(i);
        self.nodes[i].ms.bump_epoch(own);
        self.metrics.ms_last_change_round = Some(self.current_round());
        self.sync_ms_leader(i);
    }

    pub(super) fn on_round(&mut self, round: u64, phase: u8) {
        let n = self.nodes.len();
        let gap = self.gap();
        match phase {
            0 => {
                self.metrics.ms_rounds = round + 1;
                for nd in self.nodes.iter_mut().filter(|nd| nd.alive) {
                    nd.ms.round_start = nd.ms.tuple;
                    nd.ms.exchanged_with = None;
                }
                if self.sc.enhancements.invitation {
                    for i in 0..n {
                        let nd = &self.nodes[i];
                        if nd.alive && !self.layout.is_master[i] && nd.ms.invite == InviteState::Idle && nd.ms.orphaned(round) {
                            self.invite(i);
                        }
                    }
                }
                let masters: Vec<NodeId> = self.layout.piconets.iter().map(|p| p.master).collect();
                for m in masters {
                    if !self.nodes[m].alive {
                        continue;
                    }
                    let tuple = self.nodes[m].ms.tuple;
                    for s in self.layout.obeying(m, round) {
                        self.send(m, s, MessageBody::TupleExchange { tuple, phase: ExchangePhase::MasterToSlave });
                    }
                }
                if self.sc.enhancements.slave_participation {
                    for s in 0..n {
                        if !self.nodes[s].alive {
                            continue;
                        }
                        let Some(m) = self.layout.schedules[s].obeyed(round) else { continue };
                        let peers: Vec<NodeId> = self.layout.piconet_of(m).map_or(Vec::new(), |p| {
                            p.slaves.iter().copied().filter(|&q| q != s && self.topo.linked(s, q)).collect()
                        });
                        let tuple = self.nodes[s].ms.tuple;
                        for q in peers {
                            self.send(s, q, MessageBody::TupleExchange { tuple, phase: ExchangePhase::Peer });
                        }
                    }
                }
                let at = self.now() + gap;
                self.schedule(at, super::Event::Round { round, phase: 1 });
            }
            1 => {
                for s in 0..n {
                    let nd = &self.nodes[s];
                    if let (true, Some(m)) = (nd.alive, nd.ms.exchanged_with) {
                        let tuple = nd.ms.tuple;
                        self.send(s, m, MessageBody::TupleExchange { tuple, phase: ExchangePhase::SlaveToMaster });
                    }
                }
                let at = self.now() + gap;
                self.schedule(at, super::Event::Round { round, phase: 2 });
            }
            _ => {
                let masters: Vec<NodeId> = self.layout.piconets.iter().map(|p| p.master).collect();
                for m in masters {
                    let nd = &self.nodes[m];
                    if !nd.alive || nd.ms.tuple == nd.ms.round_start {
                        continue;
                    }
                    let tuple = nd.ms.tuple;
                    for s in self.layout.obeying(m, round) {
                        self.ms_log.push(MsRecord { round, from: m, to: s, broadcast: true, tuple, fresh: true });
                        self.send(m, s, MessageBody::TupleBroadcast { tuple });
                    }
                }
                let next = self.now() + (self.sc.round_period() - 2 * gap);
                self.schedule(next, super::Event::Round { round: round + 1, phase: 0 });
            }
        }
    }

    pub(super) fn ms_message(&mut self, i: NodeId, from: NodeId, body: MessageBody) {
        let round = self.current_round();
        match body {
            MessageBody::Heartbeat { leader, beat, hops, candidates } => {
                self.on_heartbeat(i, from, leader, beat, hops, candidates)
            }
            MessageBody::TupleExchange { tuple, phase: ExchangePhase::MasterToSlave } => {
                let ms = &mut self.nodes[i].ms;
                ms.exchanged_with = Some(from);
                ms.last_contact = Some(round);
                ms.invite = InviteState::Idle;
                self.offer(i, tuple);
            }
            MessageBody::TupleExchange { tuple, phase: ExchangePhase::SlaveToMaster } => {
                if self.layout.is_master[i] {
                    let fresh = self.nodes[i].ms.round_start != tuple;
                    self.ms_log.push(MsRecord { round, from, to: i, broadcast: false, tuple, fresh });
                    self.offer(i, tuple);
                }
            }
            MessageBody::TupleExchange { tuple, phase: ExchangePhase::Peer } => self.offer(i, tuple),
            MessageBody::TupleBroadcast { tuple } => {
                self.nodes[i].ms.last_contact = Some(round);
                self.offer(i, tuple);
            }
            MessageBody::Invitation { choose: None } => {
                if self.nodes[i].aspirant {
                    let criterion = self.key(i);
                    self.send(i, from, MessageBody::Candidacy { criterion });
                }
            }
            MessageBody::Invitation { choose: Some(m) } => {
                if m == i && self.topo.linked(i, from) {
                    let mut slaves = self.layout.piconet_of(i).map(|p| p.slaves.clone()).unwrap_or_default();
                    slaves.insert(from);
                    self.layout.add_piconet(Piconet { master: i, slaves });
                    self.note("BecameMaster", Some(i), || format!("invited by {from}"));
                }
            }
            MessageBody::Candidacy { criterion } => {
                if let InviteState::Collecting { replies } = &mut self.nodes[i].ms.invite {
                    replies.push((from, criterion));
                }
            }
            _ => self.metrics.dropped_stale += 1,
        }
    }

    pub(super) fn invite(&mut self, i: NodeId) {
        if matches!(self.nodes[i].ms.invite, InviteState::Collecting { .. }) {
            return;
        }
        self.nodes[i].ms.invite = InviteState::Collecting { replies: Vec::new() };
        self.note("Invite", Some(i), String::new);
        self.broadcast(i, MessageBody::Invitation { choose: None }, None);
        let window = 2 * self.sc.link.delay_max + 1;
        self.arm(i, window, Timer::InviteDone);
    }

    pub(super) fn invite_done(&mut self, i: NodeId) {
        let InviteState::Collecting { replies } = std::mem::take(&mut self.nodes[i].ms.invite) else { return };
        match choose_master(&replies) {
            Some(m) => {
                self.nodes[i].ms.last_contact = Some(self.current_round());
                self.broadcast(i, MessageBody::Invitation { choose: Some(m) }, None);
            }
            None => {
                // A piconet needs two nodes; wait and ask again.
                self.nodes[i].ms.invite = InviteState::Waiting;
                let p = self.sc.round_period();
                let delay = self.rng.backoff.random_range(p..=2 * p);
                self.arm(i, delay, Timer::Invite);
            }
        }
    }

    pub(super) fn ms_invite_timer(&mut self, i: NodeId) {
        let round = self.current_round();
        if self.nodes[i].ms.invite == InviteState::Waiting && self.nodes[i].ms.orphaned(round) {
            self.nodes[i].ms.invite = InviteState::Idle;
            self.invite(i);
        } else if self.nodes[i].ms.invite == InviteState::Waiting {
            self.nodes[i].ms.invite = InviteState::Idle;
        }
    }
}
