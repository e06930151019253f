//! The deterministic event loop and everything that runs on it: the
//! three-phase go/return/information broadcast, the flooding baseline, and
//! the full membership life cycle (churn, proofs of life, access control,
//! pruning) when a scenario is attached.
//!
//! Determinism: all randomness flows through one seeded generator, events
//! fire in (time, sequence) order, and every collection that influences
//! behavior iterates in key order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::VertexId;
use crate::protocol::{
    apply_replay, apply_update, handle_access_control, handle_insertion, next_vertex_id,
    proof_of_life_tick, prune_dead_nodes, update_threshold, AccessOutcome, InsertionOutcome,
    LifeState, NodeRecord, ProtocolError, Quorum, RejectReason, ThresholdT, UpdateEvent,
    UpdateKind,
};

use super::event::{EventKind, EventQueue, Timer, TxMode};
use super::mobility::{step_mobility, Arena, MobilityState};
use super::packet::{Packet, PacketKind, Purpose, HEADER_BYTES};
use super::radio::{link_count, neighbors, RadioModel};
use super::trace::{TraceEvent, TraceRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("node {0} is not part of the simulation")]
    UnknownNode(VertexId),
    #[error("node {0} is not an online legitimate member")]
    InitiatorNotLegitimate(VertexId),
    #[error("lifecycle already attached")]
    LifecycleAlreadyAttached,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Transport-level knobs.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub radio: RadioModel,
    pub speed_range: (f64, f64),
    /// Airtime per hop.
    pub hop_latency: f64,
    /// Per-node handling delay before a received packet is acted on.
    pub processing_delay: f64,
    /// Bernoulli loss applied to broadcast-session transmissions.
    pub loss_prob: f64,
    pub mobility_dt: f64,
    /// `true`: a relay with nothing new to cover stays quiet (the
    /// optimized broadcast). `false`: every first receipt retransmits.
    pub suppressed: bool,
    pub seed: u64,
}

impl EngineConfig {
    pub fn static_topology(range: f64, width: f64, height: f64, seed: u64) -> Self {
        Self {
            radio: RadioModel {
                range,
                arena: Arena { width, height },
            },
            speed_range: (0.0, 0.0),
            hop_latency: 0.010,
            processing_delay: 0.002,
            loss_prob: 0.0,
            mobility_dt: 1.0,
            suppressed: true,
            seed,
        }
    }

    /// Response timer covering a full gather round trip with margin.
    pub fn default_response_timer(&self) -> f64 {
        let d = self.radio.diameter_estimate() as f64;
        3.0 * d * (self.hop_latency + self.processing_delay)
    }
}

/// Life-cycle knobs attached on top of the transport.
#[derive(Debug, Clone)]
pub struct LifecycleConfig {
    pub nodes: usize,
    /// Mean degree 2m/n of the secret graph.
    pub graph_degree: usize,
    pub n_min: usize,
    pub zkp_rounds: usize,
    /// Base proof-of-life period; the adaptive threshold starts at three
    /// times this.
    pub pol_period: f64,
    pub epsilon: f64,
    /// Per-second probability that a new supplicant shows up.
    pub insert_prob: f64,
    /// Per-second probability that one member powers off.
    pub delete_prob: f64,
}

impl LifecycleConfig {
    pub fn initial_threshold(&self) -> f64 {
        3.0 * self.pol_period
    }

    pub fn retention(&self, threshold: f64) -> f64 {
        threshold.max(2.0 * self.pol_period)
    }

    pub fn edge_target(&self) -> usize {
        self.nodes * self.graph_degree / 2
    }
}

/// Result of one go/return/information broadcast.
#[derive(Debug, Clone)]
pub struct GriResult {
    pub initiator: VertexId,
    /// Nodes gathered in the return phase (the initiator not included).
    pub roster: BTreeSet<VertexId>,
    pub packets_go: usize,
    pub packets_return: usize,
    pub packets_info: usize,
    /// `true` when every branch reported before the response timer.
    pub completed: bool,
    /// Hop trails of the return packets that reached the initiator.
    pub initiator_trails: Vec<Vec<VertexId>>,
}

impl GriResult {
    /// Transmissions in the broadcast phases (go plus information); the
    /// directed return responses are reported separately.
    pub fn broadcast_packets(&self) -> usize {
        self.packets_go + self.packets_info
    }

    pub fn total_packets(&self) -> usize {
        self.packets_go + self.packets_return + self.packets_info
    }
}

/// Running totals over every transmission the engine performed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PacketCounters {
    /// Every transmission (originated plus forwarded).
    pub generated: usize,
    pub originated: usize,
    pub forwarded: usize,
    /// Transmissions that reached at least one live receiver.
    pub delivered: usize,
    /// Transmissions lost or sent with nobody new in range.
    pub dropped: usize,
    /// Transmissions whose every scheduled receiver was gone on landing.
    pub expired: usize,
}

impl PacketCounters {
    pub fn conserved(&self) -> bool {
        self.generated == self.delivered + self.dropped + self.expired
            && self.generated == self.originated + self.forwarded
    }
}

struct SimNode {
    mobility: MobilityState,
    online: bool,
    record: Option<NodeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Gather,
    Info,
    Done,
}

/// What the initiator does once the roster is gathered.
enum FollowUp {
    /// Plain broadcast: rebroadcast the roster, nothing else.
    None,
    /// Quorum-check the proofs, prune the silent, commit the roster.
    PolCommit,
    /// Quorum-check the answers and commit the insertion.
    InsertionCommit { supplicant: VertexId },
}

enum InfoPayload {
    Roster,
    PolCommit {
        stamp: f64,
        roster_event: UpdateEvent,
        deletions: Vec<UpdateEvent>,
    },
    InsertionCommit {
        event: UpdateEvent,
    },
}

impl InfoPayload {
    fn size(&self, purpose: Purpose, roster_len: usize) -> u32 {
        match self {
            InfoPayload::Roster => HEADER_BYTES + roster_len as u32 * purpose.roster_entry_bytes(),
            InfoPayload::PolCommit { deletions, roster_event, .. } => {
                let roster = match &roster_event.kind {
                    UpdateKind::ProofOfLife { roster, .. } => roster.len(),
                    _ => roster_len,
                };
                HEADER_BYTES + roster as u32 * 64 + deletions.len() as u32 * 8 + 8
            }
            InfoPayload::InsertionCommit { event } => {
                let members = match &event.kind {
                    UpdateKind::Insertion { members, .. } => members.len(),
                    _ => 0,
                };
                HEADER_BYTES + members as u32 * 8 + 24
            }
        }
    }
}

struct GriSession {
    initiator: VertexId,
    purpose: Purpose,
    phase: Phase,
    covered: BTreeSet<VertexId>,
    parent: BTreeMap<VertexId, VertexId>,
    pending_children: BTreeMap<VertexId, usize>,
    collected: BTreeMap<VertexId, BTreeSet<VertexId>>,
    trails: BTreeMap<VertexId, Vec<VertexId>>,
    roster: BTreeSet<VertexId>,
    packets_go: usize,
    packets_return: usize,
    packets_info: usize,
    completed: bool,
    info_covered: BTreeSet<VertexId>,
    info_payload: InfoPayload,
    initiator_trails: Vec<Vec<VertexId>>,
    follow_up: FollowUp,
    /// Scheduled transmissions and deliveries not yet resolved.
    in_flight: usize,
}

struct FloodSession {
    covered: BTreeSet<VertexId>,
    transmissions: usize,
    in_flight: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AcVerdict {
    Accept,
    RejectExpired,
    RejectIsolated,
}

struct PendingAccess {
    verdict: AcVerdict,
    authenticator: VertexId,
    observed_offline: f64,
}

struct PendingJoin {
    graph: crate::graph::NetworkGraph,
    cycle: crate::graph::HamiltonianCycle,
}

struct Lifecycle {
    cfg: LifecycleConfig,
    threshold: ThresholdT,
    active_session: Option<u64>,
    pol_defer_pending: BTreeSet<VertexId>,
    last_pol_start: f64,
    pending_access: BTreeMap<VertexId, PendingAccess>,
    pending_joins: BTreeMap<VertexId, PendingJoin>,
    /// Nodes pinned by an in-flight session; churn leaves them alone.
    busy: BTreeSet<VertexId>,
    /// Expired supplicants waiting to be pruned; no more attempts.
    gave_up: BTreeSet<VertexId>,
    insertions: usize,
    deletions: usize,
    access_controls: usize,
    terminated: bool,
}

struct TxOutcome {
    remaining: usize,
    any_delivered: bool,
}

pub struct Engine {
    cfg: EngineConfig,
    now: f64,
    queue: EventQueue,
    nodes: BTreeMap<VertexId, SimNode>,
    gri: BTreeMap<u64, GriSession>,
    gri_results: BTreeMap<u64, GriResult>,
    floods: BTreeMap<u64, FloodSession>,
    flood_results: BTreeMap<u64, usize>,
    next_session: u64,
    next_packet: u64,
    next_tx: u64,
    tx_outcomes: BTreeMap<u64, TxOutcome>,
    rng: ChaCha8Rng,
    trace: Vec<TraceRecord>,
    counters: PacketCounters,
    lifecycle: Option<Lifecycle>,
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Self {
            cfg,
            now: 0.0,
            queue: EventQueue::new(),
            nodes: BTreeMap::new(),
            gri: BTreeMap::new(),
            gri_results: BTreeMap::new(),
            floods: BTreeMap::new(),
            flood_results: BTreeMap::new(),
            next_session: 1,
            next_packet: 1,
            next_tx: 1,
            tx_outcomes: BTreeMap::new(),
            rng,
            trace: Vec::new(),
            counters: PacketCounters::default(),
            lifecycle: None,
        }
    }

    /// A static engine over explicit positions; every node is treated as
    /// an online legitimate member.
    pub fn with_topology(cfg: EngineConfig, positions: &[(VertexId, (f64, f64))]) -> Self {
        let mut engine = Self::new(cfg);
        for &(id, position) in positions {
            engine.nodes.insert(
                id,
                SimNode {
                    mobility: MobilityState {
                        position,
                        waypoint: position,
                        speed: 0.0,
                    },
                    online: true,
                    record: None,
                },
            );
        }
        engine
    }

    /// Builds the founding network at random positions and schedules the
    /// protocol clockwork.
    pub fn init_lifecycle(&mut self, lc: LifecycleConfig) -> Result<(), SimError> {
        if self.lifecycle.is_some() {
            return Err(SimError::LifecycleAlreadyAttached);
        }
        let ids: BTreeSet<VertexId> = (1..=lc.nodes as u32)
            .map(|i| VertexId::new(i).expect("positive"))
            .collect();
        let threshold = ThresholdT::new(lc.initial_threshold(), lc.epsilon);
        let records = crate::protocol::initialize_network(
            &ids,
            lc.edge_target(),
            lc.n_min,
            lc.retention(threshold.current()),
            &mut self.rng,
        )?;
        for (id, record) in records {
            let mobility =
                MobilityState::new(&self.cfg.radio.arena, self.cfg.speed_range, &mut self.rng);
            self.nodes.insert(
                id,
                SimNode {
                    mobility,
                    online: true,
                    record: Some(record),
                },
            );
        }
        self.trace.push(TraceRecord {
            time: 0.0,
            event: TraceEvent::Proto,
            node: 0,
            packet_kind: None,
            packet_id: 0,
            size: 0,
            extra: format!(
                "op=meta,nodes={},proc={:.6}",
                lc.nodes, self.cfg.processing_delay
            ),
        });
        self.lifecycle = Some(Lifecycle {
            cfg: lc,
            threshold,
            active_session: None,
            pol_defer_pending: BTreeSet::new(),
            last_pol_start: -1.0,
            pending_access: BTreeMap::new(),
            pending_joins: BTreeMap::new(),
            busy: BTreeSet::new(),
            gave_up: BTreeSet::new(),
            insertions: 0,
            deletions: 0,
            access_controls: 0,
            terminated: false,
        });
        self.queue
            .push(self.cfg.mobility_dt, EventKind::MobilityUpdate);
        self.queue
            .push(1.0, EventKind::TimerExpiry(Timer::ProtocolTick));
        Ok(())
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn counters(&self) -> PacketCounters {
        self.counters
    }

    pub fn record(&self, id: VertexId) -> Option<&NodeRecord> {
        self.nodes.get(&id).and_then(|n| n.record.as_ref())
    }

    pub fn records(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.values().filter_map(|n| n.record.as_ref())
    }

    pub fn threshold(&self) -> Option<f64> {
        self.lifecycle.as_ref().map(|lc| lc.threshold.current())
    }

    pub fn lifecycle_counts(&self) -> Option<(usize, usize, usize)> {
        self.lifecycle
            .as_ref()
            .map(|lc| (lc.insertions, lc.deletions, lc.access_controls))
    }

    pub fn terminated(&self) -> bool {
        self.lifecycle.as_ref().is_some_and(|lc| lc.terminated)
    }

    /// Processes every event with time <= `until` and advances the clock.
    /// Returns the trace records appended along the way.
    pub fn advance(&mut self, until: f64) -> &[TraceRecord] {
        let mark = self.trace.len();
        while let Some(t) = self.queue.peek_time() {
            if t > until {
                break;
            }
            self.step();
        }
        if self.now < until {
            self.now = until;
        }
        &self.trace[mark..]
    }

    fn step(&mut self) {
        let Some(event) = self.queue.pop() else {
            return;
        };
        debug_assert!(event.time >= self.now - 1e-9, "time went backwards");
        self.now = event.time;
        match event.kind {
            EventKind::MobilityUpdate => self.on_mobility(),
            EventKind::Transmit { packet, mode } => self.on_transmit(packet, mode),
            EventKind::PacketDelivery {
                packet,
                to,
                tx_id,
                route_rest,
            } => self.on_delivery(packet, to, tx_id, route_rest),
            EventKind::TimerExpiry(timer) => self.on_timer(timer),
            EventKind::PowerToggle { node, on } => self.on_power(node, on),
        }
    }

    // ------------------------------------------------------------------
    // Radio and membership helpers
    // ------------------------------------------------------------------

    fn positions_online(&self) -> BTreeMap<VertexId, (f64, f64)> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.online)
            .map(|(&id, n)| (id, n.mobility.position))
            .collect()
    }

    /// Online nodes that run the relay stack: members of the network, or
    /// everyone when no lifecycle is attached. Nodes mid-authentication
    /// look off to network effects.
    fn participates(&self, id: VertexId) -> bool {
        let Some(node) = self.nodes.get(&id) else {
            return false;
        };
        if !node.online {
            return false;
        }
        match (&self.lifecycle, &node.record) {
            (None, _) => true,
            (Some(_), Some(record)) => matches!(
                record.state,
                LifeState::OnAuthenticated
                    | LifeState::Added
                    | LifeState::ReInserted
                    | LifeState::OutOfService
            ),
            (Some(_), None) => false,
        }
    }

    fn participant_neighbors(&self, of: VertexId) -> Vec<VertexId> {
        let Some(node) = self.nodes.get(&of) else {
            return Vec::new();
        };
        let p = node.mobility.position;
        self.nodes
            .iter()
            .filter(|(&id, n)| {
                id != of && n.online && self.cfg.radio.linked(p, n.mobility.position)
            })
            .map(|(&id, _)| id)
            .filter(|&id| self.participates(id))
            .collect()
    }

    fn is_legitimate_online(&self, id: VertexId) -> bool {
        match self.nodes.get(&id) {
            None => false,
            Some(n) if !n.online => false,
            Some(n) => match (&self.lifecycle, &n.record) {
                (None, _) => true,
                (Some(_), Some(r)) => r.state == LifeState::OnAuthenticated,
                (Some(_), None) => false,
            },
        }
    }

    // ------------------------------------------------------------------
    // Trace helpers
    // ------------------------------------------------------------------

    fn emit_packet(&mut self, event: TraceEvent, node: VertexId, packet: &Packet, extra: String) {
        self.trace.push(TraceRecord {
            time: self.now,
            event,
            node: node.get(),
            packet_kind: Some(packet.kind),
            packet_id: packet.id,
            size: packet.size,
            extra,
        });
    }

    fn emit_state(&mut self, node: VertexId, to: LifeState) {
        self.trace.push(TraceRecord {
            time: self.now,
            event: TraceEvent::State,
            node: node.get(),
            packet_kind: None,
            packet_id: 0,
            size: 0,
            extra: format!("to={to}"),
        });
    }

    fn emit_proto(&mut self, node: u32, extra: String) {
        self.trace.push(TraceRecord {
            time: self.now,
            event: TraceEvent::Proto,
            node,
            packet_kind: None,
            packet_id: 0,
            size: 0,
            extra,
        });
    }

    // ------------------------------------------------------------------
    // Transmission core
    // ------------------------------------------------------------------

    fn fresh_packet_id(&mut self) -> u64 {
        let id = self.next_packet;
        self.next_packet += 1;
        id
    }

    /// Puts a packet on the air right now towards `targets`: trace record,
    /// loss roll, delivery scheduling, outcome bookkeeping. Returns how
    /// many deliveries were scheduled.
    fn do_transmit(
        &mut self,
        packet: &Packet,
        targets: &[VertexId],
        route_rest: &[VertexId],
        lossy: bool,
    ) -> usize {
        let is_relay = packet.src != packet.origin;
        self.counters.generated += 1;
        if is_relay {
            self.counters.forwarded += 1;
        } else {
            self.counters.originated += 1;
        }
        let event = if is_relay { TraceEvent::Fwd } else { TraceEvent::Tx };
        let extra = format!("purpose={}", packet.purpose.as_str());
        self.emit_packet(event, packet.src, packet, extra);

        let lost = lossy && self.cfg.loss_prob > 0.0 && self.rng.gen_bool(self.cfg.loss_prob);
        if lost || targets.is_empty() {
            self.counters.dropped += 1;
            let reason = if lost { "lost" } else { "no-receivers" };
            self.emit_packet(TraceEvent::Drop, packet.src, packet, format!("reason={reason}"));
            return 0;
        }

        let tx_id = self.next_tx;
        self.next_tx += 1;
        self.tx_outcomes.insert(
            tx_id,
            TxOutcome {
                remaining: targets.len(),
                any_delivered: false,
            },
        );
        let land = self.now + self.cfg.hop_latency;
        for &to in targets {
            let mut copy = packet.clone();
            copy.dst = Some(to);
            self.queue.push(
                land,
                EventKind::PacketDelivery {
                    packet: copy,
                    to,
                    tx_id,
                    route_rest: route_rest.to_vec(),
                },
            );
        }
        targets.len()
    }

    fn session_in_flight_add(&mut self, session: u64, n: usize) {
        if session != 0 {
            if let Some(sess) = self.gri.get_mut(&session) {
                sess.in_flight += n;
            }
        }
    }

    fn session_in_flight_sub(&mut self, session: u64, n: usize) {
        if session != 0 {
            if let Some(sess) = self.gri.get_mut(&session) {
                sess.in_flight = sess.in_flight.saturating_sub(n);
            }
        }
    }

    // ------------------------------------------------------------------
    // Event handlers
    // ------------------------------------------------------------------

    fn on_mobility(&mut self) {
        let arena = self.cfg.radio.arena;
        let speed_range = self.cfg.speed_range;
        let dt = self.cfg.mobility_dt;
        let ids: Vec<VertexId> = self.nodes.keys().copied().collect();
        for id in ids {
            if let Some(node) = self.nodes.get_mut(&id) {
                node.mobility =
                    step_mobility(&node.mobility, &arena, speed_range, dt, &mut self.rng);
            }
        }
        if self.lifecycle.is_some() {
            let adj = neighbors(&self.cfg.radio, &self.positions_online());
            let links = link_count(&adj);
            self.trace.push(TraceRecord {
                time: self.now,
                event: TraceEvent::Links,
                node: 0,
                packet_kind: None,
                packet_id: 0,
                size: 0,
                extra: format!("count={links}"),
            });
            self.queue
                .push(self.now + dt, EventKind::MobilityUpdate);
        }
    }

    fn on_transmit(&mut self, packet: Packet, mode: TxMode) {
        match mode {
            TxMode::SessionBroadcast { session } => self.on_session_broadcast_tx(session, packet),
            TxMode::FloodRelay { flood } => self.on_flood_tx(flood, packet),
            TxMode::Unicast { route_rest } => self.on_unicast_tx(packet, route_rest),
        }
    }

    /// Go/info forwarding inside a session. Suppression, coverage marking,
    /// and phase counters all resolve here, atomically at send time.
    fn on_session_broadcast_tx(&mut self, sid: u64, packet: Packet) {
        let nbrs = self.participant_neighbors(packet.src);
        let suppressed = self.cfg.suppressed;
        enum Decision {
            Quiet,
            Send { targets: Vec<VertexId> },
        }
        let decision;
        let gather_phase;
        {
            let Some(sess) = self.gri.get_mut(&sid) else {
                return;
            };
            sess.in_flight = sess.in_flight.saturating_sub(1);
            gather_phase = sess.phase == Phase::Gather;
            let is_init = packet.src == sess.initiator;
            let covered = match packet.kind {
                PacketKind::GriGo => &mut sess.covered,
                PacketKind::GriInfo => &mut sess.info_covered,
                _ => unreachable!("session broadcast is go or info"),
            };
            let targets: Vec<VertexId> = nbrs
                .iter()
                .copied()
                .filter(|v| !covered.contains(v))
                .collect();
            if targets.is_empty() && suppressed && !is_init {
                decision = Decision::Quiet;
            } else {
                for &t in &targets {
                    covered.insert(t);
                }
                if packet.kind == PacketKind::GriGo {
                    for &t in &targets {
                        sess.parent.insert(t, packet.src);
                    }
                    *sess.pending_children.entry(packet.src).or_insert(0) += targets.len();
                    sess.packets_go += 1;
                } else {
                    sess.packets_info += 1;
                }
                decision = Decision::Send { targets };
            }
        }
        match decision {
            Decision::Quiet => {
                if packet.kind == PacketKind::GriGo && gather_phase {
                    self.node_becomes_leaf(sid, packet.src);
                }
            }
            Decision::Send { targets } => {
                let scheduled = self.do_transmit(&packet, &targets, &[], true);
                self.session_in_flight_add(sid, scheduled);
                if packet.kind == PacketKind::GriGo && targets.is_empty() && gather_phase {
                    // Transmitted into a fully covered neighborhood: a leaf
                    // in the unsuppressed mode, or the isolated initiator.
                    self.node_becomes_leaf(sid, packet.src);
                }
            }
        }
        self.check_session_done(sid);
    }

    fn on_flood_tx(&mut self, fid: u64, packet: Packet) {
        let nbrs = self.participant_neighbors(packet.src);
        let targets;
        {
            let Some(flood) = self.floods.get_mut(&fid) else {
                return;
            };
            flood.in_flight = flood.in_flight.saturating_sub(1);
            let t: Vec<VertexId> = nbrs
                .iter()
                .copied()
                .filter(|v| !flood.covered.contains(v))
                .collect();
            for &v in &t {
                flood.covered.insert(v);
            }
            flood.transmissions += 1;
            targets = t;
        }
        let scheduled = self.do_transmit(&packet, &targets, &[], true);
        if let Some(flood) = self.floods.get_mut(&fid) {
            flood.in_flight += scheduled;
        }
        self.check_flood_done(fid);
    }

    fn on_unicast_tx(&mut self, packet: Packet, route_rest: Vec<VertexId>) {
        let Some(dst) = packet.dst else {
            return;
        };
        let alive = self
            .nodes
            .get(&dst)
            .map(|n| n.online)
            .unwrap_or(false);
        if packet.kind == PacketKind::GriReturn {
            if let Some(sess) = self.gri.get_mut(&packet.session) {
                sess.in_flight = sess.in_flight.saturating_sub(1);
                sess.packets_return += 1;
            }
        }
        let lossy = packet.kind == PacketKind::GriReturn;
        let targets = if alive { vec![dst] } else { Vec::new() };
        let scheduled = self.do_transmit(&packet, &targets, &route_rest, lossy);
        if packet.kind == PacketKind::GriReturn {
            self.session_in_flight_add(packet.session, scheduled);
            self.check_session_done(packet.session);
        }
    }

    fn on_delivery(
        &mut self,
        packet: Packet,
        to: VertexId,
        tx_id: u64,
        route_rest: Vec<VertexId>,
    ) {
        let alive = self
            .nodes
            .get(&to)
            .map(|n| n.online)
            .unwrap_or(false);
        let mut tx_done = None;
        if let Some(outcome) = self.tx_outcomes.get_mut(&tx_id) {
            outcome.remaining -= 1;
            outcome.any_delivered |= alive;
            if outcome.remaining == 0 {
                tx_done = self.tx_outcomes.remove(&tx_id);
            }
        }
        if let Some(outcome) = tx_done {
            if outcome.any_delivered {
                self.counters.delivered += 1;
            } else {
                // Every scheduled receiver was gone on landing: the whole
                // transmission expired (one record per transmission, so
                // lost never outruns generated).
                self.counters.expired += 1;
                self.emit_packet(TraceEvent::Expire, packet.src, &packet, String::new());
            }
        }
        let session = packet.session;
        if session != 0 {
            self.session_in_flight_sub(session, 1);
            if let Some(flood) = self.floods.get_mut(&session) {
                flood.in_flight = flood.in_flight.saturating_sub(1);
            }
        }

        if alive {
            let delay = self.now - packet.created_at;
            let extra = format!("purpose={},delay={:.6}", packet.purpose.as_str(), delay);
            self.emit_packet(TraceEvent::Rx, to, &packet, extra);

            match packet.kind {
                PacketKind::GriGo => self.on_go_delivered(packet, to),
                PacketKind::GriReturn => self.on_return_delivered(packet, to),
                PacketKind::GriInfo => self.on_info_delivered(packet, to),
                PacketKind::Flood => self.on_flood_delivered(packet, to),
                PacketKind::ZkpMsg | PacketKind::InsertionMsg => {
                    self.on_unicast_delivered(packet, to, route_rest)
                }
            }
        }
        if session != 0 {
            self.check_session_done(session);
            self.check_flood_done(session);
        }
    }

    fn on_go_delivered(&mut self, packet: Packet, to: VertexId) {
        let sid = packet.session;
        let Some(sess) = self.gri.get(&sid) else {
            return;
        };
        if sess.phase != Phase::Gather {
            return;
        }
        // The node intends to forward; suppression resolves at send time.
        let mut relay = packet.clone();
        relay.src = to;
        self.session_in_flight_add(sid, 1);
        self.queue.push(
            self.now + self.cfg.processing_delay,
            EventKind::Transmit {
                packet: relay,
                mode: TxMode::SessionBroadcast { session: sid },
            },
        );
    }

    fn node_becomes_leaf(&mut self, sid: u64, node: VertexId) {
        let is_initiator = {
            let Some(sess) = self.gri.get(&sid) else {
                return;
            };
            sess.initiator == node
        };
        let no_children = self
            .gri
            .get(&sid)
            .and_then(|s| s.pending_children.get(&node))
            .copied()
            .unwrap_or(0)
            == 0;
        if !no_children {
            // Children will report; the return is sent once they do.
            return;
        }
        if is_initiator {
            self.finalize_session(sid, true);
        } else {
            self.schedule_return(sid, node, self.now);
        }
    }

    fn schedule_return(&mut self, sid: u64, node: VertexId, at: f64) {
        let packet = {
            let Some(sess) = self.gri.get_mut(&sid) else {
                return;
            };
            let Some(&parent) = sess.parent.get(&node) else {
                return;
            };
            let mut roster: BTreeSet<VertexId> =
                sess.collected.get(&node).cloned().unwrap_or_default();
            roster.insert(node);
            let mut trail = sess.trails.get(&node).cloned().unwrap_or_default();
            trail.push(node);
            let size = HEADER_BYTES + roster.len() as u32 * sess.purpose.roster_entry_bytes();
            sess.in_flight += 1;
            Packet {
                id: 0, // assigned below
                kind: PacketKind::GriReturn,
                purpose: sess.purpose,
                src: node,
                origin: node,
                dst: Some(parent),
                session: sid,
                hop_trail: trail,
                roster,
                size,
                created_at: at,
            }
        };
        let mut packet = packet;
        packet.id = self.fresh_packet_id();
        self.queue.push(
            at,
            EventKind::Transmit {
                packet,
                mode: TxMode::Unicast { route_rest: Vec::new() },
            },
        );
    }

    fn on_return_delivered(&mut self, packet: Packet, to: VertexId) {
        let sid = packet.session;
        enum Next {
            Nothing,
            Finalize,
            SendUp,
        }
        let next;
        {
            let Some(sess) = self.gri.get_mut(&sid) else {
                return;
            };
            if sess.phase != Phase::Gather {
                return;
            }
            sess.collected
                .entry(to)
                .or_default()
                .extend(packet.roster.iter().copied());
            sess.trails
                .entry(to)
                .or_default()
                .extend(packet.hop_trail.iter().copied());
            if to == sess.initiator {
                sess.initiator_trails.push(packet.hop_trail.clone());
            }
            let pending = sess.pending_children.entry(to).or_insert(0);
            *pending = pending.saturating_sub(1);
            next = if *pending == 0 {
                if to == sess.initiator {
                    Next::Finalize
                } else {
                    Next::SendUp
                }
            } else {
                Next::Nothing
            };
        }
        match next {
            Next::Nothing => {}
            Next::Finalize => self.finalize_session(sid, true),
            Next::SendUp => {
                self.schedule_return(sid, to, self.now + self.cfg.processing_delay)
            }
        }
    }

    fn on_flood_delivered(&mut self, packet: Packet, to: VertexId) {
        let fid = packet.session;
        if !self.floods.contains_key(&fid) {
            return;
        }
        let mut relay = packet.clone();
        relay.src = to;
        if let Some(flood) = self.floods.get_mut(&fid) {
            flood.in_flight += 1;
        }
        self.queue.push(
            self.now + self.cfg.processing_delay,
            EventKind::Transmit {
                packet: relay,
                mode: TxMode::FloodRelay { flood: fid },
            },
        );
    }

    fn on_unicast_delivered(&mut self, packet: Packet, to: VertexId, route_rest: Vec<VertexId>) {
        if let Some((&next_hop, rest)) = route_rest.split_first() {
            let mut relay = packet.clone();
            relay.src = to;
            relay.dst = Some(next_hop);
            let rest = rest.to_vec();
            self.queue.push(
                self.now + self.cfg.processing_delay,
                EventKind::Transmit {
                    packet: relay,
                    mode: TxMode::Unicast { route_rest: rest },
                },
            );
            return;
        }
        if packet.kind == PacketKind::InsertionMsg {
            self.materialize_join(to);
        }
    }

    /// The supplicant has its copy of the new graph (openly) and the new
    /// cycle (over the secure channel): it becomes a member.
    fn materialize_join(&mut self, supplicant: VertexId) {
        let Some(lc) = self.lifecycle.as_mut() else {
            return;
        };
        let Some(join) = lc.pending_joins.remove(&supplicant) else {
            return;
        };
        let retention = lc.cfg.retention(lc.threshold.current());
        let stage = join.graph.stage();
        let record = NodeRecord {
            id: supplicant,
            state: LifeState::Added,
            graph: join.graph,
            cycle: Some(join.cycle),
            last_seen_stage: stage,
            went_off_at: None,
            last_proof_at: self.now,
            last_service: None,
            fifo: crate::protocol::UpdateQueue::starting_at(retention, stage),
        };
        if let Some(node) = self.nodes.get_mut(&supplicant) {
            node.record = Some(record);
        }
        self.emit_state(supplicant, LifeState::Added);
    }

    fn on_info_delivered(&mut self, packet: Packet, to: VertexId) {
        let sid = packet.session;
        self.apply_info_payload(sid, to);
        let Some(sess) = self.gri.get(&sid) else {
            return;
        };
        if sess.phase != Phase::Info {
            return;
        }
        let mut relay = packet.clone();
        relay.src = to;
        self.session_in_flight_add(sid, 1);
        self.queue.push(
            self.now + self.cfg.processing_delay,
            EventKind::Transmit {
                packet: relay,
                mode: TxMode::SessionBroadcast { session: sid },
            },
        );
    }

    /// Applies the information payload to one receiving member: queue the
    /// roster, replay the carried updates in stage order, resynchronize the
    /// local clock. A stage gap means this node missed an earlier update
    /// and is no longer in sync; it gets flagged out-of-service.
    fn apply_info_payload(&mut self, sid: u64, to: VertexId) {
        enum Todo {
            Nothing,
            Pol {
                stamp: f64,
                roster_event: UpdateEvent,
                deletions: Vec<UpdateEvent>,
            },
            Insertion {
                event: UpdateEvent,
            },
        }
        let todo = {
            let Some(sess) = self.gri.get(&sid) else {
                return;
            };
            match &sess.info_payload {
                InfoPayload::Roster => Todo::Nothing,
                InfoPayload::PolCommit {
                    stamp,
                    roster_event,
                    deletions,
                } => Todo::Pol {
                    stamp: *stamp,
                    roster_event: roster_event.clone(),
                    deletions: deletions.clone(),
                },
                InfoPayload::InsertionCommit { event } => Todo::Insertion {
                    event: event.clone(),
                },
            }
        };
        let mut demote = false;
        {
            let Some(node) = self.nodes.get_mut(&to) else {
                return;
            };
            let Some(record) = node.record.as_mut() else {
                return;
            };
            match todo {
                Todo::Nothing => {}
                Todo::Pol {
                    stamp,
                    roster_event,
                    deletions,
                } => {
                    record.fifo.push(roster_event);
                    for ev in deletions {
                        demote |= apply_event_guarded(record, &ev);
                    }
                    record.last_proof_at = stamp;
                }
                Todo::Insertion { event } => {
                    demote |= apply_event_guarded(record, &event);
                }
            }
            if demote && record.state == LifeState::OnAuthenticated {
                record.state = LifeState::OutOfService;
                record.went_off_at = Some(self.now);
            } else {
                demote = false;
            }
        }
        if demote {
            self.emit_state(to, LifeState::OutOfService);
        }
    }

    fn check_session_done(&mut self, sid: u64) {
        let done = match self.gri.get(&sid) {
            Some(sess) => {
                sess.phase == Phase::Done || (sess.phase == Phase::Info && sess.in_flight == 0)
            }
            None => false,
        };
        if !done {
            return;
        }
        let sess = self.gri.remove(&sid).expect("checked above");
        let result = GriResult {
            initiator: sess.initiator,
            roster: sess.roster.clone(),
            packets_go: sess.packets_go,
            packets_return: sess.packets_return,
            packets_info: sess.packets_info,
            completed: sess.completed,
            initiator_trails: sess.initiator_trails.clone(),
        };
        self.gri_results.insert(sid, result);
        if let Some(lc) = self.lifecycle.as_mut() {
            if lc.active_session == Some(sid) {
                lc.active_session = None;
                // Unpin this session's actors only; concurrent access
                // controls keep their own pins.
                lc.busy.remove(&sess.initiator);
                if let FollowUp::InsertionCommit { supplicant } = sess.follow_up {
                    lc.busy.remove(&supplicant);
                }
            }
        }
    }

    fn check_flood_done(&mut self, fid: u64) {
        let done = self
            .floods
            .get(&fid)
            .is_some_and(|f| f.in_flight == 0);
        if done {
            let flood = self.floods.remove(&fid).expect("checked above");
            self.flood_results.insert(fid, flood.transmissions);
        }
    }

    fn on_timer(&mut self, timer: Timer) {
        match timer {
            Timer::GriResponse { session } => {
                if self
                    .gri
                    .get(&session)
                    .is_some_and(|s| s.phase == Phase::Gather)
                {
                    self.finalize_session(session, false);
                }
            }
            Timer::PolDefer { node, scheduled_at } => self.on_pol_defer(node, scheduled_at),
            Timer::ProtocolTick => self.on_protocol_tick(),
            Timer::AccessOutcome { supplicant } => self.on_access_outcome(supplicant),
        }
    }

    fn on_power(&mut self, id: VertexId, on: bool) {
        let mut state_change = None;
        if let Some(node) = self.nodes.get_mut(&id) {
            if on {
                if let Some(record) = node.record.as_mut() {
                    if record.state == LifeState::Off {
                        node.online = true;
                        record.state = LifeState::OnToAuthenticate;
                        state_change = Some(LifeState::OnToAuthenticate);
                    }
                }
            } else if let Some(record) = node.record.as_mut() {
                if record.state == LifeState::OnAuthenticated {
                    node.online = false;
                    record.state = LifeState::Off;
                    record.went_off_at = Some(self.now);
                    state_change = Some(LifeState::Off);
                }
            }
        }
        if let Some(to) = state_change {
            self.emit_state(id, to);
        }
    }

    // ------------------------------------------------------------------
    // Broadcast entry points
    // ------------------------------------------------------------------

    fn start_gri(
        &mut self,
        initiator: VertexId,
        purpose: Purpose,
        response_timer: f64,
        follow_up: FollowUp,
    ) -> Result<u64, SimError> {
        if !self.nodes.contains_key(&initiator) {
            return Err(SimError::UnknownNode(initiator));
        }
        if !self.is_legitimate_online(initiator) {
            return Err(SimError::InitiatorNotLegitimate(initiator));
        }
        let sid = self.next_session;
        self.next_session += 1;
        let packet = Packet {
            id: self.fresh_packet_id(),
            kind: PacketKind::GriGo,
            purpose,
            src: initiator,
            origin: initiator,
            dst: None,
            session: sid,
            hop_trail: Vec::new(),
            roster: BTreeSet::new(),
            size: HEADER_BYTES + 16,
            created_at: self.now,
        };
        let sess = GriSession {
            initiator,
            purpose,
            phase: Phase::Gather,
            covered: [initiator].into(),
            parent: BTreeMap::new(),
            pending_children: BTreeMap::new(),
            collected: BTreeMap::new(),
            trails: BTreeMap::new(),
            roster: BTreeSet::new(),
            packets_go: 0,
            packets_return: 0,
            packets_info: 0,
            completed: false,
            info_covered: [initiator].into(),
            info_payload: InfoPayload::Roster,
            initiator_trails: Vec::new(),
            follow_up,
            in_flight: 1,
        };
        self.gri.insert(sid, sess);
        self.queue.push(
            self.now,
            EventKind::Transmit {
                packet,
                mode: TxMode::SessionBroadcast { session: sid },
            },
        );
        self.queue.push(
            self.now + response_timer,
            EventKind::TimerExpiry(Timer::GriResponse { session: sid }),
        );
        Ok(sid)
    }

    /// Runs a full go/return/information broadcast to completion and
    /// returns its result. Blocking wrapper over the event loop.
    pub fn gri_broadcast(
        &mut self,
        initiator: VertexId,
        purpose: Purpose,
        response_timer: f64,
    ) -> Result<GriResult, SimError> {
        let sid = self.start_gri(initiator, purpose, response_timer, FollowUp::None)?;
        while !self.gri_results.contains_key(&sid) && !self.queue.is_empty() {
            self.step();
        }
        self.gri_results
            .remove(&sid)
            .ok_or(SimError::UnknownNode(initiator))
    }

    /// Plain flood with duplicate suppression: every node retransmits the
    /// first copy it receives exactly once. Returns the transmission count.
    pub fn flood_broadcast(
        &mut self,
        initiator: VertexId,
        payload_bytes: u32,
    ) -> Result<usize, SimError> {
        if !self.nodes.contains_key(&initiator) {
            return Err(SimError::UnknownNode(initiator));
        }
        if !self.is_legitimate_online(initiator) {
            return Err(SimError::InitiatorNotLegitimate(initiator));
        }
        let fid = self.next_session;
        self.next_session += 1;
        self.floods.insert(
            fid,
            FloodSession {
                covered: [initiator].into(),
                transmissions: 0,
                in_flight: 1,
            },
        );
        let packet = Packet {
            id: self.fresh_packet_id(),
            kind: PacketKind::Flood,
            purpose: Purpose::Probe,
            src: initiator,
            origin: initiator,
            dst: None,
            session: fid,
            hop_trail: Vec::new(),
            roster: BTreeSet::new(),
            size: HEADER_BYTES + payload_bytes,
            created_at: self.now,
        };
        self.queue.push(
            self.now,
            EventKind::Transmit {
                packet,
                mode: TxMode::FloodRelay { flood: fid },
            },
        );
        while !self.flood_results.contains_key(&fid) && !self.queue.is_empty() {
            self.step();
        }
        self.flood_results
            .remove(&fid)
            .ok_or(SimError::UnknownNode(initiator))
    }

    // ------------------------------------------------------------------
    // Roster finalization and follow-ups
    // ------------------------------------------------------------------

    fn finalize_session(&mut self, sid: u64, completed: bool) {
        let Some(mut sess) = self.gri.remove(&sid) else {
            return;
        };
        if sess.phase != Phase::Gather {
            self.gri.insert(sid, sess);
            return;
        }
        sess.phase = Phase::Info;
        sess.completed = completed;
        sess.roster = sess
            .collected
            .get(&sess.initiator)
            .cloned()
            .unwrap_or_default();

        let mut launch_info = true;
        match sess.follow_up {
            FollowUp::None => {}
            FollowUp::PolCommit => {
                launch_info = self.finalize_pol(&mut sess);
            }
            FollowUp::InsertionCommit { supplicant } => {
                launch_info = self.finalize_insertion(&mut sess, supplicant);
            }
        }

        // Nothing beyond the initiator was ever covered: nobody to inform.
        if sess.covered.len() <= 1 {
            launch_info = false;
        }
        if launch_info {
            let size = sess
                .info_payload
                .size(sess.purpose, sess.roster.len());
            let packet = Packet {
                id: self.fresh_packet_id(),
                kind: PacketKind::GriInfo,
                purpose: sess.purpose,
                src: sess.initiator,
                origin: sess.initiator,
                dst: None,
                session: sid,
                hop_trail: Vec::new(),
                roster: BTreeSet::new(),
                size,
                created_at: self.now,
            };
            sess.in_flight += 1;
            self.queue.push(
                self.now + self.cfg.processing_delay,
                EventKind::Transmit {
                    packet,
                    mode: TxMode::SessionBroadcast { session: sid },
                },
            );
        } else {
            sess.phase = Phase::Done;
        }
        self.gri.insert(sid, sess);
        self.check_session_done(sid);
    }

    /// Quorum-checks the gathered proofs, prunes the silent, prepares the
    /// commit payload. Returns whether the information phase launches.
    fn finalize_pol(&mut self, sess: &mut GriSession) -> bool {
        let (threshold, n_min) = {
            let lc = self.lifecycle.as_ref().expect("pol runs under lifecycle");
            (lc.threshold.current(), lc.cfg.n_min)
        };
        let initiator = sess.initiator;
        let responders = sess.roster.clone();

        let n = match self.record(initiator) {
            Some(r) => r.graph.vertex_count(),
            None => return false,
        };
        if responders.len() < Quorum::needed(n) {
            // Not enough proofs came back: stop and put the clock back.
            if let Some(node) = self.nodes.get_mut(&initiator) {
                if let Some(record) = node.record.as_mut() {
                    record.last_proof_at = self.now;
                }
            }
            self.emit_proto(
                initiator.get(),
                format!("op=pol,outcome=cancelled,answers={},needed={}", responders.len(), Quorum::needed(n)),
            );
            return false;
        }

        let mut roster_all = responders.clone();
        roster_all.insert(initiator);
        let stamp = self.now;

        let (roster_event, deletions, pruned) = {
            let node = self.nodes.get_mut(&initiator).expect("initiator exists");
            let record = node.record.as_mut().expect("initiator is a member");
            let roster_event = UpdateEvent {
                stage: record.graph.stage(),
                time: stamp,
                kind: UpdateKind::ProofOfLife {
                    initiator,
                    roster: roster_all,
                },
            };
            record.fifo.push(roster_event.clone());
            record.last_proof_at = stamp;
            let pre_stage = record.graph.stage();
            match prune_dead_nodes(record, stamp, threshold, n_min) {
                Ok(pruned) => {
                    let deletions: Vec<UpdateEvent> = pruned
                        .iter()
                        .enumerate()
                        .map(|(i, &id)| UpdateEvent {
                            stage: pre_stage + i as u64 + 1,
                            time: stamp,
                            kind: UpdateKind::Deletion { removed: id },
                        })
                        .collect();
                    (roster_event, deletions, pruned)
                }
                Err(_) => {
                    // The network fell below its viability threshold.
                    self.trace.push(TraceRecord {
                        time: self.now,
                        event: TraceEvent::Term,
                        node: initiator.get(),
                        packet_kind: None,
                        packet_id: 0,
                        size: 0,
                        extra: "reason=too-small".into(),
                    });
                    if let Some(lc) = self.lifecycle.as_mut() {
                        lc.terminated = true;
                    }
                    return false;
                }
            }
        };

        if !pruned.is_empty() {
            if let Some(node) = self.nodes.get_mut(&initiator) {
                if let Some(record) = node.record.as_mut() {
                    record.last_service = Some(stamp);
                }
            }
            if let Some(lc) = self.lifecycle.as_mut() {
                lc.deletions += pruned.len();
            }
        }
        self.emit_proto(
            initiator.get(),
            format!("op=pol,outcome=committed,roster={},pruned={}", responders.len(), pruned.len()),
        );

        // Deleted members leave the graph and the arena.
        for id in &pruned {
            self.emit_state(*id, LifeState::Deleted);
            self.nodes.remove(id);
            if let Some(lc) = self.lifecycle.as_mut() {
                lc.gave_up.remove(id);
                lc.pending_access.remove(id);
            }
        }

        // Reachability judgement: online members that did not answer are
        // no longer trusted as synchronized.
        let roster_check: BTreeSet<VertexId> = match &roster_event.kind {
            UpdateKind::ProofOfLife { roster, .. } => roster.clone(),
            _ => BTreeSet::new(),
        };
        let mut demoted = Vec::new();
        for (&id, node) in self.nodes.iter_mut() {
            if id == initiator || roster_check.contains(&id) || !node.online {
                continue;
            }
            if let Some(record) = node.record.as_mut() {
                if record.state == LifeState::OnAuthenticated {
                    record.state = LifeState::OutOfService;
                    record.went_off_at = Some(self.now);
                    demoted.push(id);
                }
            }
        }
        for id in demoted {
            self.emit_state(id, LifeState::OutOfService);
        }

        sess.info_payload = InfoPayload::PolCommit {
            stamp,
            roster_event,
            deletions,
        };
        true
    }

    /// Quorum-checks the insertion announcement and commits the upgrade.
    /// Returns whether the information phase launches.
    fn finalize_insertion(&mut self, sess: &mut GriSession, supplicant: VertexId) -> bool {
        let initiator = sess.initiator;
        let answers = sess.roster.len();
        let outcome = {
            let record = self
                .nodes
                .get(&initiator)
                .and_then(|n| n.record.as_ref());
            let Some(record) = record else {
                return false;
            };
            handle_insertion(record, supplicant, answers, &mut self.rng)
        };
        match outcome {
            Err(err) => {
                self.emit_proto(
                    initiator.get(),
                    format!("op=insert,outcome=denied,reason={err}"),
                );
                self.nodes.remove(&supplicant);
                false
            }
            Ok(InsertionOutcome::Aborted { answers, required }) => {
                self.emit_proto(
                    initiator.get(),
                    format!("op=insert,outcome=aborted,answers={answers},needed={required}"),
                );
                self.nodes.remove(&supplicant);
                false
            }
            Ok(InsertionOutcome::Completed {
                graph,
                cycle,
                group,
                spliced,
            }) => {
                let event = UpdateEvent {
                    stage: graph.stage(),
                    time: self.now,
                    kind: UpdateKind::Insertion {
                        new_id: supplicant,
                        left: spliced.0,
                        right: spliced.1,
                        members: group.members.clone(),
                    },
                };
                let graph_text_len = graph.canonical_text().len() as u32;
                {
                    let node = self.nodes.get_mut(&initiator).expect("initiator exists");
                    let record = node.record.as_mut().expect("member");
                    record.graph = graph.clone();
                    record.cycle = Some(cycle.clone());
                    record.last_seen_stage = graph.stage();
                    record.fifo.push(event.clone());
                    record.last_service = Some(self.now);
                }
                if let Some(lc) = self.lifecycle.as_mut() {
                    lc.insertions += 1;
                    lc.pending_joins
                        .insert(supplicant, PendingJoin { graph, cycle });
                }
                self.emit_proto(
                    initiator.get(),
                    format!("op=insert,outcome=committed,id={supplicant},answers={answers}"),
                );
                // The new graph travels openly to the supplicant; the cycle
                // rides the secure side channel and costs no radio bytes.
                let push = Packet {
                    id: self.fresh_packet_id(),
                    kind: PacketKind::InsertionMsg,
                    purpose: Purpose::Insertion,
                    src: initiator,
                    origin: initiator,
                    dst: Some(supplicant),
                    session: 0,
                    hop_trail: Vec::new(),
                    roster: BTreeSet::new(),
                    size: HEADER_BYTES + graph_text_len,
                    created_at: self.now,
                };
                self.queue.push(
                    self.now + self.cfg.processing_delay,
                    EventKind::Transmit {
                        packet: push,
                        mode: TxMode::Unicast { route_rest: Vec::new() },
                    },
                );
                sess.info_payload = InfoPayload::InsertionCommit { event };
                true
            }
        }
    }

    // ------------------------------------------------------------------
    // Protocol clockwork
    // ------------------------------------------------------------------

    fn on_pol_defer(&mut self, node: VertexId, scheduled_at: f64) {
        let proceed = {
            let Some(lc) = self.lifecycle.as_mut() else {
                return;
            };
            lc.pol_defer_pending.remove(&node);
            if lc.terminated || lc.active_session.is_some() || lc.last_pol_start >= scheduled_at {
                false
            } else {
                let threshold = lc.threshold.current();
                match self.nodes.get(&node).and_then(|n| n.record.as_ref()) {
                    Some(record) => proof_of_life_tick(record, self.now, threshold).is_some(),
                    None => false,
                }
            }
        };
        if !proceed || !self.is_legitimate_online(node) {
            return;
        }
        let timer = self.cfg.default_response_timer();
        if let Ok(sid) = self.start_gri(node, Purpose::ProofOfLife, timer, FollowUp::PolCommit) {
            let lc = self.lifecycle.as_mut().expect("checked");
            lc.active_session = Some(sid);
            lc.last_pol_start = self.now;
            lc.busy.insert(node);
        }
    }

    fn on_protocol_tick(&mut self) {
        self.queue
            .push(self.now + 1.0, EventKind::TimerExpiry(Timer::ProtocolTick));
        if self.lifecycle.as_ref().is_none_or(|lc| lc.terminated) {
            return;
        }

        // Entry states normalize on the tick after they were entered.
        let mut normalized = Vec::new();
        for (&id, node) in self.nodes.iter_mut() {
            if let Some(record) = node.record.as_mut() {
                if record.state.is_entry_transient() {
                    record.state = LifeState::OnAuthenticated;
                    normalized.push(id);
                }
            }
        }
        for id in normalized {
            self.emit_state(id, LifeState::OnAuthenticated);
        }

        self.tick_churn();
        self.tick_out_of_service();
        self.tick_access_control();
        self.tick_pol_candidates();
    }

    fn tick_churn(&mut self) {
        let (insert_prob, delete_prob, pol_period) = {
            let lc = self.lifecycle.as_ref().expect("lifecycle attached");
            (
                lc.cfg.insert_prob,
                lc.cfg.delete_prob,
                lc.cfg.pol_period,
            )
        };
        let u_insert: f64 = self.rng.gen();
        let u_delete: f64 = self.rng.gen();

        if u_insert < insert_prob {
            self.try_spawn_insertion();
        }

        if u_delete < delete_prob {
            let busy = self
                .lifecycle
                .as_ref()
                .map(|lc| lc.busy.clone())
                .unwrap_or_default();
            let candidates: Vec<VertexId> = self
                .nodes
                .iter()
                .filter(|(id, n)| {
                    n.online
                        && !busy.contains(id)
                        && n.record
                            .as_ref()
                            .is_some_and(|r| r.state == LifeState::OnAuthenticated)
                })
                .map(|(&id, _)| id)
                .collect();
            if !candidates.is_empty() {
                let victim = candidates[self.rng.gen_range(0..candidates.len())];
                // How long a device stays off is user behavior, not a
                // function of the network's adaptive threshold.
                let back_after = pol_period * self.rng.gen_range(0.5..3.0);
                self.queue.push(
                    self.now,
                    EventKind::PowerToggle {
                        node: victim,
                        on: false,
                    },
                );
                self.queue.push(
                    self.now + back_after,
                    EventKind::PowerToggle {
                        node: victim,
                        on: true,
                    },
                );
            }
        }
    }

    fn try_spawn_insertion(&mut self) {
        let can_start = self
            .lifecycle
            .as_ref()
            .is_some_and(|lc| lc.active_session.is_none());
        if !can_start {
            return;
        }
        let position = self
            .cfg
            .radio
            .arena
            .random_point(&mut self.rng);
        // The supplicant walks up to the nearest full member: trust and the
        // secure side channel need physical proximity.
        let authenticator = self
            .nodes
            .iter()
            .filter(|(&id, _)| self.is_legitimate_online(id))
            .map(|(&id, n)| {
                let dx = n.mobility.position.0 - position.0;
                let dy = n.mobility.position.1 - position.1;
                (id, dx * dx + dy * dy)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(id, _)| id);
        let Some(authenticator) = authenticator else {
            return;
        };
        let supplicant = {
            let record = self.record(authenticator).expect("member");
            next_vertex_id(record.graph.vertices())
        };
        // Hardware appears next to its authenticator so the open-channel
        // hand-off is a single hop.
        let auth_pos = self.nodes[&authenticator].mobility.position;
        let speed_range = self.cfg.speed_range;
        let mobility = MobilityState {
            position: auth_pos,
            waypoint: self.cfg.radio.arena.random_point(&mut self.rng),
            speed: if speed_range.1 > speed_range.0 {
                self.rng.gen_range(speed_range.0..=speed_range.1)
            } else {
                speed_range.0
            },
        };
        self.nodes.insert(
            supplicant,
            SimNode {
                mobility,
                online: true,
                record: None,
            },
        );
        let timer = self.cfg.default_response_timer();
        match self.start_gri(
            authenticator,
            Purpose::Insertion,
            timer,
            FollowUp::InsertionCommit { supplicant },
        ) {
            Ok(sid) => {
                let lc = self.lifecycle.as_mut().expect("lifecycle attached");
                lc.active_session = Some(sid);
                lc.busy.insert(authenticator);
                lc.busy.insert(supplicant);
            }
            Err(_) => {
                self.nodes.remove(&supplicant);
            }
        }
    }

    fn tick_out_of_service(&mut self) {
        let adj = neighbors(&self.cfg.radio, &self.positions_online());
        let mut promote = Vec::new();
        for (&id, node) in &self.nodes {
            if !node.online {
                continue;
            }
            let Some(record) = node.record.as_ref() else {
                continue;
            };
            if record.state != LifeState::OutOfService {
                continue;
            }
            if !self
                .reachable_authenticators(id, &adj, record.last_seen_stage)
                .is_empty()
            {
                promote.push(id);
            }
        }
        for id in promote {
            if let Some(record) = self.nodes.get_mut(&id).and_then(|n| n.record.as_mut()) {
                record.state = LifeState::OnToAuthenticate;
            }
            self.emit_state(id, LifeState::OnToAuthenticate);
        }
    }

    /// Breadth-first over the online radio graph from `from`: every full
    /// member in reach whose queue still covers `needed_stage`, with its
    /// hop path. Paths go through member relays only.
    fn reachable_authenticators(
        &self,
        from: VertexId,
        adj: &BTreeMap<VertexId, BTreeSet<VertexId>>,
        needed_stage: u64,
    ) -> Vec<(VertexId, Vec<VertexId>)> {
        let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut seen: BTreeSet<VertexId> = [from].into();
        let mut frontier = VecDeque::from([from]);
        let mut found = Vec::new();
        while let Some(u) = frontier.pop_front() {
            let Some(nbrs) = adj.get(&u) else { continue };
            for &v in nbrs {
                if !seen.insert(v) {
                    continue;
                }
                parent.insert(v, u);
                let candidate = self.record(v).is_some_and(|r| {
                    r.state == LifeState::OnAuthenticated
                        && r.fifo.evicted_through_stage() <= needed_stage
                });
                if candidate {
                    let mut path = vec![v];
                    let mut cur = v;
                    while cur != from {
                        cur = parent[&cur];
                        path.push(cur);
                    }
                    path.reverse();
                    found.push((v, path));
                }
                if self.participates(v) {
                    frontier.push_back(v);
                }
            }
        }
        found
    }

    fn tick_access_control(&mut self) {
        let adj = neighbors(&self.cfg.radio, &self.positions_online());
        let (threshold, rounds) = {
            let lc = self.lifecycle.as_ref().expect("lifecycle attached");
            (lc.threshold.current(), lc.cfg.zkp_rounds)
        };
        let supplicants: Vec<VertexId> = self
            .nodes
            .iter()
            .filter(|(id, n)| {
                n.online
                    && n.record
                        .as_ref()
                        .is_some_and(|r| r.state == LifeState::OnToAuthenticate)
                    && self.lifecycle.as_ref().is_some_and(|lc| {
                        !lc.pending_access.contains_key(id) && !lc.gave_up.contains(id)
                    })
            })
            .map(|(&id, _)| id)
            .collect();

        for supplicant in supplicants {
            let needed_stage = match self.record(supplicant) {
                Some(r) => r.last_seen_stage,
                None => continue,
            };
            // Any reachable member may authenticate; the supplicant does
            // not get to assume its closest neighbor is one.
            let candidates = self.reachable_authenticators(supplicant, &adj, needed_stage);
            if candidates.is_empty() {
                continue;
            }
            let (authenticator, path) =
                candidates[self.rng.gen_range(0..candidates.len())].clone();
            let (verdict, messages) = {
                let auth = self.record(authenticator).expect("member").clone();
                let supp = self.record(supplicant).expect("present").clone();
                let graph_bytes = supp.graph.canonical_text().len() as u32;
                // The stale graph travels openly first.
                let mut messages: Vec<(bool, u32)> = vec![(true, graph_bytes)];
                let verdict = match handle_access_control(
                    &auth,
                    &supp,
                    self.now,
                    threshold,
                    rounds,
                    &mut self.rng,
                ) {
                    Err(_) => continue,
                    Ok(outcome) => {
                        let (verdict, transcript) = match &outcome {
                            AccessOutcome::ReInserted { transcript, .. } => {
                                (AcVerdict::Accept, Some(transcript))
                            }
                            AccessOutcome::Rejected { reason, transcript } => {
                                let v = match reason {
                                    RejectReason::Expired => AcVerdict::RejectExpired,
                                    RejectReason::Isolated => AcVerdict::RejectIsolated,
                                };
                                (v, transcript.as_ref())
                            }
                        };
                        match transcript {
                            None => messages.push((false, 1)), // refusal
                            Some(t) => {
                                for round in &t.rounds {
                                    messages.push((true, 64)); // commitment pair
                                    messages.push((false, 1)); // challenge bit
                                    messages
                                        .push((true, round.response.wire_size() as u32));
                                }
                            }
                        }
                        verdict
                    }
                };
                (verdict, messages)
            };
            let observed = self
                .record(supplicant)
                .and_then(|r| r.went_off_at)
                .map(|t| self.now - t)
                .unwrap_or(0.0);
            let done_at =
                self.schedule_access_traffic(supplicant, authenticator, &path, &messages);
            let lc = self.lifecycle.as_mut().expect("lifecycle attached");
            lc.pending_access.insert(
                supplicant,
                PendingAccess {
                    verdict,
                    authenticator,
                    observed_offline: observed,
                },
            );
            lc.busy.insert(supplicant);
            lc.busy.insert(authenticator);
            self.queue.push(
                done_at,
                EventKind::TimerExpiry(Timer::AccessOutcome { supplicant }),
            );
        }
    }

    /// Emits the session's message traffic along the path and returns when
    /// the exchange completes. Each entry is (sent by the supplicant,
    /// payload bytes).
    fn schedule_access_traffic(
        &mut self,
        supplicant: VertexId,
        authenticator: VertexId,
        path: &[VertexId],
        messages: &[(bool, u32)],
    ) -> f64 {
        let hop = self.cfg.hop_latency + self.cfg.processing_delay;
        let hops = (path.len().max(2) - 1) as f64;
        let mut at = self.now + self.cfg.processing_delay;
        for &(from_supplicant, payload) in messages {
            let (src, route): (VertexId, Vec<VertexId>) = if from_supplicant {
                (supplicant, path[1..].to_vec())
            } else {
                let mut rev: Vec<VertexId> = path.to_vec();
                rev.reverse();
                (authenticator, rev[1..].to_vec())
            };
            if route.is_empty() {
                continue;
            }
            let mut packet = Packet::new(
                self.fresh_packet_id(),
                PacketKind::ZkpMsg,
                Purpose::AccessControl,
                src,
                HEADER_BYTES + payload,
                at,
            );
            packet.dst = Some(route[0]);
            let rest = route[1..].to_vec();
            self.queue.push(
                at,
                EventKind::Transmit {
                    packet,
                    mode: TxMode::Unicast { route_rest: rest },
                },
            );
            at += hops * hop;
        }
        at
    }

    fn on_access_outcome(&mut self, supplicant: VertexId) {
        let Some(lc) = self.lifecycle.as_mut() else {
            return;
        };
        let Some(pending) = lc.pending_access.remove(&supplicant) else {
            return;
        };
        lc.busy.remove(&supplicant);
        lc.busy.remove(&pending.authenticator);
        match pending.verdict {
            AcVerdict::Accept => {
                // The proof already passed; the catch-up replay is sliced
                // fresh so updates committed while the messages were in
                // the air are not missed.
                let replay = {
                    let Some(auth) = self.record(pending.authenticator) else {
                        return;
                    };
                    let needed = match self.record(supplicant) {
                        Some(r) => r.last_seen_stage,
                        None => return,
                    };
                    auth.fifo.events_after_stage(needed)
                };
                match replay {
                    Err(_) => {
                        // The window moved while the proof ran; retry with
                        // a fresh session next tick.
                        self.emit_proto(
                            supplicant.get(),
                            "op=ac,outcome=retry,reason=stale-window".into(),
                        );
                    }
                    Ok(events) => {
                        let applied = {
                            let node = self.nodes.get_mut(&supplicant);
                            let record = node.and_then(|n| n.record.as_mut());
                            match record {
                                None => None,
                                Some(record) => {
                                    let cycle =
                                        record.cycle.clone().expect("members hold the cycle");
                                    match apply_replay(&record.graph, &cycle, &events) {
                                        Err(_) => None,
                                        Ok((graph, cycle)) => {
                                            record.last_seen_stage = graph.stage();
                                            record.graph = graph;
                                            record.cycle = Some(cycle);
                                            record.went_off_at = None;
                                            record.last_proof_at = self.now;
                                            record.state = LifeState::ReInserted;
                                            for ev in events {
                                                record.fifo.ingest(ev);
                                            }
                                            Some(())
                                        }
                                    }
                                }
                            }
                        };
                        if applied.is_some() {
                            self.emit_state(supplicant, LifeState::ReInserted);
                            let lc = self.lifecycle.as_mut().expect("lifecycle attached");
                            lc.access_controls += 1;
                            lc.threshold =
                                update_threshold(&lc.threshold, pending.observed_offline);
                            let retention = lc.cfg.retention(lc.threshold.current());
                            let new_threshold = lc.threshold.current();
                            for node in self.nodes.values_mut() {
                                if let Some(record) = node.record.as_mut() {
                                    record.fifo.set_retention(retention);
                                }
                            }
                            if let Some(record) = self
                                .nodes
                                .get_mut(&pending.authenticator)
                                .and_then(|n| n.record.as_mut())
                            {
                                record.last_service = Some(self.now);
                            }
                            self.emit_proto(
                                supplicant.get(),
                                format!(
                                    "op=ac,outcome=reinserted,observed={:.6},threshold={:.6}",
                                    pending.observed_offline, new_threshold
                                ),
                            );
                        }
                    }
                }
            }
            AcVerdict::RejectExpired => {
                if let Some(record) = self
                    .nodes
                    .get_mut(&supplicant)
                    .and_then(|n| n.record.as_mut())
                {
                    record.state = LifeState::Off;
                }
                self.emit_state(supplicant, LifeState::Off);
                let lc = self.lifecycle.as_mut().expect("lifecycle attached");
                lc.access_controls += 1;
                lc.gave_up.insert(supplicant);
                self.emit_proto(supplicant.get(), "op=ac,outcome=expired".into());
            }
            AcVerdict::RejectIsolated => {
                if let Some(record) = self
                    .nodes
                    .get_mut(&supplicant)
                    .and_then(|n| n.record.as_mut())
                {
                    record.state = LifeState::NonLegitimate;
                    record.cycle = None;
                }
                self.emit_state(supplicant, LifeState::NonLegitimate);
                let lc = self.lifecycle.as_mut().expect("lifecycle attached");
                lc.access_controls += 1;
                self.emit_proto(supplicant.get(), "op=ac,outcome=isolated".into());
            }
        }
    }

    fn tick_pol_candidates(&mut self) {
        let (threshold, active) = {
            let lc = self.lifecycle.as_ref().expect("lifecycle attached");
            (lc.threshold.current(), lc.active_session.is_some())
        };
        if active {
            return;
        }
        let candidates: Vec<VertexId> = self
            .nodes
            .iter()
            .filter_map(|(&id, n)| {
                if !n.online {
                    return None;
                }
                let record = n.record.as_ref()?;
                let pending = self
                    .lifecycle
                    .as_ref()
                    .is_some_and(|lc| lc.pol_defer_pending.contains(&id));
                if pending {
                    return None;
                }
                proof_of_life_tick(record, self.now, threshold).map(|_| id)
            })
            .collect();
        for id in candidates {
            let defer: f64 = self.rng.gen_range(0.0..threshold / 10.0);
            let lc = self.lifecycle.as_mut().expect("lifecycle attached");
            lc.pol_defer_pending.insert(id);
            self.queue.push(
                self.now + defer,
                EventKind::TimerExpiry(Timer::PolDefer {
                    node: id,
                    scheduled_at: self.now,
                }),
            );
        }
    }
}

/// Applies one carried update to a member record if it is exactly the next
/// stage. Returns true when a gap was detected (the member missed an
/// earlier update and cannot apply this one).
fn apply_event_guarded(record: &mut NodeRecord, event: &UpdateEvent) -> bool {
    if event.stage <= record.last_seen_stage {
        return false;
    }
    if event.stage > record.last_seen_stage + 1 {
        return true;
    }
    let Some(cycle) = record.cycle.clone() else {
        return true;
    };
    match apply_update(&record.graph, &cycle, event) {
        Ok((graph, cycle)) => {
            record.graph = graph;
            record.cycle = Some(cycle);
            record.last_seen_stage = event.stage;
            record.fifo.push(event.clone());
            false
        }
        Err(_) => true,
    }
}

