//! The event queue: nondecreasing time, ties broken by sequence number so
//! replays are exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::graph::VertexId;

use super::packet::Packet;

#[derive(Debug, Clone)]
pub enum EventKind {
    MobilityUpdate,
    /// A node puts one packet on the air. Targets are resolved when the
    /// event fires, so coverage decisions always see current state.
    Transmit { packet: Packet, mode: TxMode },
    PacketDelivery {
        packet: Packet,
        to: VertexId,
        /// Transmission this delivery belongs to, for outcome accounting.
        tx_id: u64,
        /// Hops still ahead on a unicast chain after `to`.
        route_rest: Vec<VertexId>,
    },
    TimerExpiry(Timer),
    PowerToggle { node: VertexId, on: bool },
}

/// How a transmission picks its receivers.
#[derive(Debug, Clone)]
pub enum TxMode {
    /// Go or information relay within a broadcast session.
    SessionBroadcast { session: u64 },
    /// Plain flood relay: retransmit on first receipt, no suppression.
    FloodRelay { flood: u64 },
    /// Directed hop to `packet.dst`, then along the remaining route.
    Unicast { route_rest: Vec<VertexId> },
}

#[derive(Debug, Clone)]
pub enum Timer {
    /// Initiator-side response deadline of a broadcast session.
    GriResponse { session: u64 },
    /// A node's deferred proof-of-life initiation.
    PolDefer { node: VertexId, scheduled_at: f64 },
    /// Once-per-second protocol duties: churn, clock checks, retries.
    ProtocolTick,
    /// Apply the outcome of an access-control session once its last
    /// message lands.
    AccessOutcome { supplicant: VertexId },
}

#[derive(Debug, Clone)]
pub struct SimEvent {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl PartialEq for SimEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl Eq for SimEvent {}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we pop earliest first.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Min-queue of events ordered by (time, seq).
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<SimEvent>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(SimEvent { time, seq, kind });
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
