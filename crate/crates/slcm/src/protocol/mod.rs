//! Per-node life-cycle state machine tying the graph algebra and the proof
//! protocol into the five membership procedures: initialization, insertion,
//! access control, proofs of life, and deletion.

use std::fmt;

use thiserror::Error;

use crate::graph::{GraphError, HamiltonianCycle, NetworkGraph, VertexId};
use crate::zkp::ZkpError;

mod ops;
mod queue;
mod threshold;

pub use ops::{
    apply_replay, apply_update, exemption_check, handle_access_control, handle_insertion,
    initialize_network, next_vertex_id, proof_of_life_tick, prune_dead_nodes, AccessOutcome,
    InsertionOutcome, ProofOfLifeAction, RejectReason,
};
pub use queue::{UpdateEvent, UpdateKind, UpdateQueue};
pub use threshold::{update_threshold, Quorum, ThresholdT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("cannot initialize with {found} founders, minimum is {minimum}")]
    TooFewFounders { found: usize, minimum: usize },
    #[error("vertex id {0} is already held by a live node")]
    DuplicateVertexId(VertexId),
    #[error("updates after stage {needed_after_stage} were evicted (queue starts after stage {evicted_through})")]
    StaleBeyondFifo {
        needed_after_stage: u64,
        evicted_through: u64,
    },
    #[error("node is {actual}, operation needs {expected}")]
    InvalidState {
        expected: &'static str,
        actual: LifeState,
    },
    #[error("life-cycle forbids {from} -> {to}")]
    IllegalTransition { from: LifeState, to: LifeState },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Zkp(#[from] ZkpError),
}

/// Where a node sits in its life cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LifeState {
    OnAuthenticated,
    NonLegitimate,
    OnToAuthenticate,
    Off,
    ReInserted,
    Deleted,
    OutOfService,
    Added,
}

impl LifeState {
    /// The explicit transition table. `Added` and `ReInserted` are entry
    /// states that normalize to `OnAuthenticated` on the next tick.
    pub fn can_transition(self, to: LifeState) -> bool {
        use LifeState::*;
        matches!(
            (self, to),
            (NonLegitimate, Added)
                | (Added, OnAuthenticated)
                | (OnAuthenticated, Off)
                | (OnAuthenticated, OutOfService)
                | (Off, OnToAuthenticate)
                | (Off, Deleted)
                | (OnToAuthenticate, ReInserted)
                // Rejections: expired supplicants fall back to Off awaiting
                // deletion, isolated ones are cut off entirely.
                | (OnToAuthenticate, Off)
                | (OnToAuthenticate, NonLegitimate)
                | (OnToAuthenticate, Deleted)
                | (ReInserted, OnAuthenticated)
                | (OutOfService, OnToAuthenticate)
                | (OutOfService, Deleted)
                // A deleted identifier is recycled; the hardware may try a
                // fresh insertion later.
                | (Deleted, NonLegitimate)
        )
    }

    /// States that normalize to `OnAuthenticated` on the next tick.
    pub fn is_entry_transient(self) -> bool {
        matches!(self, LifeState::Added | LifeState::ReInserted)
    }

    /// States whose holder counts as a live vertex of the graph.
    pub fn is_member(self) -> bool {
        !matches!(self, LifeState::NonLegitimate | LifeState::Deleted)
    }
}

impl fmt::Display for LifeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            LifeState::OnAuthenticated => "on-authenticated",
            LifeState::NonLegitimate => "non-legitimate",
            LifeState::OnToAuthenticate => "on-to-authenticate",
            LifeState::Off => "off",
            LifeState::ReInserted => "re-inserted",
            LifeState::Deleted => "deleted",
            LifeState::OutOfService => "out-of-service",
            LifeState::Added => "added",
        };
        f.write_str(name)
    }
}

/// Everything one node knows: its identifier, life state, copy of the group
/// secret, clocks, and its FIFO queue of membership updates.
#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub id: VertexId,
    pub state: LifeState,
    pub graph: NetworkGraph,
    pub cycle: Option<HamiltonianCycle>,
    /// Stage of the last update this node applied; the replay slice for a
    /// returning node starts right after it.
    pub last_seen_stage: u64,
    /// When the node last fell silent (powered off or became unreachable).
    pub went_off_at: Option<f64>,
    /// Base of the proof-of-life clock: the node's clock reads
    /// `now - last_proof_at`.
    pub last_proof_at: f64,
    /// Last time this node served as authenticator or deletion broadcaster;
    /// recent service exempts it from initiating its own proof of life.
    pub last_service: Option<f64>,
    pub fifo: UpdateQueue,
}

impl NodeRecord {
    pub fn clock(&self, now: f64) -> f64 {
        now - self.last_proof_at
    }

    /// Moves along the life cycle, rejecting edges outside the table.
    pub fn transition(&mut self, to: LifeState) -> Result<(), ProtocolError> {
        if !self.state.can_transition(to) {
            return Err(ProtocolError::IllegalTransition {
                from: self.state,
                to,
            });
        }
        self.state = to;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_the_documented_life_cycle() {
        use LifeState::*;
        let legal = [
            (NonLegitimate, Added),
            (Added, OnAuthenticated),
            (OnAuthenticated, Off),
            (Off, OnToAuthenticate),
            (OnToAuthenticate, ReInserted),
            (ReInserted, OnAuthenticated),
            (Off, Deleted),
            (OnAuthenticated, OutOfService),
            (OutOfService, OnToAuthenticate),
        ];
        for (from, to) in legal {
            assert!(from.can_transition(to), "{from} -> {to}");
        }
        let illegal = [
            (NonLegitimate, OnAuthenticated),
            (Off, OnAuthenticated),
            (Deleted, OnAuthenticated),
            (OnAuthenticated, ReInserted),
            (Added, Off),
        ];
        for (from, to) in illegal {
            assert!(!from.can_transition(to), "{from} -> {to}");
        }
    }

    #[test]
    fn entry_states_are_transient() {
        assert!(LifeState::Added.is_entry_transient());
        assert!(LifeState::ReInserted.is_entry_transient());
        assert!(!LifeState::OnAuthenticated.is_entry_transient());
    }

    #[test]
    fn membership_excludes_outsiders_and_deleted() {
        assert!(LifeState::Off.is_member());
        assert!(LifeState::OutOfService.is_member());
        assert!(!LifeState::NonLegitimate.is_member());
        assert!(!LifeState::Deleted.is_member());
    }
}
