//! The five life-cycle procedures, written as pure functions over node
//! records. The simulation engine owns the records and the radio; these
//! functions own the rules.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::graph::{
    complete_graph, delete_vertex, generate_initial_cycle, insert_vertex, HamiltonianCycle,
    NeighborGroup, NetworkGraph, Permutation, VertexId,
};
use crate::zkp::{run_protocol, CheatStrategy, ProverStrategy, ZkpTranscript};

use super::{
    LifeState, NodeRecord, ProtocolError, Quorum, UpdateEvent, UpdateKind, UpdateQueue,
};

/// Builds the founding network: every founder contributes a secret random
/// permutation (composed in ascending identifier order), the composite is
/// the initial cycle, and the cycle is completed to `m` edges. All founders
/// come up holding identical copies of the secret.
pub fn initialize_network<R: Rng + ?Sized>(
    node_ids: &BTreeSet<VertexId>,
    m: usize,
    n_min: usize,
    retention: f64,
    rng: &mut R,
) -> Result<BTreeMap<VertexId, NodeRecord>, ProtocolError> {
    let n = node_ids.len();
    let minimum = n_min.max(3);
    if n < minimum {
        return Err(ProtocolError::TooFewFounders { found: n, minimum });
    }
    let permutations: Vec<Permutation> = node_ids
        .iter()
        .map(|_| Permutation::random(node_ids, rng))
        .collect();
    let cycle = generate_initial_cycle(&permutations)?;
    let graph = complete_graph(&cycle, m, rng)?;

    // Founding roster: seeds every queue so each live vertex always has at
    // least one proof-of-life entry to be judged by.
    let founding = UpdateEvent {
        stage: 0,
        time: 0.0,
        kind: UpdateKind::ProofOfLife {
            initiator: *node_ids.first().expect("nonempty"),
            roster: node_ids.clone(),
        },
    };

    Ok(node_ids
        .iter()
        .map(|&id| {
            let mut fifo = UpdateQueue::new(retention);
            fifo.push(founding.clone());
            (
                id,
                NodeRecord {
                    id,
                    state: LifeState::OnAuthenticated,
                    graph: graph.clone(),
                    cycle: Some(cycle.clone()),
                    last_seen_stage: 0,
                    went_off_at: None,
                    last_proof_at: 0.0,
                    last_service: None,
                    fifo,
                },
            )
        })
        .collect())
}

/// The lowest positive identifier not currently assigned, reusing slots
/// freed by deletions.
pub fn next_vertex_id(live: &BTreeSet<VertexId>) -> VertexId {
    let mut candidate = 1u32;
    for v in live {
        if v.get() == candidate {
            candidate += 1;
        } else {
            break;
        }
    }
    VertexId::new(candidate).expect("candidate starts at 1")
}

/// What came of an insertion attempt.
#[derive(Debug, Clone)]
pub enum InsertionOutcome {
    /// Too few nodes answered the announcement broadcast.
    Aborted { answers: usize, required: usize },
    /// The upgrade every online node must apply, plus what the supplicant
    /// receives: the new graph openly, the new cycle over the secure
    /// channel.
    Completed {
        graph: NetworkGraph,
        cycle: HamiltonianCycle,
        group: NeighborGroup,
        spliced: (VertexId, VertexId),
    },
}

/// Runs the authenticator's side of an insertion once the announcement
/// broadcast came back with `quorum_answers` answers. Proposing an
/// identifier that is already live is the Sybil case: refused outright so
/// the caller can isolate the supplicant.
pub fn handle_insertion<R: Rng + ?Sized>(
    authenticator: &NodeRecord,
    supplicant_id: VertexId,
    quorum_answers: usize,
    rng: &mut R,
) -> Result<InsertionOutcome, ProtocolError> {
    if authenticator.state != LifeState::OnAuthenticated {
        return Err(ProtocolError::InvalidState {
            expected: "on-authenticated authenticator",
            actual: authenticator.state,
        });
    }
    if authenticator.graph.contains_vertex(supplicant_id) {
        return Err(ProtocolError::DuplicateVertexId(supplicant_id));
    }
    let required = Quorum::needed(authenticator.graph.vertex_count());
    if quorum_answers < required {
        return Ok(InsertionOutcome::Aborted {
            answers: quorum_answers,
            required,
        });
    }
    let cycle = authenticator.cycle.as_ref().ok_or(ProtocolError::InvalidState {
        expected: "authenticator holding the cycle",
        actual: authenticator.state,
    })?;
    let (graph, cycle, group) = insert_vertex(&authenticator.graph, cycle, supplicant_id, rng)?;
    let spliced = cycle
        .neighbors_of(supplicant_id)
        .expect("freshly spliced vertex");
    Ok(InsertionOutcome::Completed {
        graph,
        cycle,
        group,
        spliced,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// Offline longer than the threshold; only a fresh insertion can bring
    /// the node back.
    Expired,
    /// Failed the proof; the supplicant is cut off.
    Isolated,
}

/// What came of an access-control session.
#[derive(Debug, Clone)]
pub enum AccessOutcome {
    ReInserted {
        graph: NetworkGraph,
        /// Updated cycle; absent only when a prover without the witness
        /// slipped through, which leaves it with nothing to update.
        cycle: Option<HamiltonianCycle>,
        transcript: ZkpTranscript,
        /// The replayed slice, so the supplicant's own queue catches up too.
        replayed: Vec<UpdateEvent>,
    },
    Rejected {
        reason: RejectReason,
        transcript: Option<ZkpTranscript>,
    },
}

/// Runs one full access-control session: the offline-period check, `rounds`
/// proof rounds over the supplicant's openly-presented stale graph, and on
/// acceptance the replay of every update the supplicant missed.
///
/// The boundary rejects: a node offline for exactly the threshold is out.
pub fn handle_access_control<R: Rng + ?Sized>(
    authenticator: &NodeRecord,
    supplicant: &NodeRecord,
    now: f64,
    threshold: f64,
    rounds: usize,
    rng: &mut R,
) -> Result<AccessOutcome, ProtocolError> {
    if authenticator.state != LifeState::OnAuthenticated {
        return Err(ProtocolError::InvalidState {
            expected: "on-authenticated authenticator",
            actual: authenticator.state,
        });
    }
    if !matches!(
        supplicant.state,
        LifeState::Off | LifeState::OutOfService | LifeState::OnToAuthenticate
    ) {
        return Err(ProtocolError::InvalidState {
            expected: "off or out-of-service supplicant",
            actual: supplicant.state,
        });
    }
    let off_since = supplicant.went_off_at.ok_or(ProtocolError::InvalidState {
        expected: "supplicant with a recorded offline start",
        actual: supplicant.state,
    })?;

    if off_since <= now - threshold {
        return Ok(AccessOutcome::Rejected {
            reason: RejectReason::Expired,
            transcript: None,
        });
    }

    let strategy = match &supplicant.cycle {
        Some(cycle) => ProverStrategy::Honest {
            graph: &supplicant.graph,
            cycle,
        },
        // No witness: the best it can do is a blind cheat.
        None => ProverStrategy::Cheat(CheatStrategy::CoinFlip),
    };
    let transcript = run_protocol(strategy, &supplicant.graph, rounds, rng)?;
    if !transcript.accepted {
        return Ok(AccessOutcome::Rejected {
            reason: RejectReason::Isolated,
            transcript: Some(transcript),
        });
    }

    let replayed = authenticator
        .fifo
        .events_after_stage(supplicant.last_seen_stage)?;
    let (graph, cycle) = match &supplicant.cycle {
        Some(cycle) => {
            let (g, c) = apply_replay(&supplicant.graph, cycle, &replayed)?;
            (g, Some(c))
        }
        None => (supplicant.graph.clone(), None),
    };
    Ok(AccessOutcome::ReInserted {
        graph,
        cycle,
        transcript,
        replayed,
    })
}

/// Replays one membership update onto a copy of the secret.
pub fn apply_update(
    graph: &NetworkGraph,
    cycle: &HamiltonianCycle,
    event: &UpdateEvent,
) -> Result<(NetworkGraph, HamiltonianCycle), ProtocolError> {
    match &event.kind {
        UpdateKind::Insertion {
            new_id,
            left,
            right,
            members,
        } => {
            let mut g = graph.clone().with_stage(graph.stage() + 1);
            g.insert_vertex_bare(*new_id);
            for &v in members {
                g.insert_edge(crate::graph::Edge::new(*new_id, v));
            }
            let c = cycle
                .splice(*new_id, *left, *right)
                .ok_or(ProtocolError::Graph(
                    crate::graph::GraphError::DomainMismatch,
                ))?;
            Ok((g, c))
        }
        UpdateKind::Deletion { removed } => {
            Ok(delete_vertex(graph, cycle, *removed, 0)?)
        }
        UpdateKind::ProofOfLife { .. } => Ok((graph.clone(), cycle.clone())),
    }
}

/// Replays a slice of updates in order.
pub fn apply_replay(
    graph: &NetworkGraph,
    cycle: &HamiltonianCycle,
    events: &[UpdateEvent],
) -> Result<(NetworkGraph, HamiltonianCycle), ProtocolError> {
    let mut g = graph.clone();
    let mut c = cycle.clone();
    for event in events {
        let (g2, c2) = apply_update(&g, &c, event)?;
        g = g2;
        c = c2;
    }
    Ok((g, c))
}

/// Decision marker: this node's proof-of-life clock ran out and it should
/// start a broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProofOfLifeAction {
    pub initiator: VertexId,
}

/// Checks one node's clock against the threshold. Recently exempted nodes
/// (see [`exemption_check`]) and anything not fully online stay quiet.
pub fn proof_of_life_tick(
    node: &NodeRecord,
    now: f64,
    threshold: f64,
) -> Option<ProofOfLifeAction> {
    if node.state != LifeState::OnAuthenticated {
        return None;
    }
    if node.clock(now) > threshold && !exemption_check(node, now, threshold) {
        Some(ProofOfLifeAction { initiator: node.id })
    } else {
        None
    }
}

/// True when the node served as an authenticator or deletion broadcaster
/// within the current threshold window; that activity already proves it
/// alive, so it skips initiating its own broadcast.
pub fn exemption_check(node: &NodeRecord, now: f64, threshold: f64) -> bool {
    node.last_service
        .is_some_and(|t| now - t < threshold)
}

/// Removes every vertex whose last proof of life in this node's queue is at
/// least one threshold old. Mutates the pruner's own copy of the secret and
/// appends the deletion events to its queue; the caller broadcasts them.
/// Refused wholesale when the result would fall below `n_min`.
pub fn prune_dead_nodes(
    node: &mut NodeRecord,
    now: f64,
    threshold: f64,
    n_min: usize,
) -> Result<Vec<VertexId>, ProtocolError> {
    let cutoff = now - threshold;
    let dead: Vec<VertexId> = node
        .graph
        .vertices()
        .iter()
        .copied()
        .filter(|&v| v != node.id)
        .filter(|&v| match node.fifo.last_life_of(v) {
            Some(t) => t <= cutoff,
            // No mention inside the retention window: silent even longer.
            None => true,
        })
        .collect();
    if dead.is_empty() {
        return Ok(dead);
    }

    let n = node.graph.vertex_count();
    let minimum = n_min.max(3);
    if n - dead.len() < minimum {
        return Err(ProtocolError::Graph(
            crate::graph::GraphError::NetworkTooSmall {
                would_leave: n - dead.len(),
                minimum,
            },
        ));
    }

    let cycle = node.cycle.clone().ok_or(ProtocolError::InvalidState {
        expected: "pruner holding the cycle",
        actual: node.state,
    })?;
    let mut graph = node.graph.clone();
    let mut cycle = cycle;
    for &id in &dead {
        let (g, c) = delete_vertex(&graph, &cycle, id, n_min)?;
        graph = g;
        cycle = c;
        node.fifo.push(UpdateEvent {
            stage: graph.stage(),
            time: now,
            kind: UpdateKind::Deletion { removed: id },
        });
    }
    node.last_seen_stage = graph.stage();
    node.graph = graph;
    node.cycle = Some(cycle);
    Ok(dead)
}
