//! Commit-challenge-response proof of knowledge of the secret cycle.
//!
//! Each round the prover blinds the public graph with a fresh random
//! relabeling and commits to both the blinded graph and the blinded cycle.
//! The verifier flips a coin: bit 0 demands the relabeling (proving the
//! committed graph really is an isomorph of the public one), bit 1 demands
//! the blinded cycle (proving the prover holds a Hamiltonian cycle of the
//! committed graph). A prover without the cycle can prepare for one branch
//! only, so each round catches it with probability 1/2 and `l` rounds
//! amplify that to `2^-l`.
//!
//! Branch 1 opens the graph commitment as well as the cycle commitment:
//! without that binding a cheater could commit to an unrelated graph whose
//! cycle it knows and win the cycle branch for free. Opening it reveals one
//! extra isomorph of the public graph and never the relabeling, so nothing
//! about the secret leaks.

use std::fmt::Write as _;

use rand::Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{
    permute_graph, verify_cycle, GraphError, HamiltonianCycle, NetworkGraph, Permutation,
};

/// Salt length used by honest parties, and the minimum accepted anywhere.
pub const SALT_LEN: usize = 16;

pub type Salt = [u8; SALT_LEN];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZkpError {
    #[error("salt of {got} bytes is below the {minimum}-byte minimum")]
    SaltTooShort { got: usize, minimum: usize },
    #[error("witness is not a Hamiltonian cycle of the graph")]
    InvalidWitness,
    #[error("round state already answered a challenge")]
    StateAlreadyConsumed,
    #[error("response variant does not match the challenge bit")]
    VariantMismatch,
    #[error("a proof needs at least one round")]
    NoRounds,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A binding, hiding commitment: SHA-256 over payload followed by salt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Commitment([u8; 32]);

impl Commitment {
    pub fn to_hex(self) -> String {
        hex::encode(self.0)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

/// Commits to `payload` under `salt`. Deterministic for identical inputs;
/// salts shorter than [`SALT_LEN`] are refused.
pub fn commit(payload: &[u8], salt: &[u8]) -> Result<Commitment, ZkpError> {
    if salt.len() < SALT_LEN {
        return Err(ZkpError::SaltTooShort {
            got: salt.len(),
            minimum: SALT_LEN,
        });
    }
    let mut hasher = Sha256::new();
    hasher.update(payload);
    hasher.update(salt);
    Ok(Commitment(hasher.finalize().into()))
}

/// The pair of per-round commitments: blinded graph, blinded cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommitmentPair {
    pub graph: Commitment,
    pub cycle: Commitment,
}

/// The verifier's coin for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Challenge {
    /// Bit 0: reveal the relabeling.
    ShowIsomorphism,
    /// Bit 1: reveal the blinded graph and its cycle.
    ShowCycle,
}

impl Challenge {
    pub fn bit(self) -> u8 {
        match self {
            Challenge::ShowIsomorphism => 0,
            Challenge::ShowCycle => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Challenge::ShowIsomorphism),
            1 => Some(Challenge::ShowCycle),
            _ => None,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.gen_bool(0.5) {
            Challenge::ShowCycle
        } else {
            Challenge::ShowIsomorphism
        }
    }
}

/// Prover-private state for one round. Single use: answering a second
/// challenge from the same state is refused.
#[derive(Debug, Clone)]
pub struct RoundState {
    permutation: Permutation,
    permuted_graph: NetworkGraph,
    permuted_cycle: HamiltonianCycle,
    salt_graph: Salt,
    salt_cycle: Salt,
    consumed: bool,
}

impl RoundState {
    pub fn permuted_graph(&self) -> &NetworkGraph {
        &self.permuted_graph
    }

    pub fn permuted_cycle(&self) -> &HamiltonianCycle {
        &self.permuted_cycle
    }
}

/// What the prover sends back for a challenge. Exactly one of the two
/// secrets-adjacent pieces ever appears: the relabeling or the blinded
/// cycle, never both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundResponse {
    Isomorphism {
        permutation: Permutation,
        salt_graph: Salt,
    },
    Cycle {
        graph: NetworkGraph,
        cycle: HamiltonianCycle,
        salt_cycle: Salt,
        salt_graph: Salt,
    },
}

impl RoundResponse {
    pub fn matches(&self, challenge: Challenge) -> bool {
        matches!(
            (self, challenge),
            (RoundResponse::Isomorphism { .. }, Challenge::ShowIsomorphism)
                | (RoundResponse::Cycle { .. }, Challenge::ShowCycle)
        )
    }

    /// Serialized payload size in bytes, used for traffic accounting.
    pub fn wire_size(&self) -> usize {
        match self {
            RoundResponse::Isomorphism { permutation, .. } => {
                permutation.canonical_text().len() + SALT_LEN
            }
            RoundResponse::Cycle { graph, cycle, .. } => {
                graph.canonical_text().len() + cycle.canonical_text().len() + 2 * SALT_LEN
            }
        }
    }
}

fn fresh_salt<R: Rng + ?Sized>(rng: &mut R) -> Salt {
    let mut salt = [0u8; SALT_LEN];
    rng.fill(&mut salt);
    salt
}

/// Honest prover, steps 1-3 of a round: draw a fresh relabeling, blind
/// graph and cycle, commit to both under fresh salts.
pub fn prover_commit<R: Rng + ?Sized>(
    g: &NetworkGraph,
    hc: &HamiltonianCycle,
    rng: &mut R,
) -> Result<(RoundState, CommitmentPair), ZkpError> {
    if !verify_cycle(g, hc) {
        return Err(ZkpError::InvalidWitness);
    }
    let permutation = Permutation::random(g.vertices(), rng);
    let permuted_graph = permute_graph(g, &permutation)?;
    let permuted_cycle = hc.permuted(&permutation)?;
    debug_assert!(verify_cycle(&permuted_graph, &permuted_cycle));
    let salt_graph = fresh_salt(rng);
    let salt_cycle = fresh_salt(rng);
    let pair = CommitmentPair {
        graph: commit(&permuted_graph.canonical_bytes(), &salt_graph)?,
        cycle: commit(&permuted_cycle.canonical_bytes(), &salt_cycle)?,
    };
    Ok((
        RoundState {
            permutation,
            permuted_graph,
            permuted_cycle,
            salt_graph,
            salt_cycle,
            consumed: false,
        },
        pair,
    ))
}

/// Step 5: open the branch the challenge demands.
pub fn prover_respond(
    state: &mut RoundState,
    challenge: Challenge,
) -> Result<RoundResponse, ZkpError> {
    if state.consumed {
        return Err(ZkpError::StateAlreadyConsumed);
    }
    state.consumed = true;
    Ok(match challenge {
        Challenge::ShowIsomorphism => RoundResponse::Isomorphism {
            permutation: state.permutation.clone(),
            salt_graph: state.salt_graph,
        },
        Challenge::ShowCycle => RoundResponse::Cycle {
            graph: state.permuted_graph.clone(),
            cycle: state.permuted_cycle.clone(),
            salt_cycle: state.salt_cycle,
            salt_graph: state.salt_graph,
        },
    })
}

/// Step 6: check a response against the commitments. Returns `false` on
/// any structural or cryptographic mismatch; errors only when the response
/// variant does not even belong to the challenge.
pub fn verifier_check(
    public_g: &NetworkGraph,
    commitments: &CommitmentPair,
    challenge: Challenge,
    response: &RoundResponse,
) -> Result<bool, ZkpError> {
    if !response.matches(challenge) {
        return Err(ZkpError::VariantMismatch);
    }
    Ok(match response {
        RoundResponse::Isomorphism {
            permutation,
            salt_graph,
        } => {
            let Ok(recomputed) = permute_graph(public_g, permutation) else {
                return Ok(false);
            };
            match commit(&recomputed.canonical_bytes(), salt_graph) {
                Ok(c) => c == commitments.graph,
                Err(_) => false,
            }
        }
        RoundResponse::Cycle {
            graph,
            cycle,
            salt_cycle,
            salt_graph,
        } => {
            let graph_ok = commit(&graph.canonical_bytes(), salt_graph)
                .is_ok_and(|c| c == commitments.graph);
            let cycle_ok = commit(&cycle.canonical_bytes(), salt_cycle)
                .is_ok_and(|c| c == commitments.cycle);
            graph_ok && cycle_ok && verify_cycle(graph, cycle)
        }
    })
}

/// Scripted dishonest provers used to measure the soundness bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheatStrategy {
    /// Commit to an unrelated graph with a known cycle; wins bit 1 only.
    FakeGraph,
    /// Commit to a genuine isomorph but garbage in place of the cycle;
    /// wins bit 0 only.
    IsomorphWithoutCycle,
    /// Flip a coin between the two each round.
    CoinFlip,
}

/// Who is proving: an honest holder of the witness, or a scripted cheater.
#[derive(Debug, Clone, Copy)]
pub enum ProverStrategy<'a> {
    Honest {
        graph: &'a NetworkGraph,
        cycle: &'a HamiltonianCycle,
    },
    Cheat(CheatStrategy),
}

/// One completed round as recorded in the transcript.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub commitments: CommitmentPair,
    pub challenge: Challenge,
    pub response: RoundResponse,
    pub ok: bool,
}

/// Full record of one access-control session.
#[derive(Debug, Clone)]
pub struct ZkpTranscript {
    pub rounds: Vec<RoundRecord>,
    pub accepted: bool,
}

impl ZkpTranscript {
    /// Structural secrecy check: every recorded response opens exactly the
    /// branch its challenge demanded, so no round ever exposes both the
    /// relabeling and a cycle.
    pub fn exposure_disjoint(&self) -> bool {
        self.rounds.iter().all(|r| r.response.matches(r.challenge))
    }

    /// Total bytes the prover's responses would occupy on the wire.
    pub fn response_bytes(&self) -> usize {
        self.rounds.iter().map(|r| r.response.wire_size()).sum()
    }

    /// Line-oriented text form: one line per round, then the verdict.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.rounds.iter().enumerate() {
            writeln!(
                out,
                "round {}: C_G={} C_H={} b={} verdict={}",
                i + 1,
                r.commitments.graph.to_hex(),
                r.commitments.cycle.to_hex(),
                r.challenge.bit(),
                if r.ok { "ok" } else { "fail" },
            )
            .expect("write to string");
        }
        writeln!(
            out,
            "verdict: {}",
            if self.accepted { "accepted" } else { "rejected" }
        )
        .expect("write to string");
        out
    }
}

/// A cheater's preparation for one round: commitments plus the responses
/// it is able to give on each branch.
struct CheatRound {
    pair: CommitmentPair,
    iso: RoundResponse,
    cyc: RoundResponse,
}

fn cheat_round<R: Rng + ?Sized>(
    strategy: CheatStrategy,
    public_g: &NetworkGraph,
    rng: &mut R,
) -> Result<CheatRound, ZkpError> {
    let strategy = match strategy {
        CheatStrategy::CoinFlip => {
            if rng.gen_bool(0.5) {
                CheatStrategy::FakeGraph
            } else {
                CheatStrategy::IsomorphWithoutCycle
            }
        }
        s => s,
    };
    match strategy {
        CheatStrategy::FakeGraph => {
            // A cycle graph over the same vertices (plus one chord when the
            // public graph is itself that sparse) has a different edge count
            // than the public graph, so no relabeling can ever explain it.
            use rand::seq::SliceRandom;
            let mut order: Vec<_> = public_g.vertices().iter().copied().collect();
            order.shuffle(rng);
            let fake_cycle = HamiltonianCycle::new(order);
            let mut fake = NetworkGraph::new(public_g.stage(), public_g.vertices().clone());
            for e in fake_cycle.edges() {
                fake.insert_edge(e);
            }
            if fake.edge_count() == public_g.edge_count() {
                let verts: Vec<_> = fake_cycle.order().to_vec();
                for i in 0..verts.len() {
                    for j in i + 2..verts.len() {
                        if !fake.has_edge(verts[i], verts[j]) {
                            fake.insert_edge(crate::graph::Edge::new(verts[i], verts[j]));
                            break;
                        }
                    }
                    if fake.edge_count() != public_g.edge_count() {
                        break;
                    }
                }
            }
            let salt_graph = fresh_salt(rng);
            let salt_cycle = fresh_salt(rng);
            let pair = CommitmentPair {
                graph: commit(&fake.canonical_bytes(), &salt_graph)?,
                cycle: commit(&fake_cycle.canonical_bytes(), &salt_cycle)?,
            };
            // Bit 0 cannot be won; send some relabeling and lose.
            let iso = RoundResponse::Isomorphism {
                permutation: Permutation::random(public_g.vertices(), rng),
                salt_graph,
            };
            let cyc = RoundResponse::Cycle {
                graph: fake,
                cycle: fake_cycle,
                salt_cycle,
                salt_graph,
            };
            Ok(CheatRound { pair, iso, cyc })
        }
        CheatStrategy::IsomorphWithoutCycle => {
            let permutation = Permutation::random(public_g.vertices(), rng);
            let blinded = permute_graph(public_g, &permutation)?;
            // Stand-in "cycle" with a repeated vertex: structurally invalid
            // in every graph, so bit 1 is always lost.
            let mut bogus: Vec<_> = blinded.vertices().iter().copied().collect();
            if let Some(&first) = bogus.first() {
                let last = bogus.len() - 1;
                bogus[last] = first;
            }
            let bogus_cycle = HamiltonianCycle::new(bogus);
            let salt_graph = fresh_salt(rng);
            let salt_cycle = fresh_salt(rng);
            let pair = CommitmentPair {
                graph: commit(&blinded.canonical_bytes(), &salt_graph)?,
                cycle: commit(&bogus_cycle.canonical_bytes(), &salt_cycle)?,
            };
            let iso = RoundResponse::Isomorphism {
                permutation,
                salt_graph,
            };
            let cyc = RoundResponse::Cycle {
                graph: blinded,
                cycle: bogus_cycle,
                salt_cycle,
                salt_graph,
            };
            Ok(CheatRound { pair, iso, cyc })
        }
        CheatStrategy::CoinFlip => unreachable!("resolved above"),
    }
}

/// Runs a full `rounds`-round session against `public_g` and records the
/// transcript. All rounds are played out even after a failure; the session
/// is accepted only when every round verified.
pub fn run_protocol<R: Rng + ?Sized>(
    prover: ProverStrategy<'_>,
    public_g: &NetworkGraph,
    rounds: usize,
    rng: &mut R,
) -> Result<ZkpTranscript, ZkpError> {
    if rounds == 0 {
        return Err(ZkpError::NoRounds);
    }
    let mut records = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let (pair, challenge, response) = match prover {
            ProverStrategy::Honest { graph, cycle } => {
                let (mut state, pair) = prover_commit(graph, cycle, rng)?;
                let challenge = Challenge::random(rng);
                let response = prover_respond(&mut state, challenge)?;
                (pair, challenge, response)
            }
            ProverStrategy::Cheat(strategy) => {
                let round = cheat_round(strategy, public_g, rng)?;
                let challenge = Challenge::random(rng);
                let response = match challenge {
                    Challenge::ShowIsomorphism => round.iso,
                    Challenge::ShowCycle => round.cyc,
                };
                (round.pair, challenge, response)
            }
        };
        let ok = verifier_check(public_g, &pair, challenge, &response)?;
        records.push(RoundRecord {
            commitments: pair,
            challenge,
            response,
            ok,
        });
    }
    let accepted = records.iter().all(|r| r.ok);
    Ok(ZkpTranscript {
        rounds: records,
        accepted,
    })
}
