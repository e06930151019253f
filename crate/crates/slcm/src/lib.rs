//! Self-organizing life cycle management for mobile ad-hoc networks.
//!
//! The group secret is a graph with a planted Hamiltonian cycle: the graph
//! is public, the cycle is shared by legitimate members only. Membership
//! changes splice vertices into or out of both; returning members prove
//! they still hold the cycle through an interactive zero-knowledge proof
//! before receiving the updates they missed. A deterministic discrete-event
//! simulator exercises the whole life cycle over a disk-range radio with
//! random-waypoint mobility and the three-phase go/return/information
//! broadcast, and the metrics layer turns its traces into summary CSVs.

pub mod graph;
pub mod metrics;
pub mod protocol;
pub mod sim;
pub mod zkp;

pub use graph::{
    apply_permutation, brute_force_find_cycle, complete_graph, delete_vertex,
    generate_initial_cycle, insert_vertex, verify_cycle, GraphError, HamiltonianCycle,
    NeighborGroup, NetworkGraph, Permutation, VertexId,
};
pub use zkp::{run_protocol, CheatStrategy, ProverStrategy, ZkpError, ZkpTranscript};
