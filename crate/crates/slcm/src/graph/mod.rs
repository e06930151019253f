//! Graph and Hamiltonian-cycle algebra for the group secret.
//!
//! The public half of the secret is an undirected graph [`NetworkGraph`];
//! the private half is a [`HamiltonianCycle`] planted in it. All values are
//! immutable after construction: the stage operations in [`ops`] return new
//! values instead of mutating in place, so sharing across threads is safe.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

mod cycle;
mod ops;
mod permutation;

pub use cycle::HamiltonianCycle;
pub use ops::{
    apply_permutation, brute_force_find_cycle, complete_graph, delete_vertex,
    generate_initial_cycle, insert_vertex, permute_graph, verify_cycle, BRUTE_FORCE_LIMIT,
};
pub use permutation::Permutation;

/// Errors produced by graph and cycle operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("a cycle needs at least 3 vertices, found {found}")]
    FewerThanThreeVertices { found: usize },
    #[error("participant permutations act on different vertex sets")]
    MismatchedDomains,
    #[error("edge density infeasible for {n} vertices: m = {m}")]
    InfeasibleDensity { n: usize, m: usize },
    #[error("2m = {double_m} is not divisible by n = {n}")]
    DensityNotDivisible { double_m: usize, n: usize },
    #[error("vertex {0} already present")]
    DuplicateId(VertexId),
    #[error("could not pick {needed} extra neighbors pairwise non-adjacent on the cycle")]
    InsufficientNonAdjacentCandidates { needed: usize },
    #[error("vertex {0} is not part of the graph")]
    UnknownId(VertexId),
    #[error("operation would shrink the network to {would_leave}, minimum is {minimum}")]
    NetworkTooSmall { would_leave: usize, minimum: usize },
    #[error("permutation domain does not match the vertex set")]
    DomainMismatch,
    #[error("graph has {size} vertices, exhaustive search is capped at {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("malformed graph text: {0}")]
    Parse(String),
}

/// Identifier shared by a graph vertex and the network node it stands for.
/// Always positive; freed identifiers are reused by the lowest-free-id rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(u32);

impl VertexId {
    pub fn new(id: u32) -> Option<Self> {
        (id > 0).then_some(Self(id))
    }

    pub const fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for VertexId {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u32>()
            .ok()
            .and_then(VertexId::new)
            .ok_or_else(|| GraphError::Parse(format!("bad vertex id {s:?}")))
    }
}

/// Convenience constructor used throughout the tests.
pub fn vid(id: u32) -> VertexId {
    VertexId::new(id).expect("vertex ids are positive")
}

/// Undirected edge stored with its endpoints ordered, so the same pair
/// always compares and hashes identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        assert!(a != b, "self-loops are not representable");
        if a < b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }

    pub fn try_new(a: VertexId, b: VertexId) -> Option<Self> {
        (a != b).then(|| Self::new(a, b))
    }

    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.0, self.1)
    }

    pub fn touches(self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }
}

/// The public part of the group secret at some stage `t`: an undirected
/// graph over the identifiers of the live nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    stage: u64,
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<Edge>,
}

impl NetworkGraph {
    pub fn new(stage: u64, vertices: BTreeSet<VertexId>) -> Self {
        Self {
            stage,
            vertices,
            edges: BTreeSet::new(),
        }
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        Edge::try_new(a, b).is_some_and(|e| self.edges.contains(&e))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges.iter().filter(|e| e.touches(v)).count()
    }

    pub fn neighbors(&self, v: VertexId) -> BTreeSet<VertexId> {
        self.edges
            .iter()
            .filter_map(|e| match e.endpoints() {
                (a, b) if a == v => Some(b),
                (a, b) if b == v => Some(a),
                _ => None,
            })
            .collect()
    }

    /// The neighbor group a vertex contributes during graph completion:
    /// its full graph neighborhood.
    pub fn neighbor_group(&self, owner: VertexId) -> NeighborGroup {
        NeighborGroup {
            owner,
            members: self.neighbors(owner),
        }
    }

    pub(crate) fn insert_edge(&mut self, e: Edge) -> bool {
        debug_assert!(self.vertices.contains(&e.0) && self.vertices.contains(&e.1));
        self.edges.insert(e)
    }

    pub(crate) fn with_stage(mut self, stage: u64) -> Self {
        self.stage = stage;
        self
    }

    pub(crate) fn remove_vertex(&mut self, v: VertexId) {
        self.vertices.remove(&v);
        self.edges.retain(|e| !e.touches(v));
    }

    pub(crate) fn insert_vertex_bare(&mut self, v: VertexId) {
        self.vertices.insert(v);
    }

    /// Plain-text form: header `graph n m stage`, then one `u v` line per
    /// edge in sorted order. Doubles as the canonical byte serialization
    /// hashed by commitments.
    pub fn canonical_text(&self) -> String {
        let mut out = format!(
            "graph {} {} {}\n",
            self.vertices.len(),
            self.edges.len(),
            self.stage
        );
        for e in &self.edges {
            out.push_str(&format!("{} {}\n", e.0, e.1));
        }
        out
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        self.canonical_text().into_bytes()
    }

    /// Parses the edge-list text form. Vertices are recovered from edge
    /// endpoints, so graphs with isolated vertices do not round-trip; every
    /// graph carrying a spanning cycle does.
    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| GraphError::Parse("empty".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "graph" {
            return Err(GraphError::Parse(format!("bad header {header:?}")));
        }
        let n: usize = fields[1]
            .parse()
            .map_err(|_| GraphError::Parse("bad vertex count".into()))?;
        let m: usize = fields[2]
            .parse()
            .map_err(|_| GraphError::Parse("bad edge count".into()))?;
        let stage: u64 = fields[3]
            .parse()
            .map_err(|_| GraphError::Parse("bad stage".into()))?;

        let mut vertices = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (u, v) = match (parts.next(), parts.next(), parts.next()) {
                (Some(u), Some(v), None) => (u.parse::<VertexId>()?, v.parse::<VertexId>()?),
                _ => return Err(GraphError::Parse(format!("bad edge line {line:?}"))),
            };
            let edge = Edge::try_new(u, v)
                .ok_or_else(|| GraphError::Parse(format!("self-loop {line:?}")))?;
            vertices.insert(u);
            vertices.insert(v);
            edges.insert(edge);
        }
        if vertices.len() != n || edges.len() != m {
            return Err(GraphError::Parse(format!(
                "header says n={n} m={m}, body has n={} m={}",
                vertices.len(),
                edges.len()
            )));
        }
        Ok(Self {
            stage,
            vertices,
            edges,
        })
    }
}

/// The set of graph neighbors a vertex owns: both of its cycle neighbors
/// plus the extra edges chosen at completion or insertion time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGroup {
    pub owner: VertexId,
    pub members: BTreeSet<VertexId>,
}

impl NeighborGroup {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}
