//! The private half of the group secret: a cyclic vertex ordering.

use super::{Edge, GraphError, Permutation, VertexId};

/// A Hamiltonian cycle stored in canonical form: the sequence starts at the
/// smallest vertex and proceeds toward its smaller cycle neighbor, so two
/// cyclic orderings of the same cycle compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamiltonianCycle {
    order: Vec<VertexId>,
}

impl HamiltonianCycle {
    /// Wraps a vertex sequence, normalizing rotation and direction. The
    /// sequence is not validated against any graph (see `verify_cycle`);
    /// degenerate inputs are kept as-is and simply never verify.
    pub fn new(order: Vec<VertexId>) -> Self {
        Self {
            order: canonicalize(order),
        }
    }

    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.order.contains(&v)
    }

    /// Both cycle neighbors of `v`, or `None` when `v` is absent or the
    /// cycle is degenerate.
    pub fn neighbors_of(&self, v: VertexId) -> Option<(VertexId, VertexId)> {
        if self.order.len() < 3 {
            return None;
        }
        let i = self.order.iter().position(|&x| x == v)?;
        let n = self.order.len();
        Some((self.order[(i + n - 1) % n], self.order[(i + 1) % n]))
    }

    /// True when `a` and `b` sit next to each other on the cycle.
    pub fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.neighbors_of(a)
            .is_some_and(|(p, s)| p == b || s == b)
    }

    /// Consecutive pairs, wrap-around included.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.order.len();
        (0..n).map(move |i| Edge::new(self.order[i], self.order[(i + 1) % n]))
    }

    /// Splices `new` between the adjacent pair `{left, right}`.
    pub fn splice(&self, new: VertexId, left: VertexId, right: VertexId) -> Option<Self> {
        let n = self.order.len();
        let i = (0..n).find(|&i| {
            let a = self.order[i];
            let b = self.order[(i + 1) % n];
            (a == left && b == right) || (a == right && b == left)
        })?;
        let mut order = self.order.clone();
        order.insert(i + 1, new);
        Some(Self::new(order))
    }

    /// Removes `v`, joining its two neighbors directly.
    pub fn without(&self, v: VertexId) -> Option<Self> {
        let i = self.order.iter().position(|&x| x == v)?;
        let mut order = self.order.clone();
        order.remove(i);
        Some(Self::new(order))
    }

    pub fn permuted(&self, p: &Permutation) -> Result<Self, GraphError> {
        let order = self
            .order
            .iter()
            .map(|&v| p.apply(v).ok_or(GraphError::DomainMismatch))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(order))
    }

    /// Single line of space-separated vertex ids in canonical form. Doubles
    /// as the canonical byte serialization hashed by commitments.
    pub fn canonical_text(&self) -> String {
        let ids: Vec<String> = self.order.iter().map(|v| v.to_string()).collect();
        format!("{}\n", ids.join(" "))
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        self.canonical_text().into_bytes()
    }

    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let order = text
            .split_whitespace()
            .map(str::parse::<VertexId>)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(order))
    }
}

/// Rotate so the smallest vertex comes first, then pick the direction whose
/// second element is the smaller of its two neighbors. Total on arbitrary
/// sequences, including ones with repeats.
fn canonicalize(order: Vec<VertexId>) -> Vec<VertexId> {
    let n = order.len();
    if n < 3 {
        return order;
    }
    let min_pos = order
        .iter()
        .enumerate()
        .min_by_key(|&(_, v)| v)
        .map(|(i, _)| i)
        .expect("non-empty");
    let prev = order[(min_pos + n - 1) % n];
    let next = order[(min_pos + 1) % n];
    let mut out = Vec::with_capacity(n);
    if next <= prev {
        for i in 0..n {
            out.push(order[(min_pos + i) % n]);
        }
    } else {
        for i in 0..n {
            out.push(order[(min_pos + n - i) % n]);
        }
    }
    out
}
