//! Disk-range radio: two nodes hear each other iff their Euclidean
//! distance is within the range, boundary inclusive.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::VertexId;

use super::mobility::Arena;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    pub range: f64,
    pub arena: Arena,
}

impl RadioModel {
    pub fn linked(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let dx = a.0 - b.0;
        let dy = a.1 - b.1;
        dx * dx + dy * dy <= self.range * self.range
    }

    /// A hop-count estimate of the network diameter, used to size response
    /// timers.
    pub fn diameter_estimate(&self) -> usize {
        (self.arena.diagonal() / self.range).ceil() as usize + 2
    }
}

/// Symmetric adjacency over the given positions.
pub fn neighbors(
    radio: &RadioModel,
    positions: &BTreeMap<VertexId, (f64, f64)>,
) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
    let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> = positions
        .keys()
        .map(|&v| (v, BTreeSet::new()))
        .collect();
    let items: Vec<(&VertexId, &(f64, f64))> = positions.iter().collect();
    for (i, &(&u, &pu)) in items.iter().enumerate() {
        for &(&v, &pv) in &items[i + 1..] {
            if radio.linked(pu, pv) {
                adj.get_mut(&u).expect("u present").insert(v);
                adj.get_mut(&v).expect("v present").insert(u);
            }
        }
    }
    adj
}

/// Number of links in an adjacency map.
pub fn link_count(adj: &BTreeMap<VertexId, BTreeSet<VertexId>>) -> usize {
    adj.values().map(|s| s.len()).sum::<usize>() / 2
}

/// True when every node can reach every other across the adjacency.
pub fn is_connected(adj: &BTreeMap<VertexId, BTreeSet<VertexId>>) -> bool {
    let Some(&start) = adj.keys().next() else {
        return true;
    };
    let mut seen: BTreeSet<VertexId> = [start].into();
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in &adj[&u] {
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == adj.len()
}
