//! Vertex relabelings: the isomorphism half of the zero-knowledge rounds.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{GraphError, VertexId};

/// A bijection on a vertex set. Composable and invertible; randomly drawn
/// permutations drive both the joint cycle generation and the per-round
/// blinding of the proof protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: BTreeMap<VertexId, VertexId>,
}

impl Permutation {
    pub fn identity(domain: &BTreeSet<VertexId>) -> Self {
        Self {
            map: domain.iter().map(|&v| (v, v)).collect(),
        }
    }

    /// Builds a permutation from an explicit mapping, rejecting anything
    /// that is not a bijection from its domain onto itself.
    pub fn from_map(map: BTreeMap<VertexId, VertexId>) -> Result<Self, GraphError> {
        let domain: BTreeSet<VertexId> = map.keys().copied().collect();
        let image: BTreeSet<VertexId> = map.values().copied().collect();
        if domain != image {
            return Err(GraphError::DomainMismatch);
        }
        Ok(Self { map })
    }

    /// Draws a uniform random permutation of `domain`.
    pub fn random<R: Rng + ?Sized>(domain: &BTreeSet<VertexId>, rng: &mut R) -> Self {
        let keys: Vec<VertexId> = domain.iter().copied().collect();
        let mut images = keys.clone();
        images.shuffle(rng);
        Self {
            map: keys.into_iter().zip(images).collect(),
        }
    }

    pub fn domain(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.map.keys().copied()
    }

    pub fn domain_set(&self) -> BTreeSet<VertexId> {
        self.map.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, v: VertexId) -> Option<VertexId> {
        self.map.get(&v).copied()
    }

    /// Composition `next ∘ self`: applies `self` first, then `next`.
    pub fn then(&self, next: &Permutation) -> Result<Permutation, GraphError> {
        if self.domain_set() != next.domain_set() {
            return Err(GraphError::MismatchedDomains);
        }
        let map = self
            .map
            .iter()
            .map(|(&k, &v)| (k, next.apply(v).expect("image inside shared domain")))
            .collect();
        Ok(Permutation { map })
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            map: self.map.iter().map(|(&k, &v)| (v, k)).collect(),
        }
    }

    /// Text form used when a permutation travels in a protocol message;
    /// one `v image` line per domain element, sorted by `v`.
    pub fn canonical_text(&self) -> String {
        let mut out = format!("perm {}\n", self.map.len());
        for (k, v) in &self.map {
            out.push_str(&format!("{k} {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn domain(ids: &[u32]) -> BTreeSet<VertexId> {
        ids.iter().map(|&i| vid(i)).collect()
    }

    #[test]
    fn identity_maps_everything_to_itself() {
        let p = Permutation::identity(&domain(&[1, 2, 3]));
        assert_eq!(p.apply(vid(2)), Some(vid(2)));
    }

    #[test]
    fn from_map_rejects_non_bijections() {
        let mut map = BTreeMap::new();
        map.insert(vid(1), vid(2));
        map.insert(vid(2), vid(2));
        assert_eq!(
            Permutation::from_map(map).unwrap_err(),
            GraphError::DomainMismatch
        );
    }

    #[test]
    fn composition_applies_left_to_right() {
        let swap = Permutation::from_map(
            [(vid(1), vid(2)), (vid(2), vid(1)), (vid(3), vid(3))].into(),
        )
        .unwrap();
        let rot = Permutation::from_map(
            [(vid(1), vid(2)), (vid(2), vid(3)), (vid(3), vid(1))].into(),
        )
        .unwrap();
        let composed = swap.then(&rot).unwrap();
        // 1 -> 2 -> 3
        assert_eq!(composed.apply(vid(1)), Some(vid(3)));
    }

    #[test]
    fn inverse_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = domain(&[1, 2, 3, 4, 5, 6, 7]);
        let p = Permutation::random(&d, &mut rng);
        let id = p.then(&p.inverse()).unwrap();
        assert_eq!(id, Permutation::identity(&d));
    }

    #[test]
    fn random_permutations_differ_across_seeds() {
        let d = domain(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let a = Permutation::random(&d, &mut ChaCha8Rng::seed_from_u64(1));
        let b = Permutation::random(&d, &mut ChaCha8Rng::seed_from_u64(2));
        assert_ne!(a, b);
    }
}
