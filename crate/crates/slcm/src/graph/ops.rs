//! Stage operations on the group secret: joint generation, completion to
//! the target density, splice insertion, bypass deletion, relabeling, and
//! a small exhaustive solver used as a test oracle.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Edge, GraphError, HamiltonianCycle, NeighborGroup, NetworkGraph, Permutation, VertexId};

/// Exhaustive cycle search refuses anything larger than this.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// How many times insertion re-draws its extra neighbors before giving up
/// on the pairwise non-adjacency constraint.
const EXTRA_PICK_ATTEMPTS: usize = 100;

/// Composes the participants' secret permutations (in the order given,
/// first applied first) and reads the composite off as the cyclic order of
/// the initial secret cycle.
pub fn generate_initial_cycle(
    participant_permutations: &[Permutation],
) -> Result<HamiltonianCycle, GraphError> {
    let Some(first) = participant_permutations.first() else {
        return Err(GraphError::FewerThanThreeVertices { found: 0 });
    };
    let domain = first.domain_set();
    if participant_permutations
        .iter()
        .any(|p| p.domain_set() != domain)
    {
        return Err(GraphError::MismatchedDomains);
    }
    if domain.len() < 3 {
        return Err(GraphError::FewerThanThreeVertices {
            found: domain.len(),
        });
    }
    let mut composite = Permutation::identity(&domain);
    for p in participant_permutations {
        composite = composite.then(p)?;
    }
    let order = domain
        .iter()
        .map(|&v| composite.apply(v).expect("bijection on domain"))
        .collect();
    Ok(HamiltonianCycle::new(order))
}

/// Completes the cycle into a graph with exactly `m` edges in which every
/// vertex owns a neighbor group of size `2m/n`: the planted cycle plus a
/// randomized `(2m/n - 2)`-regular layer of extra edges.
pub fn complete_graph<R: Rng + ?Sized>(
    hc: &HamiltonianCycle,
    m: usize,
    rng: &mut R,
) -> Result<NetworkGraph, GraphError> {
    let n = hc.len();
    if n < 3 {
        return Err(GraphError::FewerThanThreeVertices { found: n });
    }
    if !(2 * m).is_multiple_of(n) {
        return Err(GraphError::DensityNotDivisible { double_m: 2 * m, n });
    }
    let degree = 2 * m / n;
    if m < n || degree > n - 1 || m > n * (n - 1) / 2 {
        return Err(GraphError::InfeasibleDensity { n, m });
    }

    let mut graph = NetworkGraph::new(0, hc.order().iter().copied().collect());
    for e in hc.edges() {
        graph.insert_edge(e);
    }

    let extra_degree = degree - 2;
    if extra_degree == 0 {
        return Ok(graph);
    }

    // Offsets along the cycle order give an exactly regular extra layer
    // that is edge-disjoint from the cycle; degree-preserving edge swaps
    // then randomize it under the seeded generator.
    let order = hc.order();
    let mut extras: Vec<Edge> = Vec::with_capacity(m - n);
    let full_offsets = extra_degree / 2;
    for k in 0..full_offsets {
        let offset = k + 2;
        for i in 0..n {
            extras.push(Edge::new(order[i], order[(i + offset) % n]));
        }
    }
    if extra_degree % 2 == 1 {
        debug_assert!(n.is_multiple_of(2), "odd extra degree requires even n");
        for i in 0..n / 2 {
            extras.push(Edge::new(order[i], order[(i + n / 2) % n]));
        }
    }
    debug_assert_eq!(extras.len(), m - n);

    let mut present: BTreeSet<Edge> = extras.iter().copied().collect();
    debug_assert_eq!(present.len(), extras.len(), "offset layer is simple");
    let cycle_edges: BTreeSet<Edge> = hc.edges().collect();

    let attempts = 20 * extras.len();
    for _ in 0..attempts {
        let i = rng.gen_range(0..extras.len());
        let j = rng.gen_range(0..extras.len());
        if i == j {
            continue;
        }
        let (a, b) = extras[i].endpoints();
        let (c, d) = extras[j].endpoints();
        let (c, d) = if rng.gen_bool(0.5) { (c, d) } else { (d, c) };
        let (Some(e1), Some(e2)) = (Edge::try_new(a, c), Edge::try_new(b, d)) else {
            continue;
        };
        if e1 == e2
            || present.contains(&e1)
            || present.contains(&e2)
            || cycle_edges.contains(&e1)
            || cycle_edges.contains(&e2)
        {
            continue;
        }
        present.remove(&extras[i]);
        present.remove(&extras[j]);
        present.insert(e1);
        present.insert(e2);
        extras[i] = e1;
        extras[j] = e2;
    }

    for e in extras {
        graph.insert_edge(e);
    }
    debug_assert_eq!(graph.edge_count(), m);
    Ok(graph)
}

/// True iff `hc` visits every vertex of `g` exactly once and each
/// consecutive pair (wrap-around included) is an edge of `g`.
pub fn verify_cycle(g: &NetworkGraph, hc: &HamiltonianCycle) -> bool {
    let n = g.vertex_count();
    if hc.len() != n || n < 3 {
        return false;
    }
    let seen: BTreeSet<VertexId> = hc.order().iter().copied().collect();
    if seen.len() != n || &seen != g.vertices() {
        return false;
    }
    hc.edges().all(|e| {
        let (a, b) = e.endpoints();
        g.has_edge(a, b)
    })
}

/// Splices a new vertex into the cycle between a random adjacent pair and
/// wires it to a neighbor group of the current mean degree: the two splice
/// neighbors plus extra vertices no two of which are cycle-adjacent.
pub fn insert_vertex<R: Rng + ?Sized>(
    g: &NetworkGraph,
    hc: &HamiltonianCycle,
    new_id: VertexId,
    rng: &mut R,
) -> Result<(NetworkGraph, HamiltonianCycle, NeighborGroup), GraphError> {
    if g.contains_vertex(new_id) {
        return Err(GraphError::DuplicateId(new_id));
    }
    let n = g.vertex_count();
    if n < 3 {
        return Err(GraphError::NetworkTooSmall {
            would_leave: n,
            minimum: 3,
        });
    }

    let order = hc.order();
    let i = rng.gen_range(0..n);
    let left = order[i];
    let right = order[(i + 1) % n];

    let degree = (2 * g.edge_count() / n).max(2);
    let extras_needed = degree - 2;
    let candidates: Vec<VertexId> = g
        .vertices()
        .iter()
        .copied()
        .filter(|&v| v != left && v != right)
        .collect();
    if extras_needed > candidates.len() {
        return Err(GraphError::InsufficientNonAdjacentCandidates {
            needed: extras_needed,
        });
    }

    let mut extras: Vec<VertexId> = Vec::new();
    if extras_needed > 0 {
        let mut found = false;
        for _ in 0..EXTRA_PICK_ATTEMPTS {
            let pick: Vec<VertexId> = candidates
                .choose_multiple(rng, extras_needed)
                .copied()
                .collect();
            let pairwise_free = pick
                .iter()
                .enumerate()
                .all(|(i, &a)| pick[i + 1..].iter().all(|&b| !hc.adjacent(a, b)));
            if pairwise_free {
                extras = pick;
                found = true;
                break;
            }
        }
        if !found {
            return Err(GraphError::InsufficientNonAdjacentCandidates {
                needed: extras_needed,
            });
        }
    }

    let mut members: BTreeSet<VertexId> = [left, right].into();
    members.extend(extras);
    let group = NeighborGroup {
        owner: new_id,
        members,
    };

    let mut next = g.clone().with_stage(g.stage() + 1);
    next.insert_vertex_bare(new_id);
    for &v in &group.members {
        next.insert_edge(Edge::new(new_id, v));
    }
    let next_cycle = hc
        .splice(new_id, left, right)
        .expect("splice pair was read off the cycle");
    Ok((next, next_cycle, group))
}

/// Removes a vertex, bridging its two cycle neighbors with a bypass edge
/// added to both the graph and the cycle. `n_min` is the termination
/// threshold below which the network must not shrink.
pub fn delete_vertex(
    g: &NetworkGraph,
    hc: &HamiltonianCycle,
    id: VertexId,
    n_min: usize,
) -> Result<(NetworkGraph, HamiltonianCycle), GraphError> {
    if !g.contains_vertex(id) {
        return Err(GraphError::UnknownId(id));
    }
    let n = g.vertex_count();
    let minimum = n_min.max(3);
    if n - 1 < minimum {
        return Err(GraphError::NetworkTooSmall {
            would_leave: n - 1,
            minimum,
        });
    }
    let (left, right) = hc.neighbors_of(id).ok_or(GraphError::UnknownId(id))?;
    let mut next = g.clone().with_stage(g.stage() + 1);
    next.remove_vertex(id);
    next.insert_edge(Edge::new(left, right));
    let next_cycle = hc.without(id).expect("id was on the cycle");
    Ok((next, next_cycle))
}

/// Relabels graph and cycle through a bijection on the vertex set.
pub fn apply_permutation(
    g: &NetworkGraph,
    hc: &HamiltonianCycle,
    p: &Permutation,
) -> Result<(NetworkGraph, HamiltonianCycle), GraphError> {
    let permuted_graph = permute_graph(g, p)?;
    let permuted_cycle = hc.permuted(p)?;
    Ok((permuted_graph, permuted_cycle))
}

/// Graph-only relabeling; the verifier side of the proof protocol uses
/// this to recompute an isomorph without ever holding a cycle.
pub fn permute_graph(g: &NetworkGraph, p: &Permutation) -> Result<NetworkGraph, GraphError> {
    if p.domain_set() != *g.vertices() {
        return Err(GraphError::DomainMismatch);
    }
    let vertices = g
        .vertices()
        .iter()
        .map(|&v| p.apply(v).expect("domain checked"))
        .collect();
    let mut out = NetworkGraph::new(g.stage(), vertices);
    for e in g.edges() {
        let (a, b) = e.endpoints();
        out.insert_edge(Edge::new(
            p.apply(a).expect("domain checked"),
            p.apply(b).expect("domain checked"),
        ));
    }
    Ok(out)
}

/// Backtracking search for any Hamiltonian cycle, capped at
/// [`BRUTE_FORCE_LIMIT`] vertices. Test oracle only; the scheme never
/// searches for cycles, it plants them.
pub fn brute_force_find_cycle(
    g: &NetworkGraph,
) -> Result<Option<HamiltonianCycle>, GraphError> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(GraphError::TooLarge {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n < 3 {
        return Ok(None);
    }
    let verts: Vec<VertexId> = g.vertices().iter().copied().collect();
    let adj: Vec<Vec<usize>> = verts
        .iter()
        .map(|&v| {
            let nb = g.neighbors(v);
            verts
                .iter()
                .enumerate()
                .filter(|(_, w)| nb.contains(w))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();

    let mut path = vec![0usize];
    let mut used = vec![false; n];
    used[0] = true;
    if search(&adj, &mut path, &mut used, n) {
        let order = path.into_iter().map(|i| verts[i]).collect();
        let cycle = HamiltonianCycle::new(order);
        debug_assert!(verify_cycle(g, &cycle));
        Ok(Some(cycle))
    } else {
        Ok(None)
    }
}

fn search(adj: &[Vec<usize>], path: &mut Vec<usize>, used: &mut [bool], n: usize) -> bool {
    let last = *path.last().expect("path starts non-empty");
    if path.len() == n {
        return adj[last].contains(&0);
    }
    for &next in &adj[last] {
        if !used[next] {
            used[next] = true;
            path.push(next);
            if search(adj, path, used, n) {
                return true;
            }
            path.pop();
            used[next] = false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn ids(list: &[u32]) -> BTreeSet<VertexId> {
        list.iter().map(|&i| vid(i)).collect()
    }

    fn cycle_of(list: &[u32]) -> HamiltonianCycle {
        HamiltonianCycle::new(list.iter().map(|&i| vid(i)).collect())
    }

    fn perm(pairs: &[(u32, u32)]) -> Permutation {
        let map: BTreeMap<_, _> = pairs.iter().map(|&(a, b)| (vid(a), vid(b))).collect();
        Permutation::from_map(map).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identity_permutations_compose_to_sorted_cycle() {
        let id = Permutation::identity(&ids(&[1, 2, 3]));
        let hc = generate_initial_cycle(&[id.clone(), id.clone(), id]).unwrap();
        assert_eq!(hc, cycle_of(&[1, 2, 3]));
    }

    #[test]
    fn composition_is_read_off_as_the_cycle() {
        let swap = perm(&[(1, 2), (2, 1), (3, 3)]);
        let identity = Permutation::identity(&ids(&[1, 2, 3]));
        let hc = generate_initial_cycle(&[swap, identity]).unwrap();
        assert_eq!(hc, cycle_of(&[2, 1, 3]));
    }

    #[test]
    fn two_vertices_cannot_form_a_cycle() {
        let id = Permutation::identity(&ids(&[1, 2]));
        assert_eq!(
            generate_initial_cycle(&[id]).unwrap_err(),
            GraphError::FewerThanThreeVertices { found: 2 }
        );
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = Permutation::identity(&ids(&[1, 2, 3]));
        let b = Permutation::identity(&ids(&[1, 2, 4]));
        assert_eq!(
            generate_initial_cycle(&[a, b]).unwrap_err(),
            GraphError::MismatchedDomains
        );
    }

    #[test]
    fn minimal_density_is_exactly_the_cycle() {
        let hc = cycle_of(&[1, 2, 3, 4]);
        let g = complete_graph(&hc, 4, &mut rng(0)).unwrap();
        assert_eq!(g.edge_count(), 4);
        let expected: BTreeSet<Edge> = hc.edges().collect();
        assert_eq!(g.edges().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn completion_hits_edge_count_and_contains_cycle() {
        let hc = cycle_of(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let g = complete_graph(&hc, 30, &mut rng(7)).unwrap();
        assert_eq!(g.edge_count(), 30);
        assert!(verify_cycle(&g, &hc));
        // Every vertex owns a group of exactly 2m/n.
        for &v in g.vertices() {
            assert_eq!(g.neighbor_group(v).size(), 6, "vertex {v}");
        }
    }

    #[test]
    fn infeasible_density_is_rejected() {
        let hc = cycle_of(&[1, 2, 3, 4]);
        assert_eq!(
            complete_graph(&hc, 8, &mut rng(0)).unwrap_err(),
            GraphError::InfeasibleDensity { n: 4, m: 8 }
        );
        assert_eq!(
            complete_graph(&hc, 5, &mut rng(0)).unwrap_err(),
            GraphError::DensityNotDivisible { double_m: 10, n: 4 }
        );
    }

    #[test]
    fn completion_handles_odd_per_vertex_degree() {
        // n even, 2m/n odd: exercises the matching offset.
        let hc = cycle_of(&[1, 2, 3, 4, 5, 6]);
        let g = complete_graph(&hc, 9, &mut rng(3)).unwrap();
        assert_eq!(g.edge_count(), 9);
        for &v in g.vertices() {
            assert_eq!(g.degree(v), 3);
        }
        assert!(verify_cycle(&g, &hc));
    }

    #[test]
    fn verify_rejects_non_cycle_sequences() {
        let hc = cycle_of(&[1, 2, 3]);
        let g = complete_graph(&hc, 3, &mut rng(0)).unwrap();
        assert!(verify_cycle(&g, &hc));

        let square = cycle_of(&[1, 2, 3, 4]);
        let g4 = complete_graph(&square, 4, &mut rng(0)).unwrap();
        assert!(!verify_cycle(&g4, &cycle_of(&[1, 3, 2, 4])));
    }

    #[test]
    fn planted_cycle_always_verifies() {
        let hc = cycle_of(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let g = complete_graph(&hc, 30, &mut rng(42)).unwrap();
        assert!(verify_cycle(&g, &hc));
    }

    #[test]
    fn triangle_insert_uses_only_the_splice_pair() {
        let hc = cycle_of(&[1, 2, 3]);
        let g = complete_graph(&hc, 3, &mut rng(0)).unwrap();
        let (g2, hc2, group) = insert_vertex(&g, &hc, vid(4), &mut rng(5)).unwrap();
        assert_eq!(hc2.len(), 4);
        assert!(verify_cycle(&g2, &hc2));
        assert_eq!(group.size(), 2);
        let (l, r) = hc2.neighbors_of(vid(4)).unwrap();
        assert_eq!(group.members, [l, r].into());
    }

    #[test]
    fn insert_gives_new_vertex_the_mean_degree() {
        let hc = cycle_of(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let g = complete_graph(&hc, 30, &mut rng(9)).unwrap();
        let (g2, hc2, group) = insert_vertex(&g, &hc, vid(11), &mut rng(1)).unwrap();
        assert_eq!(group.size(), 6);
        assert_eq!(g2.degree(vid(11)), 6);
        assert!(verify_cycle(&g2, &hc2));
        // The spliced pair is no longer consecutive on the new cycle.
        let (l, r) = hc2.neighbors_of(vid(11)).unwrap();
        assert!(!hc2.adjacent(l, r));
        // No two extras sit next to each other on the old cycle.
        let extras: Vec<VertexId> = group
            .members
            .iter()
            .copied()
            .filter(|&v| v != l && v != r)
            .collect();
        for (i, &a) in extras.iter().enumerate() {
            for &b in &extras[i + 1..] {
                assert!(!hc.adjacent(a, b));
            }
        }
    }

    #[test]
    fn duplicate_insert_is_rejected() {
        let hc = cycle_of(&[1, 2, 3]);
        let g = complete_graph(&hc, 3, &mut rng(0)).unwrap();
        assert_eq!(
            insert_vertex(&g, &hc, vid(2), &mut rng(0)).unwrap_err(),
            GraphError::DuplicateId(vid(2))
        );
    }

    #[test]
    fn delete_bridges_the_cycle_neighbors() {
        let hc = cycle_of(&[1, 2, 3, 4]);
        let g = complete_graph(&hc, 4, &mut rng(0)).unwrap();
        let (g2, hc2) = delete_vertex(&g, &hc, vid(3), 3).unwrap();
        assert_eq!(hc2, cycle_of(&[1, 2, 4]));
        assert!(g2.has_edge(vid(2), vid(4)));
        assert!(!g2.contains_vertex(vid(3)));
        assert!(verify_cycle(&g2, &hc2));
    }

    #[test]
    fn delete_unknown_id_is_rejected() {
        let hc = cycle_of(&[1, 2, 3, 4]);
        let g = complete_graph(&hc, 4, &mut rng(0)).unwrap();
        assert_eq!(
            delete_vertex(&g, &hc, vid(99), 3).unwrap_err(),
            GraphError::UnknownId(vid(99))
        );
    }

    #[test]
    fn delete_respects_termination_threshold() {
        let hc = cycle_of(&[1, 2, 3, 4, 5]);
        let g = complete_graph(&hc, 5, &mut rng(0)).unwrap();
        assert_eq!(
            delete_vertex(&g, &hc, vid(1), 5).unwrap_err(),
            GraphError::NetworkTooSmall {
                would_leave: 4,
                minimum: 5
            }
        );
    }

    #[test]
    fn delete_leaves_other_degrees_nearly_intact() {
        let hc = cycle_of(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let g = complete_graph(&hc, 30, &mut rng(21)).unwrap();
        let victim = vid(4);
        let (left, right) = hc.neighbors_of(victim).unwrap();
        let (g2, hc2) = delete_vertex(&g, &hc, victim, 3).unwrap();
        assert!(verify_cycle(&g2, &hc2));
        for &v in g2.vertices() {
            let before = g.degree(v) as i64;
            let after = g2.degree(v) as i64;
            if v == left || v == right {
                assert!((-1..=0).contains(&(after - before)), "vertex {v}");
            } else {
                assert!((-1..=0).contains(&(after - before)), "vertex {v}");
                assert!(after >= before - 1);
            }
        }
    }

    #[test]
    fn identity_permutation_changes_nothing() {
        let hc = cycle_of(&[1, 2, 3, 4, 5]);
        let g = complete_graph(&hc, 5, &mut rng(0)).unwrap();
        let p = Permutation::identity(g.vertices());
        let (g2, hc2) = apply_permutation(&g, &hc, &p).unwrap();
        assert_eq!(g2, g);
        assert_eq!(hc2, hc);
    }

    #[test]
    fn relabeling_matches_hand_computation() {
        let hc = cycle_of(&[1, 2, 3]);
        let g = complete_graph(&hc, 3, &mut rng(0)).unwrap();
        let p = perm(&[(1, 3), (2, 1), (3, 2)]);
        let (g2, hc2) = apply_permutation(&g, &hc, &p).unwrap();
        assert_eq!(hc2, cycle_of(&[3, 1, 2]));
        assert!(g2.has_edge(vid(3), vid(1)));
        assert!(g2.has_edge(vid(1), vid(2)));
        assert!(g2.has_edge(vid(2), vid(3)));
        assert!(verify_cycle(&g2, &hc2));
    }

    #[test]
    fn permutation_missing_a_vertex_is_rejected() {
        let hc = cycle_of(&[1, 2, 3, 4]);
        let g = complete_graph(&hc, 4, &mut rng(0)).unwrap();
        let p = perm(&[(1, 2), (2, 1), (3, 3)]);
        assert_eq!(
            apply_permutation(&g, &hc, &p).unwrap_err(),
            GraphError::DomainMismatch
        );
    }

    #[test]
    fn inverse_permutation_round_trips() {
        let hc = cycle_of(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let g = complete_graph(&hc, 16, &mut rng(13)).unwrap();
        let p = Permutation::random(g.vertices(), &mut rng(4));
        let (g2, hc2) = apply_permutation(&g, &hc, &p).unwrap();
        let (g3, hc3) = apply_permutation(&g2, &hc2, &p.inverse()).unwrap();
        assert_eq!(g3, g);
        assert_eq!(hc3, hc);
    }

    #[test]
    fn brute_force_finds_triangle() {
        let hc = cycle_of(&[1, 2, 3]);
        let g = complete_graph(&hc, 3, &mut rng(0)).unwrap();
        let found = brute_force_find_cycle(&g).unwrap().unwrap();
        assert!(verify_cycle(&g, &found));
    }

    #[test]
    fn brute_force_rejects_star() {
        let mut g = NetworkGraph::new(0, ids(&[1, 2, 3, 4]));
        g.insert_edge(Edge::new(vid(1), vid(2)));
        g.insert_edge(Edge::new(vid(1), vid(3)));
        g.insert_edge(Edge::new(vid(1), vid(4)));
        assert!(brute_force_find_cycle(&g).unwrap().is_none());
    }

    #[test]
    fn brute_force_refuses_large_graphs() {
        let hc = HamiltonianCycle::new((1..=13).map(vid).collect());
        let g = complete_graph(&hc, 13, &mut rng(0)).unwrap();
        assert_eq!(
            brute_force_find_cycle(&g).unwrap_err(),
            GraphError::TooLarge { size: 13, limit: 12 }
        );
    }

    #[test]
    fn oracle_agrees_with_construction() {
        for n in [6usize, 8, 10, 12] {
            let hc = HamiltonianCycle::new((1..=n as u32).map(vid).collect());
            let m = 2 * n;
            let g = complete_graph(&hc, m, &mut rng(n as u64)).unwrap();
            let found = brute_force_find_cycle(&g).unwrap();
            assert!(found.is_some(), "n={n}");
            assert!(verify_cycle(&g, &found.unwrap()));
            assert!(verify_cycle(&g, &hc));
        }
    }

    #[test]
    fn completion_is_deterministic_under_a_seed() {
        let hc = cycle_of(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let a = complete_graph(&hc, 30, &mut rng(99)).unwrap();
        let b = complete_graph(&hc, 30, &mut rng(99)).unwrap();
        assert_eq!(a, b);
    }
}
