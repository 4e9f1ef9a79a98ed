//! Chordality, minimal triangulation (MCS-M), clique extraction in running
//! intersection order, junction trees and their aggregation.

mod tree;
mod verify;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

use crate::kig::UnGraph;
use crate::netmodel::SpeciesSet;

pub use tree::{mpd, build_clique_tree, EdgeJson, JunctionTree, TreeJson};
pub use verify::verify_junction_tree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChordalError {
    #[error("graph is not chordal")]
    NotChordal,
    #[error("clique order violates the running intersection property at clique {0}")]
    RipViolated(usize),
    #[error("no cliques given")]
    NoCliques,
    #[error("clusters {0} and {1} are not adjacent in the tree")]
    NotAdjacent(usize, usize),
    #[error("cluster index {0} out of range")]
    UnknownCluster(usize),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("tree and graph are inconsistent: {0}")]
    Inconsistent(String),
}

/// Maximum cardinality search. Starts at the lowest index and breaks weight
/// ties by lowest index. Returns vertices in visit order.
pub fn mcs_order(g: &UnGraph) -> Vec<usize> {
    let n = g.n();
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n).filter(|&v| !done[v]).max_by_key(|&v| (weight[v], Reverse(v))).unwrap();
        done[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !done[w] {
                weight[w] += 1;
            }
        }
    }
    order
}

/// Whether `order` (first eliminated first) is a perfect elimination
/// ordering of `g`.
pub fn is_perfect_elimination_order(g: &UnGraph, order: &[usize]) -> bool {
    let n = g.n();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    order.iter().all(|&v| {
        let later: Vec<usize> = g.neighbors(v).iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        match later.iter().min_by_key(|&&w| pos[w]) {
            None => true,
            Some(&u) => later.iter().all(|&w| w == u || g.has_edge(u, w)),
        }
    })
}

/// Chordality test. Returns a perfect elimination ordering when chordal.
pub fn is_chordal(g: &UnGraph) -> Option<Vec<usize>> {
    let mut peo = mcs_order(g);
    peo.reverse();
    is_perfect_elimination_order(g, &peo).then_some(peo)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Triangulation {
    #[serde(skip)]
    pub base: UnGraph,
    pub fill_edges: Vec<(usize, usize)>,
    #[serde(skip)]
    pub result: UnGraph,
    /// Minimal elimination ordering, first eliminated first.
    pub elimination_order: Vec<usize>,
}

/// MCS-M minimal triangulation. A vertex u gains weight (and a fill edge to
/// the chosen vertex v when not adjacent) whenever some path from v to u
/// through unnumbered vertices has all inner weights strictly below w(u).
pub fn minimal_triangulation(g: &UnGraph) -> Triangulation {
    let n = g.n();
    let mut weight = vec![0usize; n];
    let mut numbered = vec![false; n];
    let mut result = g.clone();
    let mut fill = Vec::new();
    let mut selection = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n).filter(|&v| !numbered[v]).max_by_key(|&v| (weight[v], Reverse(v))).unwrap();
        // bottleneck[u]: the least possible maximum inner weight on a path
        // from v to u through unnumbered vertices, -1 when adjacent.
        let mut bottleneck = vec![i64::MAX; n];
        let mut heap = BinaryHeap::new();
        bottleneck[v] = -1;
        heap.push(Reverse((-1i64, v)));
        while let Some(Reverse((b, x))) = heap.pop() {
            if b > bottleneck[x] {
                continue;
            }
            let through = if x == v { -1 } else { b.max(weight[x] as i64) };
            for &y in g.neighbors(x) {
                if numbered[y] || y == v {
                    continue;
                }
                if through < bottleneck[y] {
                    bottleneck[y] = through;
                    heap.push(Reverse((through, y)));
                }
            }
        }
        let reached: Vec<usize> =
            (0..n).filter(|&u| u != v && !numbered[u] && bottleneck[u] < weight[u] as i64).collect();
        for u in reached {
            weight[u] += 1;
            if !g.has_edge(u, v) {
                fill.push((u.min(v), u.max(v)));
                result.add_edge(u, v);
            }
        }
        numbered[v] = true;
        selection.push(v);
    }
    fill.sort_unstable();
    selection.reverse();
    Triangulation { base: g.clone(), fill_edges: fill, result, elimination_order: selection }
}

/// Maximal cliques of a chordal graph in running intersection order.
pub fn cliques_rip(g: &UnGraph) -> Result<Vec<SpeciesSet>, ChordalError> {
    if is_chordal(g).is_none() {
        return Err(ChordalError::NotChordal);
    }
    let order = mcs_order(g);
    let mut seen = vec![false; g.n()];
    let mut candidates: Vec<SpeciesSet> = Vec::new();
    for &v in &order {
        let mut c: SpeciesSet = g.neighbors(v).iter().copied().filter(|&w| seen[w]).collect();
        c.insert(v);
        seen[v] = true;
        candidates.push(c);
    }
    let maximal: Vec<SpeciesSet> = candidates
        .iter()
        .enumerate()
        .filter(|(i, c)| !candidates.iter().enumerate().any(|(j, o)| j != *i && o.len() > c.len() && c.is_subset(o)))
        .map(|(_, c)| c.clone())
        .collect();
    debug_assert!(rip_parents(&maximal).is_ok());
    Ok(maximal)
}

/// For each clique after the first, the smallest earlier index d with
/// C_e ∩ (C_1 ∪ .. ∪ C_{e-1}) ⊆ C_d.
pub fn rip_parents(cliques: &[SpeciesSet]) -> Result<Vec<Option<usize>>, ChordalError> {
    let mut union = BTreeSet::new();
    let mut parents = Vec::with_capacity(cliques.len());
    for (e, c) in cliques.iter().enumerate() {
        if e == 0 {
            parents.push(None);
        } else {
            let overlap: SpeciesSet = c.intersection(&union).copied().collect();
            let d = (0..e).find(|&d| overlap.is_subset(&cliques[d])).ok_or(ChordalError::RipViolated(e))?;
            parents.push(Some(d));
        }
        union.extend(c.iter().copied());
    }
    Ok(parents)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub fn cycle(n: usize) -> UnGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        UnGraph::from_edges(n, &edges)
    }

    /// g~ of the six-reaction gene network, vertices g R P P2 gP2.
    pub fn example21_graph() -> UnGraph {
        let mut g = UnGraph::new(["g", "R", "P", "P2", "gP2"].map(String::from).to_vec());
        for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 3), (3, 4), (0, 4)] {
            g.add_edge(a, b);
        }
        g
    }

    /// Chordality by exhaustive search for a chordless cycle of length >= 4.
    pub fn brute_chordal(g: &UnGraph) -> bool {
        fn extend(g: &UnGraph, path: &mut Vec<usize>) -> bool {
            let last = *path.last().unwrap();
            for w in g.neighbors(last).iter().copied() {
                if path.contains(&w) {
                    continue;
                }
                // w must not touch inner path vertices
                let inner_touch = path[1..path.len() - 1].iter().any(|&p| g.has_edge(p, w));
                if inner_touch {
                    continue;
                }
                path.push(w);
                if path.len() >= 4 && g.has_edge(w, path[0]) {
                    return true;
                }
                if !g.has_edge(w, path[0]) && extend(g, path) {
                    return true;
                }
                path.pop();
            }
            false
        }
        (0..g.n()).all(|s| {
            g.neighbors(s).iter().all(|&t| {
                let mut path = vec![s, t];
                !extend(g, &mut path)
            })
        })
    }

    pub fn arb_graph(max_n: usize) -> impl Strategy<Value = UnGraph> {
        (1usize..=max_n).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..(n * 2 + 1)).prop_map(move |e| UnGraph::from_edges(n, &e))
        })
    }

    #[test]
    fn chordality_examples() {
        assert!(is_chordal(&cycle(4)).is_none());
        assert!(is_chordal(&cycle(3)).is_some());
        assert!(is_chordal(&example21_graph()).is_none());
        assert!(is_chordal(&UnGraph::with_order(0)).is_some());
    }

    #[test]
    fn triangulate_four_cycle() {
        let t = minimal_triangulation(&cycle(4));
        assert_eq!(t.fill_edges.len(), 1);
        assert!(is_chordal(&t.result).is_some());
        let t = minimal_triangulation(&cycle(3));
        assert!(t.fill_edges.is_empty());
    }

    #[test]
    fn triangulate_example21() {
        let t = minimal_triangulation(&example21_graph());
        // one chord of the 4-cycle g-R-P-P2; with lowest-index tie breaking
        // MCS-M picks R-P2
        assert_eq!(t.fill_edges, vec![(1, 3)]);
        assert!(is_chordal(&t.result).is_some());
        let cliques = cliques_rip(&t.result).unwrap();
        assert_eq!(
            cliques,
            vec![SpeciesSet::from([0, 1, 3]), SpeciesSet::from([1, 2, 3]), SpeciesSet::from([0, 3, 4])]
        );
        assert_eq!(rip_parents(&cliques).unwrap(), vec![None, Some(0), Some(0)]);
    }

    #[test]
    fn cliques_with_chord_g_p() {
        let mut gt = example21_graph();
        gt.add_edge(0, 2);
        let cliques = cliques_rip(&gt).unwrap();
        let named: Vec<Vec<&str>> =
            cliques.iter().map(|c| c.iter().map(|&k| gt.vertices()[k].as_str()).collect()).collect();
        assert_eq!(named, vec![vec!["g", "R", "P"], vec!["g", "P", "P2"], vec!["g", "P2", "gP2"]]);
        assert_eq!(rip_parents(&cliques).unwrap(), vec![None, Some(0), Some(1)]);
    }

    #[test]
    fn cliques_of_complete_and_disconnected() {
        let mut k4 = UnGraph::with_order(4);
        for a in 0..4 {
            for b in a + 1..4 {
                k4.add_edge(a, b);
            }
        }
        assert_eq!(cliques_rip(&k4).unwrap(), vec![SpeciesSet::from([0, 1, 2, 3])]);
        let two = UnGraph::from_edges(4, &[(0, 1), (2, 3)]);
        let cl = cliques_rip(&two).unwrap();
        assert_eq!(cl, vec![SpeciesSet::from([0, 1]), SpeciesSet::from([2, 3])]);
        assert_eq!(rip_parents(&cl).unwrap(), vec![None, Some(0)]);
        assert_eq!(cliques_rip(&cycle(4)), Err(ChordalError::NotChordal));
    }

    #[test]
    fn rip_violation_detected() {
        let bad = vec![SpeciesSet::from([0, 1]), SpeciesSet::from([2, 3]), SpeciesSet::from([1, 2])];
        assert_eq!(rip_parents(&bad), Err(ChordalError::RipViolated(2)));
    }

    proptest! {
        #[test]
        fn chordality_matches_brute_force(g in arb_graph(7)) {
            prop_assert_eq!(is_chordal(&g).is_some(), brute_chordal(&g));
        }

        #[test]
        fn triangulation_is_minimal(g in arb_graph(7)) {
            let t = minimal_triangulation(&g);
            prop_assert!(brute_chordal(&t.result));
            for &(a, b) in &t.fill_edges {
                prop_assert!(!g.has_edge(a, b));
                let mut less = t.result.clone();
                less.remove_edge(a, b);
                prop_assert!(!brute_chordal(&less));
            }
            prop_assert!(is_perfect_elimination_order(&t.result, &t.elimination_order));
        }

        #[test]
        fn cliques_are_maximal_and_rip(g in arb_graph(7)) {
            let t = minimal_triangulation(&g);
            let cl = cliques_rip(&t.result).unwrap();
            prop_assert!(rip_parents(&cl).is_ok());
            for (i, c) in cl.iter().enumerate() {
                prop_assert!(t.result.is_complete_on(c));
                // maximal: no outside vertex adjacent to all of c
                for v in (0..g.n()).filter(|v| !c.contains(v)) {
                    prop_assert!(!c.iter().all(|&w| t.result.has_edge(v, w)));
                }
                for (j, o) in cl.iter().enumerate() {
                    prop_assert!(i == j || !c.is_subset(o));
                }
            }
            // every edge lies in some clique
            for (a, b) in t.result.edges() {
                prop_assert!(cl.iter().any(|c| c.contains(&a) && c.contains(&b)));
            }
        }
    }
}
