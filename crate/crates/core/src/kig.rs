//! Kinetic independence graphs: the directed KIG with pa(k) = R[Δ(k)] \ {k},
//! its undirected, moral and fraternized versions, and separation queries.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{ReactionNetwork, SpeciesSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex sets overlap: {0}")]
    Overlap(String),
    #[error("vertex set {0} must be nonempty")]
    Empty(&'static str),
    #[error("vertex index {0} out of range")]
    Index(usize),
    #[error("unknown vertex {0}")]
    Unknown(String),
}

/// `{vertices: [ids], edges: [[id, id]]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

fn quote(id: &str) -> String {
    format!("\"{}\"", id.replace('\\', "\\\\").replace('"', "\\\""))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiGraph {
    vertices: Vec<String>,
    parents: Vec<BTreeSet<usize>>,
}

impl DiGraph {
    pub fn new(vertices: Vec<String>) -> Self {
        let n = vertices.len();
        DiGraph { vertices, parents: vec![BTreeSet::new(); n] }
    }

    /// Adds `from -> to`. Loops are ignored.
    pub fn add_edge(&mut self, from: usize, to: usize) {
        if from != to {
            self.parents[to].insert(from);
        }
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn parents(&self, k: usize) -> &BTreeSet<usize> {
        &self.parents[k]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(&from)
    }

    /// All edges `(from, to)` sorted by `from` then `to`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> =
            self.parents.iter().enumerate().flat_map(|(k, ps)| ps.iter().map(move |&i| (i, k))).collect();
        e.sort_unstable();
        e
    }

    pub fn undirected(&self) -> UnGraph {
        let mut g = UnGraph::new(self.vertices.clone());
        for (i, k) in self.edges() {
            g.add_edge(i, k);
        }
        g
    }

    /// Marries all parents of a common child, then drops directions.
    pub fn moralize(&self) -> UnGraph {
        let mut g = self.undirected();
        for ps in &self.parents {
            let ps: Vec<_> = ps.iter().copied().collect();
            for (x, &i) in ps.iter().enumerate() {
                for &j in &ps[x + 1..] {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices.clone(),
            edges: self.edges().into_iter().map(|(i, k)| [self.vertices[i].clone(), self.vertices[k].clone()]).collect(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph kig {\n");
        for v in &self.vertices {
            writeln!(out, "  {};", quote(v)).unwrap();
        }
        for (i, k) in self.edges() {
            writeln!(out, "  {} -> {};", quote(&self.vertices[i]), quote(&self.vertices[k])).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnGraph {
    vertices: Vec<String>,
    adj: Vec<BTreeSet<usize>>,
}

impl UnGraph {
    pub fn new(vertices: Vec<String>) -> Self {
        let n = vertices.len();
        UnGraph { vertices, adj: vec![BTreeSet::new(); n] }
    }

    /// A graph on vertices named `0..n`.
    pub fn with_order(n: usize) -> Self {
        UnGraph::new((0..n).map(|i| i.to_string()).collect())
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = UnGraph::with_order(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adj[a].remove(&b);
        self.adj[b].remove(&a);
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex(&self, id: &str) -> Result<usize, GraphError> {
        self.vertices.iter().position(|v| v == id).ok_or_else(|| GraphError::Unknown(id.to_string()))
    }

    pub fn vertex_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<SpeciesSet, GraphError> {
        ids.iter().map(|s| self.vertex(s.as_ref())).collect()
    }

    pub fn ids(&self, set: &BTreeSet<usize>) -> Vec<String> {
        set.iter().map(|&k| self.vertices[k].clone()).collect()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.range(a + 1..).map(move |&b| (a, b)))
            .collect()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_complete_on(&self, set: &BTreeSet<usize>) -> bool {
        let v: Vec<_> = set.iter().copied().collect();
        v.iter().enumerate().all(|(x, &a)| v[x + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    /// True iff every path from `a` to `b` meets `d`.
    pub fn is_separated(&self, a: &SpeciesSet, b: &SpeciesSet, d: &SpeciesSet) -> Result<bool, GraphError> {
        Ok(self.separation_witness(a, b, d)?.is_none())
    }

    /// A path from `a` to `b` avoiding `d`, if there is one.
    pub fn separation_witness(
        &self,
        a: &SpeciesSet,
        b: &SpeciesSet,
        d: &SpeciesSet,
    ) -> Result<Option<Vec<usize>>, GraphError> {
        if a.is_empty() {
            return Err(GraphError::Empty("A"));
        }
        if b.is_empty() {
            return Err(GraphError::Empty("B"));
        }
        if let Some(&k) = a.iter().chain(b).chain(d).find(|&&k| k >= self.n()) {
            return Err(GraphError::Index(k));
        }
        for (x, y, name) in [(a, b, "A and B"), (a, d, "A and D"), (b, d, "B and D")] {
            if !x.is_disjoint(y) {
                return Err(GraphError::Overlap(name.to_string()));
            }
        }
        Ok(self.path_avoiding(a, b, d))
    }

    /// Breadth-first search from `from` in the graph with `blocked` deleted.
    pub(crate) fn path_avoiding(
        &self,
        from: &BTreeSet<usize>,
        to: &BTreeSet<usize>,
        blocked: &BTreeSet<usize>,
    ) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.n()];
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::new();
        for &s in from {
            if !blocked.contains(&s) {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            if to.contains(&v) {
                let mut path = vec![v];
                let mut cur = v;
                while prev[cur] != usize::MAX {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &w in &self.adj[v] {
                if !seen[w] && !blocked.contains(&w) {
                    seen[w] = true;
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<BTreeSet<usize>> {
        let mut comp = vec![usize::MAX; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut set = BTreeSet::new();
            let mut stack = vec![s];
            comp[s] = out.len();
            while let Some(v) = stack.pop() {
                set.insert(v);
                for &w in &self.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = out.len();
                        stack.push(w);
                    }
                }
            }
            out.push(set);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices.clone(),
            edges: self.edges().into_iter().map(|(a, b)| [self.vertices[a].clone(), self.vertices[b].clone()]).collect(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph kig {\n");
        for v in &self.vertices {
            writeln!(out, "  {};", quote(v)).unwrap();
        }
        for (a, b) in self.edges() {
            writeln!(out, "  {} -- {};", quote(&self.vertices[a]), quote(&self.vertices[b])).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// The KIG: `i -> k` iff `i` is a reactant of some reaction changing `k`,
/// and `i != k`.
pub fn build_kig(net: &ReactionNetwork) -> DiGraph {
    let mut g = DiGraph::new(net.species().iter().map(|s| s.id.clone()).collect());
    for (m, r) in net.reactions().iter().enumerate() {
        for k in (0..net.n_species()).filter(|&k| net.s(k, m) != 0) {
            for t in &r.reactants {
                g.add_edge(t.species, k);
            }
        }
    }
    g
}

/// The undirected KIG plus an edge between any two species that are both
/// increased by a common reaction.
pub fn fraternize(net: &ReactionNetwork, g: &DiGraph) -> UnGraph {
    let mut u = g.undirected();
    for m in 0..net.n_reactions() {
        let up: Vec<usize> = (0..net.n_species()).filter(|&k| net.s(k, m) > 0).collect();
        for (x, &j) in up.iter().enumerate() {
            for &k in &up[x + 1..] {
                u.add_edge(j, k);
            }
        }
    }
    u
}

/// cl(B) = pa(B) ∪ B.
pub fn closure(g: &DiGraph, b: &SpeciesSet) -> Result<SpeciesSet, GraphError> {
    if b.is_empty() {
        return Err(GraphError::Empty("B"));
    }
    let mut out = b.clone();
    for &k in b {
        if k >= g.n() {
            return Err(GraphError::Index(k));
        }
        out.extend(g.parents(k));
    }
    Ok(out)
}

/// Chemical form of separation for a partition [A, B, D] of the species:
/// no species of A is a reactant of a reaction changing B and vice versa.
pub fn chemical_separation(net: &ReactionNetwork, a: &SpeciesSet, b: &SpeciesSet) -> bool {
    let reactants_of = |set: &SpeciesSet| -> SpeciesSet {
        let delta = net.changed_reactions(set).unwrap_or_default();
        delta.iter().flat_map(|&m| net.reactions()[m].reactant_set()).collect()
    };
    reactants_of(b).is_disjoint(a) && reactants_of(a).is_disjoint(b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationVerdict {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub d: Vec<String>,
    pub graphical: bool,
    pub chemical: bool,
    /// A path from A to B avoiding D when the graphical verdict is false.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalIndependenceReport {
    pub b: Vec<String>,
    pub closure: Vec<String>,
    /// Species whose counting processes N^B is locally independent of.
    pub independent_of: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<SeparationVerdict>,
}

/// Graphical and chemical separation verdicts for disjoint A, B, D.
///
/// When A ∪ B ∪ D is not the whole species set, A is first grown to every
/// species reachable from it without passing through D, using adjacency read
/// from the reaction lists, and B is tested against that grown set. For a
/// true partition this is the plain chemical condition.
pub fn separation_verdict(
    net: &ReactionNetwork,
    g: &DiGraph,
    a: &SpeciesSet,
    b: &SpeciesSet,
    d: &SpeciesSet,
) -> Result<SeparationVerdict, GraphError> {
    let u = g.undirected();
    let witness = u.separation_witness(a, b, d)?;
    let rest: SpeciesSet = (0..net.n_species()).filter(|k| !a.contains(k) && !b.contains(k) && !d.contains(k)).collect();
    let chemical = if rest.is_empty() {
        chemical_separation(net, a, b)
    } else {
        let grown = chemical_reach(net, a, d);
        if !grown.is_disjoint(b) {
            false
        } else {
            let others: SpeciesSet = (0..net.n_species()).filter(|k| !grown.contains(k) && !d.contains(k)).collect();
            chemical_separation(net, &grown, &others)
        }
    };
    Ok(SeparationVerdict {
        a: u.ids(a),
        b: u.ids(b),
        d: u.ids(d),
        graphical: witness.is_none(),
        chemical,
        witness: witness.map(|p| p.iter().map(|&k| u.vertices()[k].clone()).collect()),
    })
}

/// Species reachable from `a` avoiding `d`, where i and k are adjacent when
/// one is a reactant of a reaction that changes the other.
fn chemical_reach(net: &ReactionNetwork, a: &SpeciesSet, d: &SpeciesSet) -> SpeciesSet {
    let mut reached: SpeciesSet = a.clone();
    let mut frontier: Vec<usize> = a.iter().copied().collect();
    while let Some(v) = frontier.pop() {
        for (m, r) in net.reactions().iter().enumerate() {
            let rs = r.reactant_set();
            let changed: Vec<usize> = (0..net.n_species()).filter(|&k| net.s(k, m) != 0).collect();
            let mut next = Vec::new();
            if rs.contains(&v) {
                next.extend(changed.iter().copied());
            }
            if changed.contains(&v) {
                next.extend(rs.iter().copied());
            }
            for w in next {
                if !d.contains(&w) && reached.insert(w) {
                    frontier.push(w);
                }
            }
        }
    }
    reached
}

pub fn local_independence_report(
    net: &ReactionNetwork,
    g: &DiGraph,
    b: &SpeciesSet,
    partition: Option<(&SpeciesSet, &SpeciesSet, &SpeciesSet)>,
) -> Result<LocalIndependenceReport, GraphError> {
    let cl = closure(g, b)?;
    let rest: SpeciesSet = (0..g.n()).filter(|k| !cl.contains(k)).collect();
    let separation = match partition {
        Some((pa, pb, pd)) => Some(separation_verdict(net, g, pa, pb, pd)?),
        None => None,
    };
    let ids = |s: &SpeciesSet| s.iter().map(|&k| g.vertices()[k].clone()).collect();
    Ok(LocalIndependenceReport { b: ids(b), closure: ids(&cl), independent_of: ids(&rest), separation })
}
