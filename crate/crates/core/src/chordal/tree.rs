use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{rip_parents, ChordalError};
use crate::kig::UnGraph;
use crate::netmodel::SpeciesSet;

/// A rooted cluster tree. Cluster 0 is the root and every parent index is
/// smaller than its child's, so edge `e` (for `e >= 1`) joins `parent[e]`
/// and `e` and carries the label `separators[e]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JunctionTree {
    vertices: Vec<String>,
    clusters: Vec<SpeciesSet>,
    parent: Vec<Option<usize>>,
    separators: Vec<SpeciesSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub a: usize,
    pub b: usize,
    pub separator: Vec<String>,
}

/// `{clusters: [[ids]], edges: [{a, b, separator}], root}` with `a` the
/// parent end of each edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeJson {
    pub clusters: Vec<Vec<String>>,
    pub edges: Vec<EdgeJson>,
    pub root: usize,
}

impl JunctionTree {
    /// Builds a tree from raw parts, checking only the shape: a single root
    /// at index 0 and parents preceding children. Labels are taken as given,
    /// so a tree with wrong labels can be built and then rejected by
    /// [`super::verify_junction_tree`].
    pub fn from_parts(
        vertices: Vec<String>,
        clusters: Vec<SpeciesSet>,
        parent: Vec<Option<usize>>,
        separators: Vec<SpeciesSet>,
    ) -> Result<Self, ChordalError> {
        if clusters.is_empty() {
            return Err(ChordalError::NoCliques);
        }
        if parent.len() != clusters.len() || separators.len() != clusters.len() {
            return Err(ChordalError::InvalidTree("length mismatch".into()));
        }
        for (e, p) in parent.iter().enumerate() {
            match (e, p) {
                (0, None) => {}
                (0, Some(_)) => return Err(ChordalError::InvalidTree("cluster 0 must be the root".into())),
                (_, None) => return Err(ChordalError::InvalidTree(format!("cluster {e} has no parent"))),
                (_, Some(p)) if *p >= e => {
                    return Err(ChordalError::InvalidTree(format!("parent of {e} must precede it")))
                }
                _ => {}
            }
        }
        let n = vertices.len();
        if clusters.iter().chain(&separators).flatten().any(|&k| k >= n) {
            return Err(ChordalError::InvalidTree("vertex index out of range".into()));
        }
        Ok(JunctionTree { vertices, clusters, parent, separators })
    }

    /// Tree with labels recomputed as endpoint intersections.
    pub fn with_clusters(
        vertices: Vec<String>,
        clusters: Vec<SpeciesSet>,
        parent: Vec<Option<usize>>,
    ) -> Result<Self, ChordalError> {
        let seps = vec![SpeciesSet::new(); clusters.len()];
        let mut t = JunctionTree::from_parts(vertices, clusters, parent, seps)?;
        t.relabel();
        Ok(t)
    }

    fn relabel(&mut self) {
        for e in 0..self.clusters.len() {
            self.separators[e] = match self.parent[e] {
                Some(p) => self.clusters[p].intersection(&self.clusters[e]).copied().collect(),
                None => SpeciesSet::new(),
            };
        }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn clusters(&self) -> &[SpeciesSet] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, c: usize) -> Option<usize> {
        self.parent[c]
    }

    pub fn children(&self, c: usize) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.parent[e] == Some(c)).collect()
    }

    /// Tree neighbours of cluster `c`.
    pub fn neighbours(&self, c: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.parent[c].into_iter().collect();
        out.extend(self.children(c));
        out
    }

    /// Edges `(parent, child)` in child order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.len()).map(|e| (self.parent[e].unwrap(), e)).collect()
    }

    /// The stored label of the edge between `c` and its parent.
    pub fn separator(&self, child: usize) -> &SpeciesSet {
        &self.separators[child]
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        i < self.len() && j < self.len() && (self.parent[j] == Some(i) || self.parent[i] == Some(j))
    }

    pub fn ids(&self, set: &SpeciesSet) -> Vec<String> {
        set.iter().map(|&k| self.vertices[k].clone()).collect()
    }

    /// Replaces cluster `d` by `cluster`, keeping the tree shape, and
    /// recomputes labels. Used when copying species between modules.
    pub fn with_cluster_contents(&self, clusters: Vec<SpeciesSet>) -> Result<Self, ChordalError> {
        JunctionTree::with_clusters(self.vertices.clone(), clusters, self.parent.clone())
    }

    /// Merges two adjacent clusters. The lower index is kept and holds the
    /// union; the parent of the kept cluster is unchanged; the other
    /// cluster's children move to it; clusters above the removed index shift
    /// down by one.
    pub fn aggregate(&self, i: usize, j: usize) -> Result<JunctionTree, ChordalError> {
        for c in [i, j] {
            if c >= self.len() {
                return Err(ChordalError::UnknownCluster(c));
            }
        }
        if !self.are_adjacent(i, j) {
            return Err(ChordalError::NotAdjacent(i, j));
        }
        let (keep, gone) = (i.min(j), i.max(j));
        let mut clusters = self.clusters.clone();
        let merged: SpeciesSet = clusters[keep].union(&clusters[gone]).copied().collect();
        clusters[keep] = merged;
        let shift = |c: usize| if c > gone { c - 1 } else { c };
        let mut parent = Vec::with_capacity(self.len() - 1);
        let mut kept = Vec::with_capacity(self.len() - 1);
        for (c, cluster) in clusters.into_iter().enumerate() {
            if c == gone {
                continue;
            }
            let p = self.parent[c].map(|p| if p == gone { keep } else { p });
            parent.push(p.map(shift));
            kept.push(cluster);
        }
        JunctionTree::with_clusters(self.vertices.clone(), kept, parent)
    }

    /// Applies aggregations in sequence.
    pub fn aggregate_all(&self, pairs: &[(usize, usize)]) -> Result<JunctionTree, ChordalError> {
        pairs.iter().try_fold(self.clone(), |t, &(i, j)| t.aggregate(i, j))
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            clusters: self.clusters.iter().map(|c| self.ids(c)).collect(),
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b)| EdgeJson { a, b, separator: self.ids(&self.separators[b]) })
                .collect(),
            root: 0,
        }
    }

    /// Rebuilds a tree from its JSON form over the given vertex names.
    pub fn from_json(vertices: Vec<String>, j: &TreeJson) -> Result<Self, ChordalError> {
        let index = |id: &String| {
            vertices
                .iter()
                .position(|v| v == id)
                .ok_or_else(|| ChordalError::InvalidTree(format!("unknown vertex {id}")))
        };
        let clusters: Vec<SpeciesSet> =
            j.clusters.iter().map(|c| c.iter().map(index).collect()).collect::<Result<_, _>>()?;
        if j.root != 0 {
            return Err(ChordalError::InvalidTree("root must be cluster 0".into()));
        }
        let mut parent = vec![None; clusters.len()];
        let mut seps = vec![SpeciesSet::new(); clusters.len()];
        for e in &j.edges {
            if e.b >= clusters.len() || parent[e.b].is_some() {
                return Err(ChordalError::InvalidTree(format!("bad edge {} - {}", e.a, e.b)));
            }
            parent[e.b] = Some(e.a);
            seps[e.b] = e.separator.iter().map(index).collect::<Result<_, _>>()?;
        }
        JunctionTree::from_parts(vertices, clusters, parent, seps)
    }

    /// DOT rendering. Clusters are labelled with their residual (species in
    /// no separator touching the cluster), edges with their separators.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph junction_tree {\n  node [shape=box];\n");
        for c in 0..self.len() {
            let mut shared = SpeciesSet::new();
            for e in self.neighbours(c) {
                shared.extend(self.clusters[c].intersection(&self.clusters[e]).copied());
            }
            let residual: Vec<String> = self.ids(&self.clusters[c].difference(&shared).copied().collect());
            let label = if residual.is_empty() { "(empty)".to_string() } else { residual.join(", ") };
            writeln!(out, "  c{c} [label=\"{label}\", tooltip=\"{}\"];", self.ids(&self.clusters[c]).join(", "))
                .unwrap();
        }
        for (a, b) in self.edges() {
            writeln!(out, "  c{a} -- c{b} [label=\"{}\"];", self.ids(&self.separators[b]).join(", ")).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Clique tree of an RIP-ordered clique list: the parent of C_e is the
/// earliest C_d containing C_e's overlap with all earlier cliques. Cliques
/// of separate components attach to the first clique with an empty label.
pub fn build_clique_tree(vertices: Vec<String>, cliques: &[SpeciesSet]) -> Result<JunctionTree, ChordalError> {
    if cliques.is_empty() {
        return Err(ChordalError::NoCliques);
    }
    let parents = rip_parents(cliques)?;
    JunctionTree::with_clusters(vertices, cliques.to_vec(), parents)
}

/// Aggregates across every separator that is not complete in `g`, first
/// such edge first, until all separators are complete.
pub fn mpd(tree: &JunctionTree, g: &UnGraph) -> Result<JunctionTree, ChordalError> {
    if tree.vertices().len() != g.n() {
        return Err(ChordalError::Inconsistent("vertex counts differ".into()));
    }
    let covered: SpeciesSet = tree.clusters().iter().flatten().copied().collect();
    if covered.len() != g.n() {
        return Err(ChordalError::Inconsistent("clusters do not cover the graph".into()));
    }
    let mut t = tree.clone();
    while let Some((p, c)) = t.edges().into_iter().find(|&(_, c)| !g.is_complete_on(t.separator(c))) {
        t = t.aggregate(p, c)?;
    }
    Ok(t)
}
