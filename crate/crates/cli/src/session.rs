//! Interactive modularization state: the network and its graphs, the
//! current junction tree with any species copies, and undo/redo history.

use std::fmt;

use serde::{Deserialize, Serialize};
use skm::chordal::{
    build_clique_tree, cliques_rip, minimal_triangulation, mpd, verify_junction_tree, ChordalError, JunctionTree,
    Triangulation, TreeJson,
};
use skm::kig::{build_kig, DiGraph, UnGraph};
use skm::modcheck::{derive_modularization, validate_modularization, ModError, ModuleReport, Modularization, Move};
use skm::ReactionNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TreeMode {
    /// Clique tree of the minimal triangulation.
    Cliques,
    /// Maximal prime subgraph decomposition.
    Mpd,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionError {
    NotAdjacent(usize, usize),
    UnknownCluster(usize),
    NothingToUndo,
    NothingToRedo,
    InvalidCopy(String),
    /// The pipeline produced something that fails its own checks.
    Internal(String),
}

impl SessionError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::NotAdjacent(..) => "not_adjacent",
            SessionError::UnknownCluster(_) => "unknown_cluster",
            SessionError::NothingToUndo => "nothing_to_undo",
            SessionError::NothingToRedo => "nothing_to_redo",
            SessionError::InvalidCopy(_) => "invalid_copy",
            SessionError::Internal(_) => "internal",
        }
    }
}

impl fmt::Display for SessionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionError::NotAdjacent(i, j) => write!(f, "clusters {i} and {j} are not adjacent"),
            SessionError::UnknownCluster(c) => write!(f, "no cluster {c}"),
            SessionError::NothingToUndo => write!(f, "nothing to undo"),
            SessionError::NothingToRedo => write!(f, "nothing to redo"),
            SessionError::InvalidCopy(m) => write!(f, "{m}"),
            SessionError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for SessionError {}

impl From<ChordalError> for SessionError {
    fn from(e: ChordalError) -> Self {
        match e {
            ChordalError::NotAdjacent(i, j) => SessionError::NotAdjacent(i, j),
            ChordalError::UnknownCluster(c) => SessionError::UnknownCluster(c),
            e => SessionError::Internal(e.to_string()),
        }
    }
}

impl From<ModError> for SessionError {
    fn from(e: ModError) -> Self {
        match e {
            ModError::InvalidMove { .. } | ModError::UnknownModule(_) => SessionError::InvalidCopy(e.to_string()),
            e => SessionError::Internal(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct State {
    tree: JunctionTree,
    /// Copies applied on top of the tree's modules.
    copies: Vec<Move>,
}

pub struct Session {
    net: ReactionNetwork,
    kig: DiGraph,
    undirected: UnGraph,
    triangulation: Triangulation,
    state: State,
    undo: Vec<State>,
    redo: Vec<State>,
    modularization: Modularization,
    report: ModuleReport,
    revision: u64,
}

/// The tree the session starts from, or returns to on reset.
pub fn initial_tree(
    net: &ReactionNetwork,
    kig: &DiGraph,
    mode: TreeMode,
) -> Result<(Triangulation, JunctionTree), SessionError> {
    let u = kig.undirected();
    let tri = minimal_triangulation(&u);
    let cliques = cliques_rip(&tri.result)?;
    let ids: Vec<String> = net.species().iter().map(|s| s.id.clone()).collect();
    let tree = build_clique_tree(ids, &cliques)?;
    let tree = match mode {
        TreeMode::Cliques => tree,
        TreeMode::Mpd => mpd(&tree, &u)?,
    };
    Ok((tri, tree))
}

impl Session {
    pub fn new(net: ReactionNetwork, mode: TreeMode) -> Result<Self, SessionError> {
        let kig = build_kig(&net);
        let undirected = kig.undirected();
        let (triangulation, tree) = initial_tree(&net, &kig, mode)?;
        let state = State { tree, copies: Vec::new() };
        let (modularization, report) = Self::derive(&net, &kig, &undirected, &triangulation, &state)?;
        Ok(Session {
            net,
            kig,
            undirected,
            triangulation,
            state,
            undo: Vec::new(),
            redo: Vec::new(),
            modularization,
            report,
            revision: 0,
        })
    }

    fn derive(
        net: &ReactionNetwork,
        kig: &DiGraph,
        u: &UnGraph,
        tri: &Triangulation,
        state: &State,
    ) -> Result<(Modularization, ModuleReport), SessionError> {
        let check = verify_junction_tree(&state.tree, u, &tri.result);
        if !check.passed() {
            return Err(SessionError::Internal(format!("junction tree check failed: {check}")));
        }
        let m = derive_modularization(&state.tree).copy_species(&state.copies)?;
        let report = validate_modularization(net, kig, &m)?;
        Ok((m, report))
    }

    fn commit(&mut self, next: State, clear_redo: bool) -> Result<(), SessionError> {
        let (m, report) = Self::derive(&self.net, &self.kig, &self.undirected, &self.triangulation, &next)?;
        let prev = std::mem::replace(&mut self.state, next);
        self.undo.push(prev);
        if clear_redo {
            self.redo.clear();
        }
        self.modularization = m;
        self.report = report;
        self.revision += 1;
        Ok(())
    }

    pub fn net(&self) -> &ReactionNetwork {
        &self.net
    }

    pub fn kig(&self) -> &DiGraph {
        &self.kig
    }

    pub fn undirected(&self) -> &UnGraph {
        &self.undirected
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn tree(&self) -> &JunctionTree {
        &self.state.tree
    }

    pub fn copies(&self) -> &[Move] {
        &self.state.copies
    }

    pub fn modularization(&self) -> &Modularization {
        &self.modularization
    }

    pub fn report(&self) -> &ModuleReport {
        &self.report
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn can_undo(&self) -> bool {
        !self.undo.is_empty()
    }

    pub fn can_redo(&self) -> bool {
        !self.redo.is_empty()
    }

    /// Merges two adjacent clusters. Copies refer to module indices of the
    /// old tree, so they are dropped; undo restores them.
    pub fn aggregate(&mut self, i: usize, j: usize) -> Result<(), SessionError> {
        let tree = self.state.tree.aggregate(i, j)?;
        self.commit(State { tree, copies: Vec::new() }, true)
    }

    pub fn copy(&mut self, moves: &[Move]) -> Result<(), SessionError> {
        // validate against the current modules before recording
        self.modularization.copy_species(moves)?;
        let mut copies = self.state.copies.clone();
        copies.extend(moves.iter().cloned());
        self.commit(State { tree: self.state.tree.clone(), copies }, true)
    }

    pub fn undo(&mut self) -> Result<(), SessionError> {
        let prev = self.undo.pop().ok_or(SessionError::NothingToUndo)?;
        let (m, report) = Self::derive(&self.net, &self.kig, &self.undirected, &self.triangulation, &prev)?;
        self.redo.push(std::mem::replace(&mut self.state, prev));
        self.modularization = m;
        self.report = report;
        self.revision += 1;
        Ok(())
    }

    pub fn redo(&mut self) -> Result<(), SessionError> {
        let next = self.redo.pop().ok_or(SessionError::NothingToRedo)?;
        self.commit(next, false)
    }

    /// Replaces the tree with a fresh clique tree or MPD; undoable.
    pub fn reset(&mut self, mode: TreeMode) -> Result<(), SessionError> {
        let (_, tree) = initial_tree(&self.net, &self.kig, mode)?;
        self.commit(State { tree, copies: Vec::new() }, true)
    }

    pub fn tree_json(&self) -> TreeJson {
        self.state.tree.to_json()
    }

    /// Numbered cluster listing with residual-first labels and separators.
    pub fn listing(&self) -> String {
        let t = &self.state.tree;
        let m = &self.modularization;
        let mut out = String::new();
        for c in 0..t.len() {
            let parent = match t.parent(c) {
                Some(p) => format!(" parent {p} via {{{}}}", t.ids(t.separator(c)).join(", ")),
                None => " root".to_string(),
            };
            out.push_str(&format!("[{c}] {}  {{{}}}{parent}\n", m.label(c), m.ids(&m.modules[c]).join(", ")));
        }
        out
    }
}
