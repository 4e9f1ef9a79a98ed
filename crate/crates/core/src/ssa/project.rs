use serde::Serialize;

use super::{SsaError, Trajectory};
use crate::netmodel::{Block, PartitionAbd, ReactionNetwork, SpeciesSet};

/// Counting process of the classes of a reaction partition: N^A for
/// M(Δ(A)), or N^{D\*} for the D\* classes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubprocessPath {
    /// The species the components act on.
    pub species: SpeciesSet,
    pub labels: Vec<String>,
    pub classes: Vec<Vec<usize>>,
    /// Block of origin of each class, for D\* paths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Block>>,
    /// Common restriction of the stoichiometry columns of each class to
    /// `species`.
    pub increments: Vec<Vec<i64>>,
    /// (time, class) pairs in time order.
    pub events: Vec<(f64, usize)>,
    pub t_end: f64,
}

fn class_label(net: &ReactionNetwork, class: &[usize]) -> String {
    format!("{{{}}}", class.iter().map(|&m| net.reaction_name(m)).collect::<Vec<_>>().join(","))
}

fn build(
    traj: &Trajectory,
    net: &ReactionNetwork,
    species: &SpeciesSet,
    classes: Vec<Vec<usize>>,
    blocks: Option<Vec<Block>>,
) -> SubprocessPath {
    let mut class_of = vec![None; net.n_reactions()];
    for (c, class) in classes.iter().enumerate() {
        for &m in class {
            class_of[m] = Some(c);
        }
    }
    let events = traj.events.iter().filter_map(|e| class_of[e.reaction].map(|c| (e.time, c))).collect();
    SubprocessPath {
        species: species.clone(),
        labels: classes.iter().map(|c| class_label(net, c)).collect(),
        increments: classes.iter().map(|c| net.column_on(c[0], species)).collect(),
        classes,
        blocks,
        events,
        t_end: traj.t_end,
    }
}

/// N^A: one component per class of M(Δ(A)); events of reactions outside
/// Δ(A) are dropped.
pub fn project_subprocess(traj: &Trajectory, net: &ReactionNetwork, a: &SpeciesSet) -> Result<SubprocessPath, SsaError> {
    let classes = net.subprocess_partition(a)?;
    Ok(build(traj, net, a, classes, None))
}

/// N^{D\*}: one component per class of each D\* block, tagged with the block.
/// An empty block contributes no components.
pub fn project_dstar(traj: &Trajectory, net: &ReactionNetwork, p: &PartitionAbd) -> SubprocessPath {
    let (blocks, classes): (Vec<Block>, Vec<Vec<usize>>) = p.dstar_classes().into_iter().unzip();
    build(traj, net, &p.d, classes, Some(blocks))
}

impl SubprocessPath {
    /// Component counts at time t.
    pub fn counts_at(&self, t: f64) -> Vec<u64> {
        let mut n = vec![0; self.classes.len()];
        for &(_, c) in self.events.iter().take_while(|e| e.0 <= t) {
            n[c] += 1;
        }
        n
    }

    /// X^A(t) rebuilt from the path and the initial levels of its species.
    pub fn state_at(&self, x0: &[i64], t: f64) -> Result<Vec<i64>, SsaError> {
        if x0.len() != self.species.len() {
            return Err(SsaError::StateLength(x0.len(), self.species.len()));
        }
        let mut x = x0.to_vec();
        for &(_, c) in self.events.iter().take_while(|e| e.0 <= t) {
            for (xi, s) in x.iter_mut().zip(&self.increments[c]) {
                *xi += s;
            }
        }
        Ok(x)
    }

    pub fn truncate(&self, t: f64) -> SubprocessPath {
        SubprocessPath {
            events: self.events.iter().copied().take_while(|e| e.0 <= t).collect(),
            t_end: t.min(self.t_end),
            ..self.clone()
        }
    }

    /// Index of the component containing reaction m.
    pub fn class_of(&self, m: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&m))
    }
}
