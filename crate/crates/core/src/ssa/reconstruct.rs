use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{SsaError, SubprocessPath, Trajectory};
use crate::netmodel::{Block, PartitionAbd, ReactionNetwork, ReactionSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    fn own(self) -> Block {
        match self {
            Side::A => Block::A,
            Side::B => Block::B,
        }
    }
}

/// Reactions whose paths one side can recover: those changing the side but
/// not the other, plus ΔD_AB and ΔD_D.
pub fn side_scope(p: &PartitionAbd, side: Side) -> ReactionSet {
    let (own, other) = match side {
        Side::A => (&p.delta_a, &p.delta_b),
        Side::B => (&p.delta_b, &p.delta_a),
    };
    own.difference(other)
        .chain(&p.block(Block::AB).reactions)
        .chain(&p.block(Block::D).reactions)
        .copied()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconstructedPaths {
    pub side: Side,
    /// Event times of every in-scope reaction.
    pub times: BTreeMap<usize, Vec<f64>>,
}

impl ReconstructedPaths {
    /// Events that differ from the true paths: missing, extra or moved.
    pub fn mismatches(&self, traj: &Trajectory, n_reactions: usize) -> usize {
        let truth = traj.reaction_times(n_reactions);
        self.times
            .iter()
            .map(|(&m, got)| {
                let want = &truth[m];
                let common = got.iter().filter(|t| want.iter().any(|w| w.to_bits() == t.to_bits())).count();
                got.len() + want.len() - 2 * common
            })
            .sum()
    }
}

/// Recovers the event times of each in-scope reaction using only the side
/// path (N^A or N^B) and the D\* path:
/// - a D\* event is resolved within its class by the side jump at the same
///   instant (zero for ΔD_D, whose classes are then singletons);
/// - a side event with no D\* event at its time comes from a reaction that
///   changes only this side, identified by its side jump.
///
/// D\* events of the other side's block are not in scope and are skipped.
pub fn reconstruct_reaction_paths(
    net: &ReactionNetwork,
    p: &PartitionAbd,
    side: Side,
    side_path: &SubprocessPath,
    dstar: &SubprocessPath,
) -> Result<ReconstructedPaths, SsaError> {
    let (side_species, other_delta) = match side {
        Side::A => (&p.a, &p.delta_b),
        Side::B => (&p.b, &p.delta_a),
    };
    let own_delta = match side {
        Side::A => &p.delta_a,
        Side::B => &p.delta_b,
    };
    if let Some(&m) = p.delta_a.intersection(&p.delta_b).find(|m| !p.delta_d.contains(m)) {
        return Err(SsaError::Hypothesis(format!("{} changes A and B but not D", net.reaction_name(m))));
    }
    if side_path.species != *side_species || side_path.blocks.is_some() {
        return Err(SsaError::Inconsistent("side path is not the subprocess of the requested side".into()));
    }
    let Some(blocks) = &dstar.blocks else {
        return Err(SsaError::Inconsistent("D* path carries no block tags".into()));
    };
    if dstar.species != p.d {
        return Err(SsaError::Inconsistent("D* path is over the wrong species".into()));
    }

    let mut side_at: HashMap<u64, (usize, bool)> = HashMap::with_capacity(side_path.events.len());
    for &(t, c) in &side_path.events {
        if c >= side_path.increments.len() || side_at.insert(t.to_bits(), (c, false)).is_some() {
            return Err(SsaError::Inconsistent(format!("bad side event at {t}")));
        }
    }
    let zero = vec![0; side_species.len()];
    let pick = |candidates: &mut dyn Iterator<Item = usize>, jump: &[i64], t: f64| -> Result<usize, SsaError> {
        let mut found = candidates.filter(|&m| net.column_on(m, side_species) == jump);
        match (found.next(), found.next()) {
            (Some(m), None) => Ok(m),
            (None, _) => Err(SsaError::Inconsistent(format!("no reaction fits the jump at {t}"))),
            (Some(_), Some(_)) => Err(SsaError::Inconsistent(format!("jump at {t} is ambiguous"))),
        }
    };

    let scope = side_scope(p, side);
    let mut times: BTreeMap<usize, Vec<f64>> = scope.iter().map(|&m| (m, Vec::new())).collect();
    let mut last = f64::NEG_INFINITY;
    for &(t, c) in &dstar.events {
        if c >= dstar.classes.len() || t <= last {
            return Err(SsaError::Inconsistent(format!("bad D* event at {t}")));
        }
        last = t;
        let block = blocks[c];
        let side_event = side_at.get_mut(&t.to_bits());
        if block != side.own() && block != Block::AB {
            // the other side's block, or ΔD_D: the side does not move
            if side_event.is_some() {
                return Err(SsaError::Inconsistent(format!("side jumps with a D-only or other-side event at {t}")));
            }
            if block == Block::D {
                let m = pick(&mut dstar.classes[c].iter().copied(), &zero, t)?;
                times.get_mut(&m).expect("in scope").push(t);
            }
            continue;
        }
        let Some(entry) = side_event else {
            return Err(SsaError::Inconsistent(format!("D* event at {t} has no matching side jump")));
        };
        entry.1 = true;
        let m = pick(&mut dstar.classes[c].iter().copied(), &side_path.increments[entry.0], t)?;
        times.get_mut(&m).expect("in scope").push(t);
    }

    let only_side: Vec<usize> = own_delta.iter().copied().filter(|m| !other_delta.contains(m) && !p.delta_d.contains(m)).collect();
    for &(t, c) in &side_path.events {
        if side_at[&t.to_bits()].1 {
            continue;
        }
        let m = pick(&mut only_side.iter().copied(), &side_path.increments[c], t)?;
        times.get_mut(&m).expect("in scope").push(t);
    }
    for v in times.values_mut() {
        v.sort_by(f64::total_cmp);
    }
    Ok(ReconstructedPaths { side, times })
}

#[cfg(test)]
mod tests {
    use super::super::tests::example21_x0;
    use super::super::{project_dstar, project_subprocess, simulate};
    use super::*;
    use crate::netmodel::fixtures::*;
    use crate::netmodel::parse_network;
    use proptest::prelude::*;

    fn both_sides(net: &ReactionNetwork, p: &PartitionAbd, traj: &Trajectory) -> (ReconstructedPaths, ReconstructedPaths) {
        let dstar = project_dstar(traj, net, p);
        let na = project_subprocess(traj, net, &p.a).unwrap();
        let nb = project_subprocess(traj, net, &p.b).unwrap();
        (
            reconstruct_reaction_paths(net, p, Side::A, &na, &dstar).unwrap(),
            reconstruct_reaction_paths(net, p, Side::B, &nb, &dstar).unwrap(),
        )
    }

    #[test]
    fn scopes() {
        let net = theorem47();
        let p = net.dstar_partition(&set(&net, &["A"]), &set(&net, &["B"]), &set(&net, &["D"])).unwrap();
        assert_eq!(names(&net, &side_scope(&p, Side::A)), ["f", "r"]);
        assert_eq!(names(&net, &side_scope(&p, Side::B)), ["irr"]);
        let net = example21();
        let p = net.dstar_partition(&set(&net, &["P", "R"]), &set(&net, &["gP2"]), &set(&net, &["g", "P2"])).unwrap();
        assert_eq!(names(&net, &side_scope(&p, Side::A)), ["trc", "trl", "d", "rd"]);
        assert_eq!(names(&net, &side_scope(&p, Side::B)), ["b", "ub"]);
    }

    #[test]
    fn shared_dstar_class_split_by_side_jump() {
        // p and q change D identically; only their A jumps tell them apart
        let net = parse_network("p: A1 -> D\nq: A2 -> D\ns: A1 -> A2\nirr: D -> B").unwrap();
        let p = net.dstar_partition(&set(&net, &["A1", "A2"]), &set(&net, &["B"]), &set(&net, &["D"])).unwrap();
        assert_eq!(p.block(Block::A).classes.len(), 1);
        for seed in 0..50 {
            let traj = simulate(&net, &[5, 5, 0, 0], 3.0, seed).unwrap();
            let (a, b) = both_sides(&net, &p, &traj);
            assert_eq!(a.mismatches(&traj, net.n_reactions()), 0);
            assert_eq!(b.mismatches(&traj, net.n_reactions()), 0);
            assert_eq!(a.times.len() + b.times.len(), net.n_reactions());
        }
    }

    #[test]
    fn corrupted_paths_are_rejected() {
        let net = theorem47();
        let p = net.dstar_partition(&set(&net, &["A"]), &set(&net, &["B"]), &set(&net, &["D"])).unwrap();
        let traj = simulate(&net, &[6, 0, 0], 5.0, 4).unwrap();
        let dstar = project_dstar(&traj, &net, &p);
        let mut na = project_subprocess(&traj, &net, &p.a).unwrap();
        assert!(!na.events.is_empty());
        na.events.remove(0);
        assert!(matches!(reconstruct_reaction_paths(&net, &p, Side::A, &na, &dstar), Err(SsaError::Inconsistent(_))));
        let nb = project_subprocess(&traj, &net, &p.b).unwrap();
        assert!(reconstruct_reaction_paths(&net, &p, Side::A, &nb, &dstar).is_err());
        let plain_d = project_subprocess(&traj, &net, &p.d).unwrap();
        assert!(reconstruct_reaction_paths(&net, &p, Side::B, &nb, &plain_d).is_err());
    }

    #[test]
    fn reaction_changing_a_and_b_only_violates_hypotheses() {
        let net = parse_network("x: 0 -> A + B\ny: A -> D\nz: D -> B").unwrap();
        let p = net.dstar_partition(&set(&net, &["A"]), &set(&net, &["B"]), &set(&net, &["D"])).unwrap();
        let traj = simulate(&net, &[0, 0, 0], 1.0, 0).unwrap();
        let dstar = project_dstar(&traj, &net, &p);
        let na = project_subprocess(&traj, &net, &p.a).unwrap();
        assert!(matches!(reconstruct_reaction_paths(&net, &p, Side::A, &na, &dstar), Err(SsaError::Hypothesis(_))));
    }

    proptest! {
        #[test]
        fn theorem47_exact(seed in 0u64..400) {
            let net = theorem47();
            let p = net.dstar_partition(&set(&net, &["A"]), &set(&net, &["B"]), &set(&net, &["D"])).unwrap();
            let traj = simulate(&net, &[10, 0, 0], 4.0, seed).unwrap();
            let (a, b) = both_sides(&net, &p, &traj);
            prop_assert_eq!(a.mismatches(&traj, 3), 0);
            prop_assert_eq!(b.mismatches(&traj, 3), 0);
        }

        #[test]
        fn example21_exact(seed in 0u64..400) {
            let net = example21();
            let p = net.dstar_partition(&set(&net, &["P", "R"]), &set(&net, &["gP2"]), &set(&net, &["g", "P2"])).unwrap();
            let traj = simulate(&net, &example21_x0(&net), 4.0, seed).unwrap();
            let (a, b) = both_sides(&net, &p, &traj);
            prop_assert_eq!(a.mismatches(&traj, 6) + b.mismatches(&traj, 6), 0);
            let recovered: usize = a.times.values().chain(b.times.values()).map(Vec::len).sum();
            prop_assert_eq!(recovered, traj.events.len());
        }
    }
}
