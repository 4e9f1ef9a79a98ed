use serde::Serialize;

use super::{propensities_into, SsaError, Trajectory};
use crate::netmodel::{PartitionAbd, ReactionNetwork, ReactionSet, SpeciesSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLikelihoodBreakdown {
    pub t: f64,
    /// l_m(t) = t - ∫_0^t λ_m(u) du + Σ_{T_s^m ≤ t} log λ_m(T_s^m-)
    pub terms: Vec<f64>,
    pub total: f64,
}

/// Log-likelihood of the path on [0, t] against M unit-rate Poisson
/// processes. Intensities are piecewise constant between events, so each
/// integral is summed exactly over runs of constant λ_m.
pub fn log_likelihood(net: &ReactionNetwork, traj: &Trajectory, t: f64) -> Result<LogLikelihoodBreakdown, SsaError> {
    if !(0.0..=traj.t_end).contains(&t) {
        return Err(SsaError::TimeOutOfRange { t, t_end: traj.t_end });
    }
    traj.validate(net)?;
    let n = net.n_reactions();
    let mut x = traj.x0.clone();
    let mut lambda = vec![0.0; n];
    propensities_into(net, &x, &mut lambda)?;
    let mut integral = vec![0.0; n];
    let mut run_start = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    for e in traj.events.iter().take_while(|e| e.time <= t) {
        let m = e.reaction;
        if lambda[m] <= 0.0 {
            return Err(SsaError::ZeroPropensity { reaction: net.reaction_name(m).to_string(), time: e.time });
        }
        jumps[m] += lambda[m].ln();
        super::apply(net, &mut x, m);
        let mut next = vec![0.0; n];
        propensities_into(net, &x, &mut next)?;
        for j in 0..n {
            if next[j] != lambda[j] {
                integral[j] += lambda[j] * (e.time - run_start[j]);
                run_start[j] = e.time;
            }
        }
        lambda = next;
    }
    for j in 0..n {
        integral[j] += lambda[j] * (t - run_start[j]);
    }
    let terms: Vec<f64> = (0..n).map(|m| t - integral[m] + jumps[m]).collect();
    let total = terms.iter().sum();
    Ok(LogLikelihoodBreakdown { t, terms, total })
}

/// Reactions whose l_m is computable from the A side (N^A with N^{D\*}) and
/// from the B side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LikelihoodGroups {
    pub a: ReactionSet,
    pub b: ReactionSet,
}

/// Splits the reactions by which side can compute l_m: m needs its
/// reactants in side ∪ D for λ_m, and its counting path reconstructible
/// from that side. A reaction neither side can handle is an error, which
/// means the separation hypotheses fail.
pub fn likelihood_groups(net: &ReactionNetwork, p: &PartitionAbd) -> Result<LikelihoodGroups, SsaError> {
    let scope_a = super::side_scope(p, super::Side::A);
    let scope_b = super::side_scope(p, super::Side::B);
    let ad: SpeciesSet = p.a.union(&p.d).copied().collect();
    let bd: SpeciesSet = p.b.union(&p.d).copied().collect();
    let mut groups = LikelihoodGroups { a: ReactionSet::new(), b: ReactionSet::new() };
    for m in 0..net.n_reactions() {
        let reactants = net.reactions()[m].reactant_set();
        if scope_a.contains(&m) && reactants.is_subset(&ad) {
            groups.a.insert(m);
        } else if scope_b.contains(&m) && reactants.is_subset(&bd) {
            groups.b.insert(m);
        } else {
            return Err(SsaError::Hypothesis(format!(
                "l_{} is computable from neither side",
                net.reaction_name(m)
            )));
        }
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::super::tests::example21_x0;
    use super::super::{replicate, simulate, Event, MeanSe, SimOptions};
    use super::*;
    use crate::netmodel::fixtures::*;
    use crate::netmodel::parse_network;

    #[test]
    fn unit_rate_is_exactly_zero() {
        let net = parse_network("a: 0 -> X\nb: 0 -> Y\nc: 0 -> X + Y").unwrap();
        for seed in 0..50 {
            let traj = simulate(&net, &[0, 0], 7.3, seed).unwrap();
            let ll = log_likelihood(&net, &traj, 7.3).unwrap();
            assert!(ll.terms.iter().all(|&l| l == 0.0));
            assert_eq!(ll.total, 0.0);
        }
    }

    #[test]
    fn single_event_by_hand() {
        let net = parse_network("birth: 0 -> X ; c=2").unwrap();
        let traj = Trajectory { x0: vec![0], events: vec![Event { time: 0.3, reaction: 0 }], t_end: 1.0, absorbed: false };
        let ll = log_likelihood(&net, &traj, 1.0).unwrap();
        assert!((ll.total - (1.0 - 2.0 + 2f64.ln())).abs() < 1e-12);
        // before the event only the compensator contributes
        let ll = log_likelihood(&net, &traj, 0.2).unwrap();
        assert!((ll.total - (0.2 - 0.4)).abs() < 1e-12);
    }

    #[test]
    fn state_dependent_by_hand() {
        // X -> 0 at c=1.5 from X=2, deaths at 0.4 and 1.0, horizon 2
        let net = parse_network("die: X -> 0 ; c=1.5").unwrap();
        let ev = |time| Event { time, reaction: 0 };
        let traj = Trajectory { x0: vec![2], events: vec![ev(0.4), ev(1.0)], t_end: 2.0, absorbed: true };
        let ll = log_likelihood(&net, &traj, 2.0).unwrap();
        let expected = 2.0 - (3.0 * 0.4 + 1.5 * 0.6) + 3f64.ln() + 1.5f64.ln();
        assert!((ll.total - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_propensity_jump_is_reported() {
        let net = parse_network("d: 2 P -> P2").unwrap();
        let traj = Trajectory { x0: vec![3, 0], events: vec![Event { time: 0.5, reaction: 0 }, Event { time: 0.7, reaction: 0 }], t_end: 1.0, absorbed: false };
        // the second event would leave P = -1
        assert!(log_likelihood(&net, &traj, 1.0).is_err());
        // e needs P, which d has just removed
        let net = parse_network("d: P -> 0\ne: P + Q -> P").unwrap();
        let traj = Trajectory { x0: vec![1, 1], events: vec![Event { time: 0.5, reaction: 0 }, Event { time: 0.7, reaction: 1 }], t_end: 1.0, absorbed: false };
        assert!(matches!(log_likelihood(&net, &traj, 1.0), Err(SsaError::ZeroPropensity { .. })));
    }

    #[test]
    fn gibbs_inequality() {
        let truth = parse_network("b: 0 -> X ; c=4\nd: X -> 0 ; c=1").unwrap();
        let other = parse_network("b: 0 -> X ; c=3\nd: X -> 0 ; c=1.4").unwrap();
        let diffs = replicate(&truth, &[2], 5.0, 4000, 17, SimOptions::default(), |_, traj| {
            Ok(log_likelihood(&truth, &traj, 5.0)?.total - log_likelihood(&other, &traj, 5.0)?.total)
        })
        .unwrap();
        let m = MeanSe::of(&diffs);
        assert!(m.mean > 0.0 && m.mean > 3.0 * m.se, "{m:?}");
    }

    #[test]
    fn groups_partition_the_reactions() {
        let net = example21();
        let p = net.dstar_partition(&set(&net, &["P", "R"]), &set(&net, &["gP2"]), &set(&net, &["g", "P2"])).unwrap();
        let g = likelihood_groups(&net, &p).unwrap();
        assert_eq!(names(&net, &g.a), ["trc", "trl", "d", "rd"]);
        assert_eq!(names(&net, &g.b), ["b", "ub"]);

        let net = theorem47();
        let p = net.dstar_partition(&set(&net, &["A"]), &set(&net, &["B"]), &set(&net, &["D"])).unwrap();
        let g = likelihood_groups(&net, &p).unwrap();
        assert_eq!(names(&net, &g.a), ["f", "r"]);
        assert_eq!(names(&net, &g.b), ["irr"]);

        // trl has reactant R in A but changes P in B
        let net = example21();
        let p = net.dstar_partition(&set(&net, &["R"]), &set(&net, &["P", "gP2"]), &set(&net, &["g", "P2"])).unwrap();
        assert!(likelihood_groups(&net, &p).is_err());
    }

    #[test]
    fn terms_sum_to_total() {
        let net = example21();
        let traj = simulate(&net, &example21_x0(&net), 4.0, 2).unwrap();
        let ll = log_likelihood(&net, &traj, 4.0).unwrap();
        assert_eq!(ll.total, ll.terms.iter().sum::<f64>());
        assert!(ll.total.is_finite());
    }
}
