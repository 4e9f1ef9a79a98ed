use std::path::PathBuf;

use proptest::prelude::*;
use skm::chordal::{build_clique_tree, cliques_rip, minimal_triangulation, mpd, verify_junction_tree, JunctionTree};
use skm::kig::build_kig;
use skm::modcheck::{derive_modularization, validate_modularization, verify_partition, Verdict};
use skm::netmodel::parse_network;
use skm::ssa::{
    likelihood_groups, log_likelihood, project_dstar, project_subprocess, reconstruct_reaction_paths, simulate, Side,
};
use skm::ReactionNetwork;

fn load(name: &str) -> ReactionNetwork {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    parse_network(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn mpd_tree(net: &ReactionNetwork) -> JunctionTree {
    let u = build_kig(net).undirected();
    let tri = minimal_triangulation(&u);
    let tree = build_clique_tree(u.vertices().to_vec(), &cliques_rip(&tri.result).unwrap()).unwrap();
    let m = mpd(&tree, &u).unwrap();
    assert!(verify_junction_tree(&m, &u, &tri.result).passed());
    m
}

#[test]
fn gene_network_end_to_end() {
    let net = load("example21.rxn");
    assert!(!net.check_standard().passed());
    let kig = build_kig(&net);
    let tree = mpd_tree(&net);
    let m = derive_modularization(&tree);
    assert_eq!(m.len(), 2);
    let report = validate_modularization(&net, &kig, &m).unwrap();
    assert_eq!(report.verdict, Verdict::Certified);

    let s = |ids: &[&str]| net.species_set(ids).unwrap();
    let p = net.dstar_partition(&s(&["P", "R"]), &s(&["gP2"]), &s(&["g", "P2"])).unwrap();
    let groups = likelihood_groups(&net, &p).unwrap();
    assert_eq!(net.reaction_names(&groups.b), ["b", "ub"]);
    let partition = verify_partition(&net, &kig, &s(&["P", "R"]), &s(&["gP2"]), &s(&["g", "P2"]), false).unwrap();
    assert!(partition.certified);
}

#[test]
fn synthetic_rbc_network_modularizes() {
    let net = load("rbc_synthetic.rxn");
    assert_eq!((net.n_species(), net.n_reactions()), (45, 38));
    assert!(net.check_standard().passed());
    let tree = mpd_tree(&net);
    let report = validate_modularization(&net, &build_kig(&net), &derive_modularization(&tree)).unwrap();
    assert_eq!(report.verdict, Verdict::Certified);
    assert_eq!(report.modules.len(), tree.len());
}

#[test]
fn three_reaction_network_splits_histories() {
    let net = load("theorem47.rxn");
    let s = |ids: &[&str]| net.species_set(ids).unwrap();
    let p = net.dstar_partition(&s(&["A"]), &s(&["B"]), &s(&["D"])).unwrap();
    assert!(!net.check_history_equality(&p).passed());
    assert!(net.refinement_check(&p));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Splitting a trajectory into sides and D* loses nothing: both sides
    /// rebuild their in-scope reaction paths and the likelihood terms sum to
    /// the total.
    #[test]
    fn projections_rebuild_paths(seed in any::<u64>(), t_end in 0.5f64..6.0) {
        let net = load("example21.rxn");
        let traj = simulate(&net, &[1, 2, 6, 0, 0], t_end, seed).unwrap();
        let s = |ids: &[&str]| net.species_set(ids).unwrap();
        let p = net.dstar_partition(&s(&["P", "R"]), &s(&["gP2"]), &s(&["g", "P2"])).unwrap();
        let dstar = project_dstar(&traj, &net, &p);
        for (side, species) in [(Side::A, &p.a), (Side::B, &p.b)] {
            let path = project_subprocess(&traj, &net, species).unwrap();
            let rec = reconstruct_reaction_paths(&net, &p, side, &path, &dstar).unwrap();
            prop_assert_eq!(rec.mismatches(&traj, net.n_reactions()), 0);
        }
        let l = log_likelihood(&net, &traj, t_end).unwrap();
        let sum: f64 = l.terms.iter().sum();
        prop_assert!((sum - l.total).abs() <= 1e-9 * (1.0 + l.total.abs()));
    }
}
