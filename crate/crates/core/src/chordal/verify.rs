use std::collections::BTreeSet;

use super::JunctionTree;
use crate::kig::UnGraph;
use crate::netmodel::SpeciesSet;
use crate::report::{Finding, ValidationReport};

/// Clusters on the child side of the edge above `child`.
fn subtree(tree: &JunctionTree, child: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::from([child]);
    // parents precede children, so one forward pass collects descendants
    for c in child + 1..tree.len() {
        if tree.parent(c).is_some_and(|p| out.contains(&p)) {
            out.insert(c);
        }
    }
    out
}

/// Checks that `tree` is a junction tree whose edges separate in both the
/// triangulated graph `gt` and the original graph `g`:
///
/// * clusters cover the vertices;
/// * the clusters holding any vertex form a connected subtree;
/// * each stored label equals the intersection of its endpoints;
/// * cutting an edge splits the clusters into unions V_de and V_ed with
///   S_de = V_de ∩ V_ed, and V_de \ S_de is separated from V_ed \ S_de by
///   S_de in `gt` and in `g`.
pub fn verify_junction_tree(tree: &JunctionTree, g: &UnGraph, gt: &UnGraph) -> ValidationReport {
    let mut report = ValidationReport::new();
    let n = tree.vertices().len();
    if g.n() != n || gt.n() != n {
        report.push(Finding::error("jt.inconsistent", "tree and graphs have different vertex counts"));
        return report;
    }
    let ids = |s: &SpeciesSet| tree.ids(s);
    let covered: SpeciesSet = tree.clusters().iter().flatten().copied().collect();
    if covered.len() != n {
        let missing: SpeciesSet = (0..n).filter(|k| !covered.contains(k)).collect();
        report.push(Finding::error("jt.cover", "clusters do not cover every vertex").with_species(ids(&missing)));
    }
    for v in 0..n {
        let holding = tree.clusters().iter().filter(|c| c.contains(&v)).count();
        let links = tree
            .edges()
            .iter()
            .filter(|&&(a, b)| tree.clusters()[a].contains(&v) && tree.clusters()[b].contains(&v))
            .count();
        if holding > 0 && links + 1 != holding {
            report.push(
                Finding::error("jt.junction", format!("clusters containing {} are not connected in the tree", tree.vertices()[v]))
                    .with_species([tree.vertices()[v].clone()]),
            );
        }
    }
    for (p, c) in tree.edges() {
        let edge = format!("{p}-{c}");
        let expected: SpeciesSet = tree.clusters()[p].intersection(&tree.clusters()[c]).copied().collect();
        let label = tree.separator(c);
        if *label != expected {
            report.push(
                Finding::error(
                    "jt.label",
                    format!("edge {edge} is labelled {:?} but its clusters share {:?}", ids(label), ids(&expected)),
                )
                .with_species(ids(label)),
            );
            continue;
        }
        let below = subtree(tree, c);
        let v_below: SpeciesSet = below.iter().flat_map(|&d| tree.clusters()[d].iter().copied()).collect();
        let v_above: SpeciesSet = (0..tree.len())
            .filter(|d| !below.contains(d))
            .flat_map(|d| tree.clusters()[d].iter().copied())
            .collect();
        let shared: SpeciesSet = v_below.intersection(&v_above).copied().collect();
        if shared != *label {
            report.push(
                Finding::error("jt.separator", format!("edge {edge}: label differs from the intersection of the two sides"))
                    .with_species(ids(&shared)),
            );
            continue;
        }
        let a: SpeciesSet = v_below.difference(label).copied().collect();
        let b: SpeciesSet = v_above.difference(label).copied().collect();
        if a.is_empty() || b.is_empty() {
            continue;
        }
        for (graph, code, name) in [(gt, "jt.separation_triangulated", "triangulated"), (g, "jt.separation", "base")] {
            if let Some(path) = graph.path_avoiding(&a, &b, label) {
                let path: Vec<String> = path.iter().map(|&k| tree.vertices()[k].clone()).collect();
                report.push(
                    Finding::error(code, format!("edge {edge}: sides connect in the {name} graph via {}", path.join(" - ")))
                        .with_species(path),
                );
            }
        }
    }
    report
}
