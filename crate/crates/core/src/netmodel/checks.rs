//! Structural checks: standardness, identification by consumption of
//! reactants, and history equality of D and D\*.

use std::collections::BTreeMap;

use super::{NetworkError, PartitionAbd, ReactionNetwork, ReactionSet};
use crate::report::{Finding, ValidationReport};

impl ReactionNetwork {
    /// Checks the four regularity conditions of a standard SKM. Each
    /// violation yields one error finding with code `standard.<condition>`.
    pub fn check_standard(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        for m in 0..self.n_reactions() {
            if self.column(m).iter().all(|&v| v == 0) {
                report.push(
                    Finding::error("standard.i", format!("reaction {} changes no species", self.reaction_name(m)))
                        .with_reactions([self.reaction_name(m)]),
                );
            }
        }
        for k in 0..self.n_species() {
            if (0..self.n_reactions()).all(|m| self.s(k, m) == 0) {
                report.push(
                    Finding::error("standard.ii", format!("species {} is changed by no reaction", self.species_id(k)))
                        .with_species([self.species_id(k)]),
                );
            }
        }
        for (m, r) in self.reactions().iter().enumerate() {
            if r.reactants.is_empty() && r.products.len() != 1 {
                report.push(
                    Finding::error(
                        "standard.iii",
                        format!(
                            "zeroth-order reaction {} has {} product species, expected exactly 1",
                            r.name,
                            r.products.len()
                        ),
                    )
                    .with_reactions([r.name.as_str()]),
                );
            }
            let reactants = r.reactant_set();
            let changed = self.changed_reactants(m);
            let unchanged: Vec<_> = reactants.difference(&changed).copied().collect();
            let message = match reactants.len() {
                1 if changed.len() != 1 => {
                    Some(format!("sole reactant {} of {} is not changed", self.species_id(unchanged[0]), r.name))
                }
                n if n > 1 && unchanged.len() > 1 => Some(format!(
                    "reaction {} leaves {} reactants unchanged, at most 1 allowed",
                    r.name,
                    unchanged.len()
                )),
                _ => None,
            };
            if let Some(message) = message {
                report.push(
                    Finding::error("standard.iv", message)
                        .with_reactions([r.name.as_str()])
                        .with_species(unchanged.iter().map(|&k| self.species_id(k))),
                );
            }
        }
        report
    }

    /// Whether the reactions in `gamma` are identified by consumption of
    /// reactants: (i) reactants are never increased and products never
    /// decreased, (ii) no two members share the negative part of their column.
    pub fn check_ident_consumption(&self, gamma: &ReactionSet) -> Result<ValidationReport, NetworkError> {
        if let Some(&m) = gamma.iter().find(|&&m| m >= self.n_reactions()) {
            return Err(NetworkError::UnknownReaction(m.to_string()));
        }
        let mut report = ValidationReport::new();
        for &m in gamma {
            let r = &self.reactions()[m];
            let bad_reactants: Vec<_> = r.reactants.iter().filter(|t| self.s(t.species, m) > 0).collect();
            let bad_products: Vec<_> = r.products.iter().filter(|t| self.s(t.species, m) < 0).collect();
            if !bad_reactants.is_empty() || !bad_products.is_empty() {
                report.push(
                    Finding::error(
                        "consumption.i",
                        format!("reaction {} increases a reactant or decreases a product", r.name),
                    )
                    .with_reactions([r.name.as_str()])
                    .with_species(bad_reactants.iter().chain(&bad_products).map(|t| self.species_id(t.species))),
                );
            }
        }
        let mut by_negative: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for &m in gamma {
            let neg: Vec<i64> = self.column(m).iter().map(|&v| v.min(0)).collect();
            by_negative.entry(neg).or_default().push(m);
        }
        for group in by_negative.values().filter(|g| g.len() > 1) {
            let names: Vec<_> = group.iter().map(|&m| self.reaction_name(m)).collect();
            report.push(
                Finding::error("consumption.ii", format!("reactions {} consume reactants identically", names.join(", ")))
                    .with_reactions(names),
            );
        }
        Ok(report)
    }

    /// Whether the internal histories of D and D\* coincide: reactions of
    /// Δ(D) with equal S^D must agree on membership of Δ(A) and of Δ(B).
    pub fn check_history_equality(&self, p: &PartitionAbd) -> ValidationReport {
        let mut report = ValidationReport::new();
        for class in self.classes_by(&p.d, &p.delta_d) {
            let mut kinds: BTreeMap<(bool, bool), Vec<usize>> = BTreeMap::new();
            for &m in &class {
                kinds.entry((p.delta_a.contains(&m), p.delta_b.contains(&m))).or_default().push(m);
            }
            if kinds.len() > 1 {
                let names: Vec<_> = class.iter().map(|&m| self.reaction_name(m)).collect();
                report.push(
                    Finding::error(
                        "history.split",
                        format!(
                            "reactions {} change D identically but differ in whether they change A or B",
                            names.join(", ")
                        ),
                    )
                    .with_reactions(names),
                );
            }
        }
        report
    }

    /// Every class of M(Δ(D)) is a union of classes of M\*(Δ(D)).
    pub fn refinement_check(&self, p: &PartitionAbd) -> bool {
        let coarse = self.classes_by(&p.d, &p.delta_d);
        let class_of = |m: usize| coarse.iter().position(|c| c.contains(&m));
        p.dstar_classes().iter().all(|(_, fine)| {
            let owner = class_of(fine[0]);
            owner.is_some() && fine.iter().all(|&m| class_of(m) == owner)
        })
    }
}
