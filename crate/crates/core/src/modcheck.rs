//! Modularizations read off junction trees, their validation, species
//! copying between modules, and the independence checks for a single
//! partition [A, B, D].

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chordal::JunctionTree;
use crate::kig::{closure, fraternize, DiGraph, GraphError, UnGraph};
use crate::netmodel::{NetworkError, ReactionNetwork, SpeciesSet};
use crate::report::{Finding, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModError {
    #[error("modules do not cover species {0:?}")]
    Coverage(Vec<String>),
    #[error("module index {0} out of range")]
    UnknownModule(usize),
    #[error("invalid copy of {species} from module {from} to module {to}: {reason}")]
    InvalidMove { species: String, from: usize, to: usize, reason: String },
    #[error("modularization and network disagree on the species list")]
    Mismatch,
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Modularization {
    #[serde(skip)]
    vertices: Vec<String>,
    pub modules: Vec<SpeciesSet>,
    /// S_d for each module.
    pub separators: Vec<SpeciesSet>,
    /// M_d \ S_d for each module.
    pub residuals: Vec<SpeciesSet>,
    /// Fingerprint of the junction tree the modules came from, plus any
    /// species copies applied since.
    pub provenance: String,
}

/// Hex SHA-256 of the canonical JSON form of a tree.
pub fn tree_fingerprint(tree: &JunctionTree) -> String {
    let json = serde_json::to_vec(&tree.to_json()).expect("tree JSON");
    Sha256::digest(&json).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

fn overlap_separators(modules: &[SpeciesSet]) -> Vec<SpeciesSet> {
    (0..modules.len())
        .map(|d| {
            let others: SpeciesSet =
                modules.iter().enumerate().filter(|&(e, _)| e != d).flat_map(|(_, m)| m.iter().copied()).collect();
            modules[d].intersection(&others).copied().collect()
        })
        .collect()
}

/// Modules are the tree's clusters; S_d is the union of the labels on the
/// edges at cluster d.
pub fn derive_modularization(tree: &JunctionTree) -> Modularization {
    let mut separators = vec![SpeciesSet::new(); tree.len()];
    for (p, c) in tree.edges() {
        let label = tree.separator(c);
        separators[p].extend(label.iter().copied());
        separators[c].extend(label.iter().copied());
    }
    let modules = tree.clusters().to_vec();
    let residuals = modules.iter().zip(&separators).map(|(m, s)| m.difference(s).copied().collect()).collect();
    Modularization {
        vertices: tree.vertices().to_vec(),
        modules,
        separators,
        residuals,
        provenance: format!("tree:{}", tree_fingerprint(tree)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Move {
    pub species: String,
    pub from: usize,
    pub to: usize,
}

impl Modularization {
    /// Modules given directly; S_d = M_d ∩ (∪_{e≠d} M_e).
    pub fn from_modules(vertices: Vec<String>, modules: Vec<SpeciesSet>) -> Result<Self, ModError> {
        let covered: SpeciesSet = modules.iter().flatten().copied().collect();
        if covered.iter().any(|&k| k >= vertices.len()) {
            return Err(ModError::Mismatch);
        }
        let missing: Vec<String> = (0..vertices.len()).filter(|k| !covered.contains(k)).map(|k| vertices[k].clone()).collect();
        if !missing.is_empty() {
            return Err(ModError::Coverage(missing));
        }
        let separators = overlap_separators(&modules);
        let residuals = modules.iter().zip(&separators).map(|(m, s)| m.difference(s).copied().collect()).collect();
        Ok(Modularization { vertices, modules, separators, residuals, provenance: "explicit".into() })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn ids(&self, set: &SpeciesSet) -> Vec<String> {
        set.iter().map(|&k| self.vertices[k].clone()).collect()
    }

    /// S_d recomputed as M_d ∩ (∪_{e≠d} M_e).
    pub fn overlap_separator(&self, d: usize) -> SpeciesSet {
        overlap_separators(&self.modules).swap_remove(d)
    }

    /// Residual-first label: the residual species, or the full module when
    /// the residual is empty.
    pub fn label(&self, d: usize) -> String {
        if self.residuals[d].is_empty() {
            format!("({})", self.ids(&self.modules[d]).join(", "))
        } else {
            self.ids(&self.residuals[d]).join(", ")
        }
    }

    /// Copies species between modules. Every move is checked against the
    /// modules as they were before any of the moves: the species must be in
    /// the source module and absent from the target.
    pub fn copy_species(&self, moves: &[Move]) -> Result<Modularization, ModError> {
        let mut modules = self.modules.clone();
        for mv in moves {
            let invalid = |reason: &str| ModError::InvalidMove {
                species: mv.species.clone(),
                from: mv.from,
                to: mv.to,
                reason: reason.to_string(),
            };
            for d in [mv.from, mv.to] {
                if d >= self.len() {
                    return Err(ModError::UnknownModule(d));
                }
            }
            let k = self.vertices.iter().position(|v| *v == mv.species).ok_or_else(|| invalid("unknown species"))?;
            if mv.from == mv.to {
                return Err(invalid("source and target are the same module"));
            }
            if !self.modules[mv.from].contains(&k) {
                return Err(invalid("species is not in the source module"));
            }
            if self.modules[mv.to].contains(&k) {
                return Err(invalid("species is already in the target module"));
            }
            modules[mv.to].insert(k);
        }
        let separators = overlap_separators(&modules);
        let residuals = modules.iter().zip(&separators).map(|(m, s)| m.difference(s).copied().collect()).collect();
        let mut provenance = self.provenance.clone();
        for mv in moves {
            write!(provenance, "+copy({}:{}->{})", mv.species, mv.from, mv.to).unwrap();
        }
        Ok(Modularization { vertices: self.vertices.clone(), modules, separators, residuals, provenance })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Graph separation and the consumption condition hold for every module.
    Certified,
    /// The sufficient conditions fail somewhere; this does not show that the
    /// modules fail to be a modularization.
    NotCertified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuleEntry {
    pub index: usize,
    pub label: String,
    pub species: Vec<String>,
    pub separator: Vec<String>,
    pub residual: Vec<String>,
    pub separation_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    /// Γ_d = Δ(M_d \ S_d) ∩ Δ(V \ M_d)
    pub gamma: Vec<String>,
    pub condition_ok: bool,
    pub history_equal: bool,
    /// cl(M_d \ S_d) ⊆ M_d
    pub locally_independent: bool,
    pub findings: Vec<Finding>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuleReport {
    pub verdict: Verdict,
    pub provenance: String,
    pub modules: Vec<ModuleEntry>,
}

/// Checks each module d against the sufficient conditions for a
/// modularization: {M_d \ S_d} ⊥ {V \ M_d} | S_d in the undirected KIG, and
/// identification by consumption of reactants on Γ_d. History equality of
/// S_d and S_d\* and local independence of the residual are reported
/// alongside but do not affect the verdict.
pub fn validate_modularization(
    net: &ReactionNetwork,
    g: &DiGraph,
    m: &Modularization,
) -> Result<ModuleReport, ModError> {
    if m.vertices.len() != net.n_species() || m.vertices.iter().zip(net.species()).any(|(v, s)| *v != s.id) {
        return Err(ModError::Mismatch);
    }
    let covered: SpeciesSet = m.modules.iter().flatten().copied().collect();
    if covered.len() != net.n_species() {
        let missing = (0..net.n_species()).filter(|k| !covered.contains(k)).map(|k| net.species_id(k).to_string());
        return Err(ModError::Coverage(missing.collect()));
    }
    let u = g.undirected();
    let mut entries = Vec::with_capacity(m.len());
    for d in 0..m.len() {
        let module = &m.modules[d];
        let sep = &m.separators[d];
        let residual = &m.residuals[d];
        let rest: SpeciesSet = (0..net.n_species()).filter(|k| !module.contains(k)).collect();
        let mut findings = Vec::new();

        let witness = if residual.is_empty() || rest.is_empty() { None } else { u.path_avoiding(residual, &rest, sep) };
        let witness = witness.map(|p| p.iter().map(|&k| net.species_id(k).to_string()).collect::<Vec<_>>());
        if let Some(path) = &witness {
            findings.push(
                Finding::error("module.separation", format!("residual reaches the rest of the network via {}", path.join(" - ")))
                    .with_species(path.clone()),
            );
        }

        let gamma: BTreeSet<usize> =
            net.delta(residual).intersection(&net.delta(&rest)).copied().collect();
        let condition = net.check_ident_consumption(&gamma)?;
        findings.extend(condition.findings().iter().cloned());

        let p = net.dstar_relaxed(residual, &rest, sep)?;
        let history = net.check_history_equality(&p);
        for f in history.findings() {
            findings.push(Finding { severity: crate::Severity::Warning, ..f.clone() });
        }

        let locally_independent = residual.is_empty() || closure(g, residual)?.is_subset(module);

        entries.push(ModuleEntry {
            index: d,
            label: m.label(d),
            species: m.ids(module),
            separator: m.ids(sep),
            residual: m.ids(residual),
            separation_ok: witness.is_none(),
            witness,
            gamma: net.reaction_names(&gamma),
            condition_ok: condition.passed(),
            history_equal: history.passed(),
            locally_independent,
            findings,
        });
    }
    let verdict = if entries.iter().all(|e| e.separation_ok && e.condition_ok) {
        Verdict::Certified
    } else {
        Verdict::NotCertified
    };
    Ok(ModuleReport { verdict, provenance: m.provenance.clone(), modules: entries })
}

impl ModuleReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let verdict = match self.verdict {
            Verdict::Certified => "certified",
            Verdict::NotCertified => "not certified",
        };
        writeln!(out, "## Modularization: {verdict}\n").unwrap();
        writeln!(out, "Provenance: `{}`\n", self.provenance).unwrap();
        writeln!(out, "| # | residual | separator | separation | Γ_d condition | history equal | locally independent |").unwrap();
        writeln!(out, "|---|---|---|---|---|---|---|").unwrap();
        let mark = |b: bool| if b { "yes" } else { "no" };
        for e in &self.modules {
            writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} |",
                e.index,
                e.label,
                e.separator.join(", "),
                mark(e.separation_ok),
                mark(e.condition_ok),
                mark(e.history_equal),
                mark(e.locally_independent)
            )
            .unwrap();
        }
        for e in &self.modules {
            for f in &e.findings {
                writeln!(out, "- module {}: `{}` {}", e.index, f.code, f.message).unwrap();
            }
        }
        out
    }
}

/// Independence checks for one partition [A, B, D].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub d: Vec<String>,
    /// Graph the separation was tested in: "undirected" or "fraternized".
    pub graph: &'static str,
    pub separated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    /// Δ(A) ∩ Δ(B)
    pub gamma: Vec<String>,
    /// None when the fraternized graph makes the condition unnecessary.
    pub condition_ok: Option<bool>,
    pub history_equal: bool,
    /// Separation plus (unless fraternized) the consumption condition: the
    /// histories of A and B are conditionally independent given that of D\*,
    /// and of D when `history_equal` also holds.
    pub certified: bool,
    pub report: ValidationReport,
}

pub fn verify_partition(
    net: &ReactionNetwork,
    g: &DiGraph,
    a: &SpeciesSet,
    b: &SpeciesSet,
    d: &SpeciesSet,
    fraternized: bool,
) -> Result<PartitionReport, ModError> {
    let p = net.dstar_partition(a, b, d)?;
    let graph: UnGraph = if fraternized { fraternize(net, g) } else { g.undirected() };
    let witness = graph.separation_witness(a, b, d)?;
    let mut report = ValidationReport::new();
    let witness = witness.map(|path| path.iter().map(|&k| net.species_id(k).to_string()).collect::<Vec<_>>());
    if let Some(path) = &witness {
        report.push(
            Finding::error("partition.separation", format!("A reaches B avoiding D via {}", path.join(" - ")))
                .with_species(path.clone()),
        );
    }
    let gamma: BTreeSet<usize> = p.delta_a.intersection(&p.delta_b).copied().collect();
    let condition_ok = if fraternized {
        None
    } else {
        let c = net.check_ident_consumption(&gamma)?;
        let ok = c.passed();
        report.extend(c);
        Some(ok)
    };
    let history = net.check_history_equality(&p);
    for f in history.findings() {
        report.push(Finding { severity: crate::Severity::Warning, ..f.clone() });
    }
    let separated = witness.is_none();
    Ok(PartitionReport {
        a: net.species_ids(a),
        b: net.species_ids(b),
        d: net.species_ids(d),
        graph: if fraternized { "fraternized" } else { "undirected" },
        separated,
        witness,
        gamma: net.reaction_names(&gamma),
        condition_ok,
        history_equal: history.passed(),
        certified: separated && condition_ok.unwrap_or(true),
        report,
    })
}
