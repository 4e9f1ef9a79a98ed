//! Reaction networks, their stoichiometric matrix, and the reaction-set
//! machinery built on it: Δ(A), the subprocess classes M(Δ(A)), D\*
//! partitions and the structural checks.

pub(crate) mod checks;
mod json;
mod normalize;
mod parse;
mod partition;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

pub use json::{NetworkJson, ReactionJson, TermJson};
pub use parse::parse_network;
pub use partition::{Block, DstarBlock, PartitionAbd};

pub type SpeciesSet = BTreeSet<usize>;
pub type ReactionSet = BTreeSet<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: stoichiometry of {species} must be a positive integer, got {value}")]
    BadStoichiometry { line: usize, species: String, value: String },
    #[error("line {line}: species {id} is not declared")]
    Undeclared { line: usize, id: String },
    #[error("duplicate reaction name {0}")]
    DuplicateReaction(String),
    #[error("duplicate species id {0}")]
    DuplicateSpecies(String),
    #[error("species {species} appears twice on one side of reaction {reaction}")]
    RepeatedSpecies { reaction: String, species: String },
    #[error("reactions {first} and {second} have identical stoichiometric columns")]
    DuplicateColumn { first: String, second: String },
    #[error("reaction {reaction}: stoichiometry must be at least 1")]
    ZeroStoichiometry { reaction: String },
    #[error("reaction {0}: rate constant must be finite and nonnegative")]
    BadRate(String),
    #[error("reaction {reaction}: {message}")]
    BadKinetics { reaction: String, message: String },
    #[error("network has no reactions")]
    Empty,
    #[error("unknown species {0}")]
    UnknownSpecies(String),
    #[error("unknown reaction {0}")]
    UnknownReaction(String),
    #[error("species index {0} out of range")]
    SpeciesIndex(usize),
    #[error("not a partition of the species set: {0}")]
    NotAPartition(String),
    #[error("partition cell {0} is empty")]
    EmptyCell(&'static str),
    #[error("species set must be nonempty")]
    EmptySet,
    #[error("reaction {0} uses tabulated kinetics, which the text format cannot express")]
    NotRepresentable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Species {
    pub id: String,
    pub index: usize,
}

/// One side entry of a reaction: `coeff` molecules of species `species`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub species: usize,
    pub coeff: u32,
}

/// The reactant-level function g_m of a reaction's intensity.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Kinetics {
    /// Π binomial(x_i, α_i) over the reactants.
    #[default]
    MassAction,
    /// Explicit values keyed by the reactant levels, listed in reactant order.
    Tabulated { entries: BTreeMap<Vec<u64>, f64>, default: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reaction {
    pub name: String,
    pub reactants: Vec<Term>,
    pub products: Vec<Term>,
    pub rate: f64,
    pub kinetics: Kinetics,
}

impl Reaction {
    pub fn new(name: &str, reactants: Vec<Term>, products: Vec<Term>, rate: f64) -> Self {
        Reaction { name: name.to_string(), reactants, products, rate, kinetics: Kinetics::MassAction }
    }

    /// R[m]
    pub fn reactant_set(&self) -> SpeciesSet {
        self.reactants.iter().map(|t| t.species).collect()
    }

    /// P[m]
    pub fn product_set(&self) -> SpeciesSet {
        self.products.iter().map(|t| t.species).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    /// Column-major stoichiometric matrix: `columns[m][k] = S_km`.
    columns: Vec<Vec<i64>>,
    index: HashMap<String, usize>,
}

impl ReactionNetwork {
    /// Validates and builds a network. Species are given in index order.
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>) -> Result<Self, NetworkError> {
        if reactions.is_empty() {
            return Err(NetworkError::Empty);
        }
        let mut index = HashMap::new();
        for (i, id) in species.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateSpecies(id.clone()));
            }
        }
        let n = species.len();
        let mut names = BTreeSet::new();
        let mut columns = Vec::with_capacity(reactions.len());
        for r in &reactions {
            if !names.insert(r.name.as_str()) {
                return Err(NetworkError::DuplicateReaction(r.name.clone()));
            }
            if !r.rate.is_finite() || r.rate < 0.0 {
                return Err(NetworkError::BadRate(r.name.clone()));
            }
            let mut col = vec![0i64; n];
            for (side, sign) in [(&r.reactants, -1i64), (&r.products, 1i64)] {
                let mut seen = BTreeSet::new();
                for t in side.iter() {
                    if t.species >= n {
                        return Err(NetworkError::SpeciesIndex(t.species));
                    }
                    if t.coeff == 0 {
                        return Err(NetworkError::ZeroStoichiometry { reaction: r.name.clone() });
                    }
                    if !seen.insert(t.species) {
                        return Err(NetworkError::RepeatedSpecies {
                            reaction: r.name.clone(),
                            species: species[t.species].clone(),
                        });
                    }
                    col[t.species] += sign * i64::from(t.coeff);
                }
            }
            if let Kinetics::Tabulated { entries, default } = &r.kinetics {
                let arity = r.reactants.len();
                let bad_value = |v: &f64| !v.is_finite() || *v < 0.0;
                if bad_value(default) || entries.values().any(bad_value) {
                    return Err(NetworkError::BadKinetics {
                        reaction: r.name.clone(),
                        message: "tabulated values must be finite and nonnegative".into(),
                    });
                }
                if entries.keys().any(|k| k.len() != arity) {
                    return Err(NetworkError::BadKinetics {
                        reaction: r.name.clone(),
                        message: format!("table keys must list {arity} reactant levels"),
                    });
                }
            }
            columns.push(col);
        }
        let mut seen: HashMap<&[i64], usize> = HashMap::new();
        for (m, col) in columns.iter().enumerate() {
            if let Some(&first) = seen.get(col.as_slice()) {
                return Err(NetworkError::DuplicateColumn {
                    first: reactions[first].name.clone(),
                    second: reactions[m].name.clone(),
                });
            }
            seen.insert(col, m);
        }
        let species = species.into_iter().enumerate().map(|(index, id)| Species { id, index }).collect();
        Ok(ReactionNetwork { species, reactions, columns, index })
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_id(&self, k: usize) -> &str {
        &self.species[k].id
    }

    pub fn reaction_name(&self, m: usize) -> &str {
        &self.reactions[m].name
    }

    pub fn species_index(&self, id: &str) -> Result<usize, NetworkError> {
        self.index.get(id).copied().ok_or_else(|| NetworkError::UnknownSpecies(id.to_string()))
    }

    pub fn reaction_index(&self, name: &str) -> Result<usize, NetworkError> {
        self.reactions
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| NetworkError::UnknownReaction(name.to_string()))
    }

    /// Resolves species ids into an index set.
    pub fn species_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<SpeciesSet, NetworkError> {
        ids.iter().map(|s| self.species_index(s.as_ref())).collect()
    }

    pub fn reaction_set<S: AsRef<str>>(&self, names: &[S]) -> Result<ReactionSet, NetworkError> {
        names.iter().map(|s| self.reaction_index(s.as_ref())).collect()
    }

    pub fn species_ids(&self, set: &SpeciesSet) -> Vec<String> {
        set.iter().map(|&k| self.species[k].id.clone()).collect()
    }

    pub fn reaction_names(&self, set: &ReactionSet) -> Vec<String> {
        set.iter().map(|&m| self.reactions[m].name.clone()).collect()
    }

    pub fn all_species(&self) -> SpeciesSet {
        (0..self.n_species()).collect()
    }

    /// S_km
    pub fn s(&self, k: usize, m: usize) -> i64 {
        self.columns[m][k]
    }

    pub fn column(&self, m: usize) -> &[i64] {
        &self.columns[m]
    }

    /// The full n×M matrix, row-major.
    pub fn stoichiometry(&self) -> Vec<Vec<i64>> {
        (0..self.n_species()).map(|k| self.columns.iter().map(|c| c[k]).collect()).collect()
    }

    /// S_m restricted to the rows in `a`, in index order.
    pub fn column_on(&self, m: usize, a: &SpeciesSet) -> Vec<i64> {
        a.iter().map(|&k| self.columns[m][k]).collect()
    }

    /// R*[m]: the reactants that reaction m actually changes.
    pub fn changed_reactants(&self, m: usize) -> SpeciesSet {
        self.reactions[m].reactants.iter().map(|t| t.species).filter(|&k| self.columns[m][k] != 0).collect()
    }

    fn check_indices(&self, a: &SpeciesSet) -> Result<(), NetworkError> {
        match a.iter().find(|&&k| k >= self.n_species()) {
            Some(&k) => Err(NetworkError::SpeciesIndex(k)),
            None => Ok(()),
        }
    }

    /// Δ(A): reactions with a nonzero entry in some row of A.
    pub fn changed_reactions(&self, a: &SpeciesSet) -> Result<ReactionSet, NetworkError> {
        self.check_indices(a)?;
        Ok(self.delta(a))
    }

    pub(crate) fn delta(&self, a: &SpeciesSet) -> ReactionSet {
        (0..self.n_reactions()).filter(|&m| a.iter().any(|&k| self.columns[m][k] != 0)).collect()
    }

    /// Groups `within` by equality of S^A, classes ordered lexicographically
    /// by their S^A vector.
    pub fn classes_by(&self, a: &SpeciesSet, within: &ReactionSet) -> Vec<Vec<usize>> {
        let mut groups: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for &m in within {
            groups.entry(self.column_on(m, a)).or_default().push(m);
        }
        groups.into_values().collect()
    }

    /// M(Δ(A)): the classes of Δ(A) under equality of S^A.
    pub fn subprocess_partition(&self, a: &SpeciesSet) -> Result<Vec<Vec<usize>>, NetworkError> {
        if a.is_empty() {
            return Err(NetworkError::EmptySet);
        }
        let delta = self.changed_reactions(a)?;
        Ok(self.classes_by(a, &delta))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub const EXAMPLE21: &str = "\
# transcription, translation, dimerisation, repression
trc: g -> g + R
trl: R -> R + P
d: 2 P -> P2
rd: P2 -> 2 P
b: g + P2 -> gP2
ub: gP2 -> g + P2
";

    pub const THEOREM47: &str = "\
f: A -> D
r: D -> A
irr: D -> B
";

    pub fn example21() -> ReactionNetwork {
        parse_network(EXAMPLE21).unwrap()
    }

    pub fn theorem47() -> ReactionNetwork {
        parse_network(THEOREM47).unwrap()
    }

    pub fn set(net: &ReactionNetwork, ids: &[&str]) -> SpeciesSet {
        net.species_set(ids).unwrap()
    }

    pub fn names(net: &ReactionNetwork, set: &ReactionSet) -> Vec<String> {
        net.reaction_names(set)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn example21_dimensions_and_order() {
        let net = example21();
        assert_eq!(net.n_species(), 5);
        assert_eq!(net.n_reactions(), 6);
        let ids: Vec<_> = net.species().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["g", "R", "P", "P2", "gP2"]);
    }

    #[test]
    fn theorem47_columns() {
        let net = theorem47();
        assert_eq!(net.n_species(), 3);
        let (a, d, b) = (0, 1, 2);
        assert_eq!(net.species_id(a), "A");
        assert_eq!(net.column(0), &[-1, 1, 0][..]);
        assert_eq!(net.column(1), &[1, -1, 0][..]);
        assert_eq!(net.column(2), &[0, -1, 1][..]);
        assert_eq!(net.s(b, 2), 1);
        assert_eq!(net.s(d, 2), -1);
    }

    #[test]
    fn delta_examples() {
        let net = example21();
        let r = net.changed_reactions(&set(&net, &["R"])).unwrap();
        assert_eq!(names(&net, &r), ["trc"]);
        let d = net.changed_reactions(&set(&net, &["g", "P2"])).unwrap();
        assert_eq!(names(&net, &d), ["d", "rd", "b", "ub"]);
        assert_eq!(net.changed_reactions(&net.all_species()).unwrap().len(), 6);
        assert!(net.changed_reactions(&[9].into()).is_err());
    }

    #[test]
    fn subprocess_partition_examples() {
        let net = example21();
        let c = net.subprocess_partition(&set(&net, &["gP2"])).unwrap();
        // lexicographic by S^A: ub (-1) before b (+1)
        let named: Vec<Vec<&str>> =
            c.iter().map(|cl| cl.iter().map(|&m| net.reaction_name(m)).collect()).collect();
        assert_eq!(named, vec![vec!["ub"], vec!["b"]]);
        let c = net.subprocess_partition(&set(&net, &["g", "P2"])).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|cl| cl.len() == 1));
        let c = net.subprocess_partition(&set(&net, &["R"])).unwrap();
        assert_eq!(c, vec![vec![0]]);
        assert_eq!(net.subprocess_partition(&SpeciesSet::new()), Err(NetworkError::EmptySet));
    }

    #[test]
    fn changed_reactants_of_catalytic_reactions() {
        let net = example21();
        assert!(net.changed_reactants(0).is_empty());
        assert!(net.changed_reactants(1).is_empty());
        assert_eq!(net.changed_reactants(4), set(&net, &["g", "P2"]));
    }
}
