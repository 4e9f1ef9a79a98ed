//! JSON wire form of a network. Species are referenced by id, keys appear in
//! a fixed order, and deserialization runs the same validation as
//! [`ReactionNetwork::new`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Kinetics, NetworkError, Reaction, ReactionNetwork, Term};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub species: String,
    #[serde(default = "one")]
    pub coeff: u32,
}

fn one() -> u32 {
    1
}

fn unit_rate() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub levels: Vec<u64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KineticsJson {
    #[default]
    MassAction,
    Tabulated { entries: Vec<TableEntry>, default: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactionJson {
    pub name: String,
    pub reactants: Vec<TermJson>,
    pub products: Vec<TermJson>,
    #[serde(default = "unit_rate")]
    pub rate: f64,
    #[serde(default)]
    pub kinetics: KineticsJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub species: Vec<String>,
    pub reactions: Vec<ReactionJson>,
}

impl From<&ReactionNetwork> for NetworkJson {
    fn from(net: &ReactionNetwork) -> Self {
        let id = |t: &Term| TermJson { species: net.species_id(t.species).to_string(), coeff: t.coeff };
        NetworkJson {
            species: net.species().iter().map(|s| s.id.clone()).collect(),
            reactions: net
                .reactions()
                .iter()
                .map(|r| ReactionJson {
                    name: r.name.clone(),
                    reactants: r.reactants.iter().map(id).collect(),
                    products: r.products.iter().map(id).collect(),
                    rate: r.rate,
                    kinetics: match &r.kinetics {
                        Kinetics::MassAction => KineticsJson::MassAction,
                        Kinetics::Tabulated { entries, default } => KineticsJson::Tabulated {
                            entries: entries
                                .iter()
                                .map(|(levels, &value)| TableEntry { levels: levels.clone(), value })
                                .collect(),
                            default: *default,
                        },
                    },
                })
                .collect(),
        }
    }
}

impl From<ReactionNetwork> for NetworkJson {
    fn from(net: ReactionNetwork) -> Self {
        NetworkJson::from(&net)
    }
}

impl TryFrom<NetworkJson> for ReactionNetwork {
    type Error = NetworkError;

    fn try_from(j: NetworkJson) -> Result<Self, NetworkError> {
        let index: BTreeMap<&str, usize> = j.species.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let terms = |side: &[TermJson]| -> Result<Vec<Term>, NetworkError> {
            side.iter()
                .map(|t| {
                    let k = *index.get(t.species.as_str()).ok_or_else(|| NetworkError::UnknownSpecies(t.species.clone()))?;
                    Ok(Term { species: k, coeff: t.coeff })
                })
                .collect()
        };
        let mut reactions = Vec::with_capacity(j.reactions.len());
        for r in &j.reactions {
            let kinetics = match &r.kinetics {
                KineticsJson::MassAction => Kinetics::MassAction,
                KineticsJson::Tabulated { entries, default } => Kinetics::Tabulated {
                    entries: entries.iter().map(|e| (e.levels.clone(), e.value)).collect(),
                    default: *default,
                },
            };
            reactions.push(Reaction {
                name: r.name.clone(),
                reactants: terms(&r.reactants)?,
                products: terms(&r.products)?,
                rate: r.rate,
                kinetics,
            });
        }
        ReactionNetwork::new(j.species.clone(), reactions)
    }
}

impl Serialize for ReactionNetwork {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        NetworkJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ReactionNetwork {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = NetworkJson::deserialize(d)?;
        ReactionNetwork::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn json_round_trip() {
        let net = example21();
        let s = serde_json::to_string(&net).unwrap();
        assert!(s.starts_with("{\"species\":[\"g\",\"R\",\"P\",\"P2\",\"gP2\"],\"reactions\":[{\"name\":\"trc\""));
        let back: ReactionNetwork = serde_json::from_str(&s).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn tabulated_kinetics_round_trip() {
        let text = r#"{"species":["X","Y"],"reactions":[{"name":"a","reactants":[{"species":"X"}],
            "products":[{"species":"Y"}],"rate":2.0,
            "kinetics":{"type":"tabulated","entries":[{"levels":[3],"value":0.5}],"default":1.0}}]}"#;
        let net: ReactionNetwork = serde_json::from_str(text).unwrap();
        match &net.reactions()[0].kinetics {
            Kinetics::Tabulated { entries, default } => {
                assert_eq!(entries.get(&vec![3]), Some(&0.5));
                assert_eq!(*default, 1.0);
            }
            k => panic!("unexpected {k:?}"),
        }
        let again: ReactionNetwork = serde_json::from_str(&serde_json::to_string(&net).unwrap()).unwrap();
        assert_eq!(again, net);
        assert!(matches!(net.to_text(), Err(NetworkError::NotRepresentable(_))));
    }

    #[test]
    fn validation_applies_to_json() {
        let dup = r#"{"species":["X","Y"],"reactions":[
            {"name":"a","reactants":[{"species":"X"}],"products":[{"species":"Y"}]},
            {"name":"b","reactants":[{"species":"X"}],"products":[{"species":"Y"}]}]}"#;
        assert!(serde_json::from_str::<ReactionNetwork>(dup).is_err());
        let unknown = r#"{"species":["X"],"reactions":[{"name":"a","reactants":[{"species":"Q"}],"products":[]}]}"#;
        assert!(serde_json::from_str::<ReactionNetwork>(unknown).is_err());
        let bad_table = r#"{"species":["X","Y"],"reactions":[{"name":"a","reactants":[{"species":"X"}],
            "products":[{"species":"Y"}],"kinetics":{"type":"tabulated","entries":[{"levels":[1,2],"value":1}],"default":0}}]}"#;
        assert!(serde_json::from_str::<ReactionNetwork>(bad_table).is_err());
    }
}
