//! Optional rewrite that splits reactions with too many unchanged reactants
//! (catalysts) into a chain through fresh complex species.

use super::{Kinetics, NetworkError, Reaction, ReactionNetwork, Term};

impl ReactionNetwork {
    /// Splits every reaction that violates the catalyst condition of a
    /// standard SKM. For unchanged reactants u1..uk and changed reactants
    /// rest, the reaction `u1 + .. + uk + rest -> products` becomes
    ///
    /// ```text
    /// m_bind:   u1 + u2 -> m_c1      (k >= 2), or u1 -> m_c1 (k = 1)
    /// m_bind2:  m_c1 + u3 -> m_c2    ...
    /// m:        m_c(k-1) + rest -> products
    /// ```
    ///
    /// so every step consumes all of its reactants. The first step keeps the
    /// original rate constant and later steps get rate 1. Only the graph
    /// structure is preserved, not the kinetics.
    pub fn normalize_catalysts(&self) -> Result<ReactionNetwork, NetworkError> {
        let violators: Vec<usize> = self
            .check_standard()
            .findings()
            .iter()
            .filter(|f| f.code == "standard.iv")
            .flat_map(|f| f.reactions.iter().map(|name| self.reaction_index(name)))
            .collect::<Result<_, _>>()?;
        if violators.is_empty() {
            return Ok(self.clone());
        }
        let mut species: Vec<String> = self.species().iter().map(|s| s.id.clone()).collect();
        let fresh = |base: String, species: &mut Vec<String>| {
            let mut id = base;
            while species.contains(&id) {
                id.push('\'');
            }
            species.push(id);
            species.len() - 1
        };
        let mut reactions = Vec::new();
        let mut taken: Vec<String> = self.reactions().iter().map(|r| r.name.clone()).collect();
        let fresh_name = |base: String, taken: &mut Vec<String>| {
            let mut name = base;
            while taken.contains(&name) {
                name.push('\'');
            }
            taken.push(name.clone());
            name
        };
        for (m, r) in self.reactions().iter().enumerate() {
            if !violators.contains(&m) {
                reactions.push(r.clone());
                continue;
            }
            let changed = self.changed_reactants(m);
            let (catalysts, rest): (Vec<Term>, Vec<Term>) =
                r.reactants.iter().partition(|t| !changed.contains(&t.species));
            let mut carrier: Option<Term> = None;
            let mut queue = catalysts.into_iter();
            let mut step = 0;
            while let Some(u) = queue.next() {
                step += 1;
                let inputs = match carrier {
                    None if rest.is_empty() && queue.len() == 0 => vec![u],
                    None => match queue.next() {
                        Some(u2) => vec![u, u2],
                        None => vec![u],
                    },
                    Some(c) => vec![c, u],
                };
                let cx = fresh(format!("{}_c{step}", r.name), &mut species);
                let name = fresh_name(
                    if step == 1 { format!("{}_bind", r.name) } else { format!("{}_bind{step}", r.name) },
                    &mut taken,
                );
                let rate = if step == 1 { r.rate } else { 1.0 };
                reactions.push(Reaction {
                    name,
                    reactants: inputs,
                    products: vec![Term { species: cx, coeff: 1 }],
                    rate,
                    kinetics: Kinetics::MassAction,
                });
                carrier = Some(Term { species: cx, coeff: 1 });
            }
            let mut reactants = vec![carrier.expect("violator has a catalyst")];
            reactants.extend(rest);
            reactions.push(Reaction {
                name: r.name.clone(),
                reactants,
                products: r.products.clone(),
                rate: 1.0,
                kinetics: Kinetics::MassAction,
            });
        }
        ReactionNetwork::new(species, reactions)
    }
}
