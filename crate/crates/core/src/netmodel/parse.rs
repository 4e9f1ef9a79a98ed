//! Line-oriented reaction file format.
//!
//! ```text
//! # comment
//! species: g R P P2 gP2
//! trc: g -> g + R ; c=0.3
//! d: 2 P -> P2
//! src: 0 -> X
//! ```

use std::collections::HashMap;
use std::fmt::Write;

use super::{Kinetics, NetworkError, Reaction, ReactionNetwork, Term};

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn err(&self, message: impl Into<String>) -> NetworkError {
        NetworkError::Syntax { line: self.line, column: self.column(), message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), NetworkError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{s}'")))
        }
    }

    fn ident(&mut self) -> Result<&'a str, NetworkError> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.err("expected an identifier")),
        }
        let end = chars
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Ok(&rest[..end])
    }

    fn digits(&mut self) -> &'a str {
        let rest = self.rest();
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }
}

struct RawReaction {
    line: usize,
    name: String,
    reactants: Vec<(String, u32)>,
    products: Vec<(String, u32)>,
    rate: f64,
}

fn parse_term(cur: &mut Cursor) -> Result<(String, u32), NetworkError> {
    cur.skip_ws();
    let start_col = cur.column();
    let negative = cur.peek() == Some('-');
    if negative {
        cur.pos += 1;
    }
    let digits = cur.digits();
    let coeff = if digits.is_empty() {
        if negative {
            return Err(cur.err("expected a stoichiometric coefficient"));
        }
        1
    } else {
        let species = cur.ident()?;
        let value = if negative { format!("-{digits}") } else { digits.to_string() };
        let coeff: u32 = digits.parse().map_err(|_| NetworkError::Syntax {
            line: cur.line,
            column: start_col,
            message: format!("coefficient {digits} is too large"),
        })?;
        if negative || coeff == 0 {
            return Err(NetworkError::BadStoichiometry { line: cur.line, species: species.to_string(), value });
        }
        return Ok((species.to_string(), coeff));
    };
    Ok((cur.ident()?.to_string(), coeff))
}

/// A side is either `0` (empty) or terms joined by `+`.
fn parse_side(cur: &mut Cursor, stop: &[&str]) -> Result<Vec<(String, u32)>, NetworkError> {
    cur.skip_ws();
    let save = cur.pos;
    if cur.eat("0") {
        let after = cur.rest().trim_start();
        if after.is_empty() || stop.iter().any(|s| after.starts_with(s)) {
            return Ok(Vec::new());
        }
        cur.pos = save;
    }
    let mut terms = vec![parse_term(cur)?];
    while cur.eat("+") {
        terms.push(parse_term(cur)?);
    }
    Ok(terms)
}

fn parse_options(cur: &mut Cursor) -> Result<f64, NetworkError> {
    let mut rate = None;
    loop {
        let key = cur.ident()?;
        if key != "c" {
            return Err(cur.err(format!("unknown option '{key}'")));
        }
        cur.expect("=")?;
        cur.skip_ws();
        let rest = cur.rest();
        let end = rest.find(|c: char| c.is_whitespace() || c == ',').unwrap_or(rest.len());
        let raw = &rest[..end];
        let value = raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| cur.err(format!("invalid rate constant '{raw}'")))?;
        if rate.replace(value).is_some() {
            return Err(cur.err("rate constant given twice"));
        }
        cur.pos += end;
        if !cur.eat(",") {
            break;
        }
    }
    if !cur.at_end() {
        return Err(cur.err("unexpected trailing input"));
    }
    Ok(rate.unwrap_or(1.0))
}

fn parse_reaction(cur: &mut Cursor) -> Result<RawReaction, NetworkError> {
    let name = cur.ident()?.to_string();
    cur.expect(":")?;
    let reactants = parse_side(cur, &["->"])?;
    cur.expect("->")?;
    let products = parse_side(cur, &[";"])?;
    let rate = if cur.eat(";") {
        parse_options(cur)?
    } else if !cur.at_end() {
        return Err(cur.err("expected '+', ';' or end of line"));
    } else {
        1.0
    };
    Ok(RawReaction { line: cur.line, name, reactants, products, rate })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses the reaction file format. Species are numbered in order of
/// declaration when a `species:` line is present, otherwise in order of first
/// appearance.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, NetworkError> {
    let mut declared: Option<Vec<String>> = None;
    let mut raw = Vec::new();
    for (i, full) in text.lines().enumerate() {
        let line = strip_comment(full);
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor { text: line, pos: 0, line: i + 1 };
        let is_decl = {
            let t = line.trim_start();
            t.starts_with("species") && t["species".len()..].trim_start().starts_with(':') && !line.contains("->")
        };
        if is_decl {
            cur.ident()?;
            cur.expect(":")?;
            let list = declared.get_or_insert_with(Vec::new);
            while !cur.at_end() {
                let id = cur.ident()?;
                if list.iter().any(|s| s == id) {
                    return Err(NetworkError::DuplicateSpecies(id.to_string()));
                }
                list.push(id.to_string());
            }
            continue;
        }
        raw.push(parse_reaction(&mut cur)?);
    }
    if raw.is_empty() {
        return Err(NetworkError::Empty);
    }

    let mut species: Vec<String> = declared.clone().unwrap_or_default();
    let mut index: HashMap<String, usize> = species.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let mut reactions = Vec::with_capacity(raw.len());
    for r in raw {
        let mut resolve = |side: &[(String, u32)]| -> Result<Vec<Term>, NetworkError> {
            side.iter()
                .map(|(id, coeff)| {
                    let k = match index.get(id) {
                        Some(&k) => k,
                        None if declared.is_some() => {
                            return Err(NetworkError::Undeclared { line: r.line, id: id.clone() })
                        }
                        None => {
                            species.push(id.clone());
                            index.insert(id.clone(), species.len() - 1);
                            species.len() - 1
                        }
                    };
                    Ok(Term { species: k, coeff: *coeff })
                })
                .collect()
        };
        let reactants = resolve(&r.reactants)?;
        let products = resolve(&r.products)?;
        reactions.push(Reaction { name: r.name, reactants, products, rate: r.rate, kinetics: Kinetics::MassAction });
    }
    ReactionNetwork::new(species, reactions)
}

impl ReactionNetwork {
    /// Serializes to the text format. `parse_network` of the output
    /// reproduces the network exactly.
    pub fn to_text(&self) -> Result<String, NetworkError> {
        let mut out = String::new();
        let ids: Vec<&str> = self.species.iter().map(|s| s.id.as_str()).collect();
        writeln!(out, "species: {}", ids.join(" ")).unwrap();
        for r in &self.reactions {
            if r.kinetics != Kinetics::MassAction {
                return Err(NetworkError::NotRepresentable(r.name.clone()));
            }
            let side = |terms: &[Term]| {
                if terms.is_empty() {
                    return "0".to_string();
                }
                terms
                    .iter()
                    .map(|t| match t.coeff {
                        1 => ids[t.species].to_string(),
                        k => format!("{k} {}", ids[t.species]),
                    })
                    .collect::<Vec<_>>()
                    .join(" + ")
            };
            writeln!(out, "{}: {} -> {} ; c={}", r.name, side(&r.reactants), side(&r.products), r.rate).unwrap();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_rates_and_coefficients() {
        let net = parse_network("d: 2 P -> P2 ; c=0.5\nx: 3Q + P -> 0").unwrap();
        let d = &net.reactions()[0];
        assert_eq!(d.rate, 0.5);
        assert_eq!(d.reactants, vec![Term { species: 0, coeff: 2 }]);
        let x = &net.reactions()[1];
        assert_eq!(x.rate, 1.0);
        assert_eq!(x.reactants[0].coeff, 3);
        assert!(x.products.is_empty());
        assert_eq!(net.s(0, 1), -1);
        assert_eq!(net.s(2, 1), -3);
    }

    #[test]
    fn zeroth_order_source() {
        let net = parse_network("src: 0 -> X ; c=2").unwrap();
        assert!(net.reactions()[0].reactants.is_empty());
        assert_eq!(net.column(0), &[1][..]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_network("a: X -> Y\nb: X => Y") {
            Err(NetworkError::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 6);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_network("a X -> Y"), Err(NetworkError::Syntax { line: 1, column: 3, .. })));
        assert!(matches!(parse_network("a: X -> Y ; k=2"), Err(NetworkError::Syntax { .. })));
        assert!(matches!(parse_network("a: X -> Y ; c=-1"), Err(NetworkError::Syntax { .. })));
        assert!(matches!(parse_network("a: X -> Y Z"), Err(NetworkError::Syntax { .. })));
    }

    #[test]
    fn rejects_bad_stoichiometry() {
        assert!(matches!(parse_network("a: 0 X -> Y"), Err(NetworkError::BadStoichiometry { .. })));
        assert!(matches!(parse_network("a: -1 X -> Y"), Err(NetworkError::BadStoichiometry { .. })));
    }

    #[test]
    fn rejects_duplicates() {
        assert_eq!(parse_network("a: X -> Y\na: Y -> X"), Err(NetworkError::DuplicateReaction("a".into())));
        assert!(matches!(
            parse_network("a: X + Y -> Z\nb: X + Y -> Z"),
            Err(NetworkError::DuplicateColumn { .. })
        ));
        // equal net change through different reactant lists is still a duplicate column
        assert!(matches!(
            parse_network("a: X -> Y\nb: X + Z -> Y + Z"),
            Err(NetworkError::DuplicateColumn { .. })
        ));
        assert!(matches!(parse_network("a: X + X -> Y"), Err(NetworkError::RepeatedSpecies { .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(parse_network(""), Err(NetworkError::Empty));
        assert_eq!(parse_network("# nothing\n\n"), Err(NetworkError::Empty));
        assert_eq!(parse_network("species: A B"), Err(NetworkError::Empty));
    }

    #[test]
    fn declared_species_fix_the_order() {
        let net = parse_network("species: Z Y X\na: X -> Y").unwrap();
        assert_eq!(net.species_index("Z").unwrap(), 0);
        assert_eq!(net.species_index("X").unwrap(), 2);
        assert!(matches!(parse_network("species: X\na: X -> Y"), Err(NetworkError::Undeclared { .. })));
    }

    #[test]
    fn noop_reaction_parses() {
        let net = parse_network("noop: A -> A\nx: A -> B").unwrap();
        assert!(net.column(0).iter().all(|&v| v == 0));
    }

    #[test]
    fn round_trip_examples() {
        for text in [EXAMPLE21, THEOREM47] {
            let net = parse_network(text).unwrap();
            let again = parse_network(&net.to_text().unwrap()).unwrap();
            assert_eq!(again, net);
        }
    }

    fn arb_network() -> impl Strategy<Value = ReactionNetwork> {
        let side = proptest::collection::btree_map(0usize..5, 1u32..4, 0..3);
        let reaction = (side.clone(), side, prop_oneof![Just(1.0f64), 0.0f64..1e6]);
        proptest::collection::vec(reaction, 1..8).prop_filter_map("valid network", |rs| {
            let species: Vec<String> = (0..5).map(|i| format!("S{i}")).collect();
            let reactions = rs
                .into_iter()
                .enumerate()
                .map(|(m, (lhs, rhs, c))| {
                    let terms = |s: std::collections::BTreeMap<usize, u32>| {
                        s.into_iter().map(|(species, coeff)| Term { species, coeff }).collect()
                    };
                    Reaction::new(&format!("r{m}"), terms(lhs), terms(rhs), c)
                })
                .collect();
            ReactionNetwork::new(species, reactions).ok()
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(net in arb_network()) {
            let again = parse_network(&net.to_text().unwrap()).unwrap();
            prop_assert_eq!(again, net);
        }
    }
}
