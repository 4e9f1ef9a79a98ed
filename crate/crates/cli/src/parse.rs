//! Argument-level parsing shared by the CLI and the HTTP API.

use std::path::Path;

use skm::netmodel::parse_network;
use skm::{ReactionNetwork, SpeciesSet};

/// Reads a network from a text or JSON file; JSON is detected by a `.json`
/// extension or a leading `{`.
pub fn load_network(path: &Path) -> Result<ReactionNetwork, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_network_source(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_network_source(text: &str) -> Result<ReactionNetwork, String> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        parse_network(text).map_err(|e| e.to_string())
    }
}

/// Comma-separated species ids; an empty string is the empty set.
pub fn parse_set(net: &ReactionNetwork, s: &str) -> Result<SpeciesSet, String> {
    let ids: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    net.species_set(&ids).map_err(|e| e.to_string())
}

/// `A;B;D` with comma-separated species in each cell.
pub fn parse_partition(net: &ReactionNetwork, s: &str) -> Result<[SpeciesSet; 3], String> {
    let cells: Vec<&str> = s.split(';').collect();
    if cells.len() != 3 {
        return Err(format!("partition must have three ';'-separated cells, got {}", cells.len()));
    }
    Ok([parse_set(net, cells[0])?, parse_set(net, cells[1])?, parse_set(net, cells[2])?])
}

/// Initial state as `id=count` pairs (unlisted species start at zero) or
/// as a positional list of counts for every species.
pub fn parse_x0(net: &ReactionNetwork, s: Option<&str>) -> Result<Vec<i64>, String> {
    let mut x = vec![0; net.n_species()];
    let Some(s) = s else { return Ok(x) };
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    if items.iter().all(|i| !i.contains('=')) && !items.is_empty() {
        if items.len() != net.n_species() {
            return Err(format!("positional x0 needs {} counts, got {}", net.n_species(), items.len()));
        }
        for (k, item) in items.iter().enumerate() {
            x[k] = parse_count(item)?;
        }
        return Ok(x);
    }
    for item in items {
        let (id, v) = item.split_once('=').ok_or_else(|| format!("expected id=count, got {item:?}"))?;
        let k = net.species_index(id.trim()).map_err(|e| e.to_string())?;
        x[k] = parse_count(v.trim())?;
    }
    Ok(x)
}

fn parse_count(s: &str) -> Result<i64, String> {
    match s.parse::<i64>() {
        Ok(v) if v >= 0 => Ok(v),
        _ => Err(format!("invalid count {s:?}")),
    }
}
