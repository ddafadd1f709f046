//! Parsing of structure and algebra arguments.

use std::path::Path;

use anyhow::{bail, Context, Result};
use rra_core::ra::{AtomStructure, AtomStructureDump};
use rra_core::rainbow::{build_rainbow, Rainbow};
use rra_core::structures::{BinaryStructure, Digraph, PartialMap};

/// A structure given on the command line.
#[derive(Clone, Debug)]
pub enum Input {
    Digraph(Digraph),
    Structure(BinaryStructure),
}

impl Input {
    pub fn structure(&self) -> BinaryStructure {
        match self {
            Input::Digraph(g) => g.to_structure(),
            Input::Structure(s) => s.clone(),
        }
    }

    pub fn digraph(&self) -> Result<&Digraph> {
        match self {
            Input::Digraph(g) => Ok(g),
            Input::Structure(_) => bail!("this command needs a digraph, not a general binary structure"),
        }
    }
}

pub const STRUCTURE_HELP: &str = "\
Structures are either a file (digraph text `n <k>` plus adjacency rows, or JSON \
`{\"size\":k,\"predicates\":{...}}`) or one of: point, loop, arc, empty:N, \
cycle:N, complete:N, edges:N:0-1,1-2";

fn usize_arg(s: &str, what: &str) -> Result<usize> {
    s.parse().with_context(|| format!("bad {what} {s:?}"))
}

pub fn parse_input(spec: &str) -> Result<Input> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
        return if text.trim_start().starts_with('{') {
            Ok(Input::Structure(BinaryStructure::from_json(&text)?))
        } else {
            Ok(Input::Digraph(text.parse()?))
        };
    }
    let parts: Vec<&str> = spec.splitn(3, ':').collect();
    let g = match parts.as_slice() {
        ["point"] => Digraph::empty(1)?,
        ["loop"] => Digraph::from_edges(1, [(0, 0)])?,
        ["arc"] => Digraph::from_edges(2, [(0, 1)])?,
        ["empty", n] => Digraph::empty(usize_arg(n, "node count")?)?,
        ["cycle", n] => Digraph::cycle(usize_arg(n, "node count")?)?,
        ["complete", n] => Digraph::complete(usize_arg(n, "node count")?)?,
        ["edges", n, list] => {
            let mut edges = Vec::new();
            for e in list.split(',').filter(|e| !e.is_empty()) {
                let (u, v) = e.split_once('-').with_context(|| format!("bad edge {e:?}"))?;
                edges.push((usize_arg(u, "node")?, usize_arg(v, "node")?));
            }
            Digraph::from_edges(usize_arg(n, "node count")?, edges)?
        }
        _ => bail!("unrecognised structure {spec:?}; {STRUCTURE_HELP}"),
    };
    Ok(Input::Digraph(g))
}

/// An algebra: an atom-structure dump file, or `G+H` for the rainbow algebra.
pub enum AlgebraInput {
    Dump(AtomStructure),
    Rainbow(Rainbow),
}

impl AlgebraInput {
    pub fn atoms(&self) -> &AtomStructure {
        match self {
            AlgebraInput::Dump(a) => a,
            AlgebraInput::Rainbow(r) => r.atoms(),
        }
    }
}

pub fn parse_algebra(spec: &str) -> Result<AlgebraInput> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
        return Ok(AlgebraInput::Dump(AtomStructureDump::from_text(&text)?.into_structure()?));
    }
    let Some((g, h)) = spec.split_once('+') else {
        bail!("algebra {spec:?} is neither a dump file nor `G+H`");
    };
    let (g, h) = (parse_input(g)?, parse_input(h)?);
    Ok(AlgebraInput::Rainbow(build_rainbow(&g.structure(), &h.structure())?))
}

/// `0:1,2:0` style partial maps.
pub fn parse_map(spec: &str) -> Result<PartialMap> {
    let mut pairs = Vec::new();
    for item in spec.split(',').filter(|s| !s.is_empty()) {
        let (s, t) = item.split_once(':').with_context(|| format!("bad map entry {item:?}"))?;
        pairs.push((usize_arg(s, "source")?, usize_arg(t, "target")?));
    }
    Ok(PartialMap::from_pairs(pairs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_structures() {
        assert_eq!(parse_input("cycle:4").unwrap().digraph().unwrap().edge_count(), 8);
        assert_eq!(parse_input("edges:3:0-1,1-2").unwrap().digraph().unwrap().edge_count(), 2);
        assert!(parse_input("edges:2:0-5").is_err());
        assert!(parse_input("wheel").is_err());
    }

    #[test]
    fn maps_and_algebras() {
        assert_eq!(parse_map("0:1,1:0").unwrap().len(), 2);
        assert!(parse_map("0-1").is_err());
        assert_eq!(parse_algebra("arc+point").unwrap().atoms().atom_count(), 7);
    }
}
