//! Finite binary structures and digraphs.
//!
//! A [`BinaryStructure`] is a node set `0..size` with a list of named binary
//! predicates. Digraphs are the one-predicate case and have their own compact
//! type, [`Digraph`], since enumeration and the colouring game hunt work on
//! them directly.

pub(crate) mod canon;
pub(crate) mod hom;

pub use canon::{are_isomorphic, canonical_code, canonical_form, enumerate_digraphs, DEFAULT_ENUMERATION_CAP};
pub use hom::{
    check_corollary43_conditions, check_rainbow_condition, check_theorem42_conditions,
    extend_to_homomorphism, find_embedding, is_homomorphism, is_partial_homomorphism,
    Corollary43Report, RainbowConditionFailure, RainbowConditionReport, Theorem42Report,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

/// Largest supported node count; rows are stored as `u64` bit masks.
pub const MAX_NODES: usize = 64;

/// Name of the single predicate of a digraph viewed as a binary structure.
pub const EDGE: &str = "edge";
pub const NON_EDGE: &str = "nonedge";
pub const NON_EQUAL: &str = "noneq";

/// One named binary predicate, stored as adjacency rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    name: String,
    rows: Vec<u64>,
}

impl Relation {
    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn holds(&self, u: usize, v: usize) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    /// Row `u` as a bit mask over targets.
    #[inline]
    pub fn row(&self, u: usize) -> u64 {
        self.rows[u]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, &row)| bits(row).map(move |v| (u, v)))
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }
}

/// A finite structure over nodes `0..size` with named binary predicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryStructure {
    size: usize,
    predicates: Vec<Relation>,
}

impl BinaryStructure {
    /// A structure with no predicates.
    pub fn new(size: usize) -> Result<Self> {
        if size > MAX_NODES {
            return Err(Error::CapExceeded {
                what: "node count",
                value: size,
                cap: MAX_NODES,
            });
        }
        Ok(Self {
            size,
            predicates: Vec::new(),
        })
    }

    /// Builds a structure from `(name, pairs)` entries, in order.
    pub fn from_predicates<I, S, P>(size: usize, predicates: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, P)>,
        S: Into<String>,
        P: IntoIterator<Item = (usize, usize)>,
    {
        let mut s = Self::new(size)?;
        for (name, pairs) in predicates {
            s.add_predicate(name, pairs)?;
        }
        Ok(s)
    }

    pub fn add_predicate(
        &mut self,
        name: impl Into<String>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<()> {
        let name = name.into();
        if self.predicates.iter().any(|p| p.name == name) {
            return input_err(format!("duplicate predicate name {name:?}"));
        }
        let mut rows = vec![0u64; self.size];
        for (u, v) in pairs {
            if u >= self.size || v >= self.size {
                return input_err(format!(
                    "pair ({u},{v}) of predicate {name:?} is out of range for {} nodes",
                    self.size
                ));
            }
            rows[u] |= 1 << v;
        }
        self.predicates.push(Relation { name, rows });
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn predicates(&self) -> &[Relation] {
        &self.predicates
    }

    pub fn predicate(&self, name: &str) -> Option<&Relation> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// Relabels nodes: node `u` becomes `perm[u]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let predicates = self
            .predicates
            .iter()
            .map(|p| {
                let mut rows = vec![0u64; self.size];
                for (u, v) in p.pairs() {
                    rows[perm[u]] |= 1 << perm[v];
                }
                Relation {
                    name: p.name.clone(),
                    rows,
                }
            })
            .collect();
        Self {
            size: self.size,
            predicates,
        }
    }

    /// Parses the JSON document `{"size": k, "predicates": {"name": [[u,v],...]}}`.
    /// Predicates are ordered by name.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StructureDoc = serde_json::from_str(text)?;
        Self::from_predicates(
            doc.size,
            doc.predicates
                .into_iter()
                .map(|(name, pairs)| (name, pairs.into_iter().map(|[u, v]| (u, v)))),
        )
    }

    pub fn to_json(&self) -> String {
        let doc = StructureDoc {
            size: self.size,
            predicates: self
                .predicates
                .iter()
                .map(|p| (p.name.clone(), p.pairs().map(|(u, v)| [u, v]).collect()))
                .collect(),
        };
        serde_json::to_string(&doc).expect("structure serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct StructureDoc {
    size: usize,
    predicates: BTreeMap<String, Vec<[usize; 2]>>,
}

/// A finite directed graph on nodes `0..size`; loops are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digraph {
    size: usize,
    rows: Vec<u64>,
}

impl Digraph {
    pub fn empty(size: usize) -> Result<Self> {
        if size > MAX_NODES {
            return Err(Error::CapExceeded {
                what: "node count",
                value: size,
                cap: MAX_NODES,
            });
        }
        Ok(Self {
            size,
            rows: vec![0; size],
        })
    }

    pub fn from_edges(size: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::empty(size)?;
        for (u, v) in edges {
            if u >= size || v >= size {
                return input_err(format!("edge ({u},{v}) out of range for {size} nodes"));
            }
            g.rows[u] |= 1 << v;
        }
        Ok(g)
    }

    /// The symmetric digraph of an undirected edge list.
    pub fn undirected(size: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let edges: Vec<_> = edges.into_iter().collect();
        Self::from_edges(size, edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]))
    }

    /// The symmetric cycle on `n` nodes.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::undirected(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// The loopless complete digraph on `n` nodes.
    pub fn complete(n: usize) -> Result<Self> {
        Self::from_edges(n, (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))))
    }

    pub(crate) fn from_rows(size: usize, rows: Vec<u64>) -> Self {
        debug_assert_eq!(rows.len(), size);
        Self { size, rows }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    #[inline]
    pub fn row(&self, u: usize) -> u64 {
        self.rows[u]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, &row)| bits(row).map(move |v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn has_loops(&self) -> bool {
        (0..self.size).any(|u| self.has_edge(u, u))
    }

    /// Relabels nodes: node `u` becomes `perm[u]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut rows = vec![0u64; self.size];
        for (u, v) in self.edges() {
            rows[perm[u]] |= 1 << perm[v];
        }
        Self::from_rows(self.size, rows)
    }

    /// The one-predicate binary structure with predicate `edge`.
    pub fn to_structure(&self) -> BinaryStructure {
        BinaryStructure {
            size: self.size,
            predicates: vec![Relation {
                name: EDGE.to_string(),
                rows: self.rows.clone(),
            }],
        }
    }

    /// Encodes edges, non-edges and non-equality as three predicates so that
    /// homomorphisms of the encodings are exactly embeddings of the digraphs.
    /// Non-edges and non-equality range over distinct pairs only.
    pub fn to_three_predicates(&self) -> BinaryStructure {
        let n = self.size;
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let noneq: Vec<u64> = (0..n).map(|u| all & !(1 << u)).collect();
        let nonedge: Vec<u64> = (0..n).map(|u| noneq[u] & !self.rows[u]).collect();
        BinaryStructure {
            size: n,
            predicates: vec![
                Relation {
                    name: EDGE.to_string(),
                    rows: self.rows.clone(),
                },
                Relation {
                    name: NON_EDGE.to_string(),
                    rows: nonedge,
                },
                Relation {
                    name: NON_EQUAL.to_string(),
                    rows: noneq,
                },
            ],
        }
    }

    /// Row-major adjacency bits, `n <k>` header then `k` lines of `0`/`1`.
    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.size);
        for u in 0..self.size {
            for v in 0..self.size {
                out.push(if self.has_edge(u, v) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for Digraph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty digraph file".into()))?;
        let size = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["n", k] => k
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad node count {k:?}: {e}")))?,
            _ => return Err(Error::Parse(format!("expected `n <k>` header, got {header:?}"))),
        };
        let mut g = Digraph::empty(size)?;
        for u in 0..size {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing adjacency row {u}")))?;
            if line.chars().count() != size {
                return Err(Error::Parse(format!("row {u} has length {}, expected {size}", line.len())));
            }
            for (v, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => g.rows[u] |= 1 << v,
                    _ => return Err(Error::Parse(format!("unexpected character {ch:?} in row {u}"))),
                }
            }
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content {extra:?}")));
        }
        Ok(g)
    }
}

impl fmt::Display for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A finite partial map between node sets, functional in its source.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialMap(BTreeMap<usize, usize>);

impl PartialMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails if some source node appears twice.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (s, t) in pairs {
            if map.insert(s, t).is_some() {
                return input_err(format!("source node {s} appears twice in partial map"));
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, source: usize) -> Option<usize> {
        self.0.get(&source).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|(&s, &t)| (s, t))
    }

    pub fn sources(&self) -> BTreeSet<usize> {
        self.0.keys().copied().collect()
    }
}

/// Every submask of `mask`, in increasing order.
pub(crate) fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask { None } else { Some(((cur | !mask).wrapping_add(1)) & mask) };
        Some(cur)
    })
}

/// Iterates the set bit positions of a mask in ascending order.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}

/// Named example structures used throughout tests and the CLI.
pub mod examples {
    use super::Digraph;

    /// The undirected graph made of a 2-node path, a 3-node path and a looped
    /// vertex `v` joined to every path vertex. Nodes: `u0=0, u1=1, w0=2, w1=3,
    /// w2=4, v=5`.
    pub fn paths_with_apex() -> Digraph {
        let mut edges = vec![(0, 1), (2, 3), (3, 4), (5, 5)];
        edges.extend((0..5).map(|w| (w, 5)));
        Digraph::undirected(6, edges).expect("valid example")
    }

    /// Single arc `0 -> 1` on two nodes.
    pub fn single_arc() -> Digraph {
        Digraph::from_edges(2, [(0, 1)]).expect("valid example")
    }

    /// One node without a loop.
    pub fn loopless_point() -> Digraph {
        Digraph::empty(1).expect("valid example")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digraph_text_round_trip() {
        let g = Digraph::cycle(4).unwrap();
        let text = g.to_text();
        assert_eq!(text, "n 4\n0101\n1010\n0101\n1010\n");
        assert_eq!(text.parse::<Digraph>().unwrap(), g);
    }

    #[test]
    fn digraph_parse_errors() {
        assert!("".parse::<Digraph>().is_err());
        assert!("n 2\n01\n".parse::<Digraph>().is_err());
        assert!("n 2\n01\n2x\n".parse::<Digraph>().is_err());
        assert!("m 1\n0\n".parse::<Digraph>().is_err());
        assert!("n 1\n0\n0\n".parse::<Digraph>().is_err());
    }

    #[test]
    fn structure_json_round_trip() {
        let s = BinaryStructure::from_predicates(3, [("a", vec![(0, 1), (2, 2)]), ("b", vec![])]).unwrap();
        let back = BinaryStructure::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(
            s.to_json(),
            r#"{"size":3,"predicates":{"a":[[0,1],[2,2]],"b":[]}}"#
        );
    }

    #[test]
    fn structure_rejects_bad_input() {
        assert!(BinaryStructure::from_predicates(2, [("e", vec![(0, 2)])]).is_err());
        assert!(BinaryStructure::from_predicates(2, [("e", vec![]), ("e", vec![])]).is_err());
        assert!(BinaryStructure::new(65).is_err());
    }

    #[test]
    fn partial_map_rejects_duplicate_source() {
        assert!(PartialMap::from_pairs([(0, 1), (0, 2)]).is_err());
        assert_eq!(PartialMap::from_pairs([(0, 1), (2, 2)]).unwrap().len(), 2);
    }

    #[test]
    fn three_predicate_counts() {
        let one = Digraph::empty(1).unwrap().to_three_predicates();
        assert!(one.predicates().iter().all(|p| p.is_empty()));

        let looped = Digraph::from_edges(1, [(0, 0)]).unwrap().to_three_predicates();
        assert_eq!(looped.predicate(EDGE).unwrap().pairs().collect::<Vec<_>>(), vec![(0, 0)]);
        assert!(looped.predicate(NON_EDGE).unwrap().is_empty());
        assert!(looped.predicate(NON_EQUAL).unwrap().is_empty());

        let c4 = Digraph::cycle(4).unwrap().to_three_predicates();
        assert_eq!(c4.predicate(EDGE).unwrap().len(), 8);
        assert_eq!(c4.predicate(NON_EDGE).unwrap().len(), 4);
        assert_eq!(c4.predicate(NON_EQUAL).unwrap().len(), 12);
    }

    #[test]
    fn paths_with_apex_shape() {
        let h = examples::paths_with_apex();
        assert_eq!(h.size(), 6);
        assert!(h.has_edge(5, 5));
        assert_eq!(h.edge_count(), 2 * 3 + 1 + 2 * 5);
    }
}
