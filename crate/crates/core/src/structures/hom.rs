//! Partial homomorphisms, extension search and the graph-side hypotheses of
//! the rainbow construction.
//!
//! Predicates of the source and target structures are matched by name. A
//! source predicate missing from the target can never be preserved.
//! Reflexive pairs never constrain a partial map; only pairs of distinct
//! source nodes are checked.

use serde::Serialize;

use super::{BinaryStructure, Digraph, PartialMap, Relation};
use crate::error::{input_err, Error, Result};

pub(crate) struct HomContext<'a> {
    source_size: usize,
    target_size: usize,
    predicates: Vec<(&'a Relation, Option<&'a Relation>)>,
}

impl<'a> HomContext<'a> {
    pub(crate) fn new(g: &'a BinaryStructure, h: &'a BinaryStructure) -> Self {
        Self {
            source_size: g.size(),
            target_size: h.size(),
            predicates: g.predicates().iter().map(|p| (p, h.predicate(p.name()))).collect(),
        }
    }

    /// Is `{(i, j), (i2, j2)}` a partial homomorphism? Requires `i != i2`.
    #[inline]
    pub(crate) fn compatible(&self, i: usize, j: usize, i2: usize, j2: usize) -> bool {
        debug_assert_ne!(i, i2);
        self.predicates.iter().all(|(pg, ph)| {
            let forward = !pg.holds(i, i2) || ph.is_some_and(|p| p.holds(j, j2));
            let backward = !pg.holds(i2, i) || ph.is_some_and(|p| p.holds(j2, j));
            forward && backward
        })
    }

    fn check_range(&self, p: &PartialMap) -> Result<()> {
        for (s, t) in p.iter() {
            if s >= self.source_size || t >= self.target_size {
                return input_err(format!(
                    "pair ({s},{t}) out of range for structures of sizes {} and {}",
                    self.source_size, self.target_size
                ));
            }
        }
        Ok(())
    }

    fn is_partial_hom(&self, p: &PartialMap) -> bool {
        let pairs: Vec<_> = p.iter().collect();
        pairs.iter().enumerate().all(|(k, &(i, j))| {
            pairs[k + 1..]
                .iter()
                .all(|&(i2, j2)| self.compatible(i, j, i2, j2))
        })
    }

    /// Backtracking in node order with targets tried in ascending order, so the
    /// first hit is the lexicographically least extension.
    pub(crate) fn extend(&self, fixed: &[Option<usize>]) -> Option<Vec<usize>> {
        let n = self.source_size;
        if n == 0 {
            return Some(Vec::new());
        }
        if self.target_size == 0 {
            return None;
        }
        let mut assignment: Vec<Option<usize>> = fixed.to_vec();
        let order: Vec<usize> = (0..n).filter(|&u| fixed[u].is_none()).collect();
        if self.search(&order, 0, &mut assignment) {
            Some(assignment.into_iter().map(|a| a.expect("assigned")).collect())
        } else {
            None
        }
    }

    fn search(&self, order: &[usize], depth: usize, assignment: &mut [Option<usize>]) -> bool {
        let Some(&u) = order.get(depth) else {
            return true;
        };
        for t in 0..self.target_size {
            let ok = assignment
                .iter()
                .enumerate()
                .all(|(v, a)| v == u || a.is_none_or(|tv| self.compatible(u, t, v, tv)));
            if ok {
                assignment[u] = Some(t);
                if self.search(order, depth + 1, assignment) {
                    return true;
                }
            }
        }
        assignment[u] = None;
        false
    }

    fn extend_pair(&self, i: usize, j: usize, i2: usize, j2: usize) -> Option<Vec<usize>> {
        let mut fixed = vec![None; self.source_size];
        fixed[i] = Some(j);
        fixed[i2] = Some(j2);
        self.extend(&fixed)
    }

    /// First size-two partial homomorphism (on distinct sources) that does not
    /// extend, scanning `i < i2` then `j`, `j2` ascending.
    fn non_extending_pair(&self) -> Option<[(usize, usize); 2]> {
        for i in 0..self.source_size {
            for i2 in i + 1..self.source_size {
                for j in 0..self.target_size {
                    for j2 in 0..self.target_size {
                        if self.compatible(i, j, i2, j2) && self.extend_pair(i, j, i2, j2).is_none() {
                            return Some([(i, j), (i2, j2)]);
                        }
                    }
                }
            }
        }
        None
    }
}

/// True iff for all distinct `i, i'` in the domain and every predicate `b`,
/// `(i, i') ∈ b^G` implies `(p(i), p(i')) ∈ b^H`.
pub fn is_partial_homomorphism(p: &PartialMap, g: &BinaryStructure, h: &BinaryStructure) -> Result<bool> {
    let ctx = HomContext::new(g, h);
    ctx.check_range(p)?;
    Ok(ctx.is_partial_hom(p))
}

/// Whether a total map (given as a target list) is a homomorphism.
pub fn is_homomorphism(map: &[usize], g: &BinaryStructure, h: &BinaryStructure) -> bool {
    if map.len() != g.size() || map.iter().any(|&t| t >= h.size()) {
        return false;
    }
    let ctx = HomContext::new(g, h);
    (0..map.len()).all(|i| (i + 1..map.len()).all(|i2| ctx.compatible(i, map[i], i2, map[i2])))
}

/// The lexicographically least total homomorphism `G -> H` extending `p`, if
/// any. Fails if `p` is not itself a partial homomorphism.
pub fn extend_to_homomorphism(
    p: &PartialMap,
    g: &BinaryStructure,
    h: &BinaryStructure,
) -> Result<Option<Vec<usize>>> {
    let ctx = HomContext::new(g, h);
    ctx.check_range(p)?;
    if !ctx.is_partial_hom(p) {
        return Err(Error::Precondition("map is not a partial homomorphism".into()));
    }
    let mut fixed = vec![None; g.size()];
    for (s, t) in p.iter() {
        fixed[s] = Some(t);
    }
    Ok(ctx.extend(&fixed))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RainbowConditionFailure {
    /// No `j, j'` make `{(i, j), (i2, j')}` a partial homomorphism.
    NoPartialHomomorphism { i: usize, i2: usize },
    /// This size-two partial homomorphism has no total extension.
    NoExtension { map: [(usize, usize); 2] },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RainbowConditionReport {
    pub holds: bool,
    pub failure: Option<RainbowConditionFailure>,
}

/// The graph-side characterisation of complete representability of the
/// rainbow algebra: every pair of distinct `G`-nodes has some partial
/// homomorphism into `H` (part A), and every size-two partial homomorphism on
/// distinct sources extends to a total homomorphism (part B).
pub fn check_rainbow_condition(g: &BinaryStructure, h: &BinaryStructure) -> RainbowConditionReport {
    let ctx = HomContext::new(g, h);
    for i in 0..g.size() {
        for i2 in i + 1..g.size() {
            let exists = (0..h.size()).any(|j| (0..h.size()).any(|j2| ctx.compatible(i, j, i2, j2)));
            if !exists {
                return RainbowConditionReport {
                    holds: false,
                    failure: Some(RainbowConditionFailure::NoPartialHomomorphism { i, i2 }),
                };
            }
        }
    }
    match ctx.non_extending_pair() {
        Some(map) => RainbowConditionReport {
            holds: false,
            failure: Some(RainbowConditionFailure::NoExtension { map }),
        },
        None => RainbowConditionReport {
            holds: true,
            failure: None,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem42Report {
    /// Every size-two partial homomorphism `H -> H` extends to a total one.
    pub condition2: bool,
    /// A partial homomorphism `H -> H` with no extension, when condition 2 fails.
    pub condition2_witness: Option<[(usize, usize); 2]>,
    /// Some size-two partial homomorphism `G -> H` does not extend.
    pub condition3: bool,
    pub condition3_witness: Option<[(usize, usize); 2]>,
}

pub fn check_theorem42_conditions(g: &BinaryStructure, h: &BinaryStructure) -> Theorem42Report {
    let hh = HomContext::new(h, h).non_extending_pair();
    let gh = HomContext::new(g, h).non_extending_pair();
    Theorem42Report {
        condition2: hh.is_none(),
        condition2_witness: hh,
        condition3: gh.is_some(),
        condition3_witness: gh,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Corollary43Report {
    /// Every size-two partial embedding of `H` into itself extends to an
    /// automorphism (loops are not constrained, matching the three-predicate
    /// encoding).
    pub embeddings_extend: bool,
    pub embeddings_witness: Option<[(usize, usize); 2]>,
    /// There is no embedding of `G` into `H`.
    pub no_embedding: bool,
    pub embedding: Option<Vec<usize>>,
}

pub fn check_corollary43_conditions(g: &Digraph, h: &Digraph) -> Corollary43Report {
    let h3 = h.to_three_predicates();
    let witness = HomContext::new(&h3, &h3).non_extending_pair();
    let embedding = find_embedding(g, h);
    Corollary43Report {
        embeddings_extend: witness.is_none(),
        embeddings_witness: witness,
        no_embedding: embedding.is_none(),
        embedding,
    }
}

/// An injective map preserving edges and non-edges between distinct nodes.
pub fn find_embedding(g: &Digraph, h: &Digraph) -> Option<Vec<usize>> {
    let (g3, h3) = (g.to_three_predicates(), h.to_three_predicates());
    HomContext::new(&g3, &h3).extend(&vec![None; g.size()])
}
