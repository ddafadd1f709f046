//! The c-pebble equivalence game over two finite relation algebras.
//!
//! A position pairs pebbled elements of `A` with pebbled elements of `B`.
//! ∃ survives while sending each term value under `α` to the same term's
//! value under `β` is a well-defined isomorphism between the generated
//! subalgebras.

mod formula;
mod transfer;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{input_err, Error, Result};
use crate::ra::{AtomStructure, Term};

pub use formula::{check_sentence, sample_formula_agreement, AgreementReport, Formula, FormulaSampler};
pub use transfer::{
    eta, gamma, play_transfer, probe_reserved_colours, transfer_respond, translate_non_green, verify_terms_lemma,
    ProbeViolation, TermViolation, TermsReport, Transfer, TransferAdversary, TransferChecks, TransferFailure,
    TransferReport, TransferState,
};

/// Which algebra an element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum AlgebraSide {
    A,
    B,
}

/// Pebbled elements as raw atom sets; `alpha[t]` is set iff `beta[t]` is.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PebblePosition {
    alpha: Vec<Option<u64>>,
    beta: Vec<Option<u64>>,
}

impl PebblePosition {
    pub fn new(pebbles: usize) -> Self {
        Self {
            alpha: vec![None; pebbles],
            beta: vec![None; pebbles],
        }
    }

    pub fn from_maps(alpha: Vec<Option<u64>>, beta: Vec<Option<u64>>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return input_err("pebble maps differ in length");
        }
        if alpha.iter().zip(&beta).any(|(x, y)| x.is_some() != y.is_some()) {
            return input_err("pebble maps have different domains");
        }
        Ok(Self { alpha, beta })
    }

    pub fn pebbles(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self, t: usize) -> Option<u64> {
        self.alpha[t]
    }

    pub fn beta(&self, t: usize) -> Option<u64> {
        self.beta[t]
    }

    /// Places (or moves) pebble pair `t`.
    pub fn place(&mut self, t: usize, x: u64, y: u64) {
        self.alpha[t] = Some(x);
        self.beta[t] = Some(y);
    }

    pub fn without(&self, t: usize) -> Self {
        let mut p = self.clone();
        p.alpha[t] = None;
        p.beta[t] = None;
        p
    }

    /// `(t, α(t), β(t))` for placed pebbles.
    pub fn placed(&self) -> impl Iterator<Item = (usize, u64, u64)> + '_ {
        self.alpha
            .iter()
            .zip(&self.beta)
            .enumerate()
            .filter_map(|(t, (x, y))| Some((t, (*x)?, (*y)?)))
    }

    fn validate(&self, a: &AtomStructure, b: &AtomStructure) -> Result<()> {
        for (t, x, y) in self.placed() {
            if x & !a.full_bits() != 0 || y & !b.full_bits() != 0 {
                return input_err(format!("pebble {t} holds an element outside its algebra"));
            }
        }
        Ok(())
    }

    /// Pebble-order-free key: pebbles are interchangeable.
    fn key(&self) -> Vec<Option<(u64, u64)>> {
        let mut k: Vec<_> = self.alpha.iter().zip(&self.beta).map(|(x, y)| x.zip(*y)).collect();
        k.sort_unstable();
        k
    }
}

/// A term `t` with `t^α` empty and `t^β` not, or the other way round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapConflict {
    pub term: String,
    pub value_a: u64,
    pub value_b: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InducedMap {
    pub is_iso: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<MapConflict>,
    /// Atoms of the generated subalgebras (when `is_iso`).
    pub blocks: usize,
}

#[derive(Clone, Copy)]
enum Node {
    Leaf(u8),
    Meet(u32, u32),
    Complement(u32),
    Converse(u32),
    Compose(u32, u32),
}

/// Term arena; leaves are `1`, `1'`, then variables.
#[derive(Default)]
struct Terms {
    nodes: Vec<Node>,
}

impl Terms {
    fn push(&mut self, n: Node) -> u32 {
        self.nodes.push(n);
        (self.nodes.len() - 1) as u32
    }

    fn build(&self, i: u32) -> Term {
        match self.nodes[i as usize] {
            Node::Leaf(0) => Term::One,
            Node::Leaf(1) => Term::Identity,
            Node::Leaf(v) => Term::var(v as usize - 2),
            Node::Meet(x, y) => Term::meet(self.build(x), self.build(y)),
            Node::Complement(x) => Term::complement(self.build(x)),
            Node::Converse(x) => Term::converse(self.build(x)),
            Node::Compose(x, y) => Term::compose(self.build(x), self.build(y)),
        }
    }
}

/// Paired atoms of the two generated subalgebras: block `i` is the pair of
/// atom sets `(p[i], q[i])`, the value in each algebra of the term `term[i]`.
pub(crate) struct Blocks {
    p: Vec<u64>,
    q: Vec<u64>,
    term: Vec<u32>,
    terms: Terms,
}

/// Outcome of one refinement.
enum Refine {
    Split,
    Stable,
    Conflict(u32),
}

impl Blocks {
    fn new(a: &AtomStructure, b: &AtomStructure) -> Self {
        let mut terms = Terms::default();
        let one = terms.push(Node::Leaf(0));
        Self {
            p: vec![a.full_bits()],
            q: vec![b.full_bits()],
            term: vec![one],
            terms,
        }
    }

    fn refine(&mut self, x: u64, y: u64, tx: u32) -> Refine {
        let mut split = false;
        let mut complement = None;
        for i in 0..self.p.len() {
            let (p, q) = (self.p[i], self.q[i]);
            let (pin, qin) = (p & x, q & y);
            let (pout, qout) = (p & !x, q & !y);
            if (pin == 0) != (qin == 0) {
                let t = self.terms.push(Node::Meet(self.term[i], tx));
                return Refine::Conflict(t);
            }
            if (pout == 0) != (qout == 0) {
                let c = *complement.get_or_insert_with(|| self.terms.push(Node::Complement(tx)));
                let t = self.terms.push(Node::Meet(self.term[i], c));
                return Refine::Conflict(t);
            }
            if pin != 0 && pout != 0 {
                let c = *complement.get_or_insert_with(|| self.terms.push(Node::Complement(tx)));
                let bt = self.term[i];
                self.p[i] = pin;
                self.q[i] = qin;
                self.term[i] = self.terms.push(Node::Meet(bt, tx));
                self.p.push(pout);
                self.q.push(qout);
                let t = self.terms.push(Node::Meet(bt, c));
                self.term.push(t);
                split = true;
            }
        }
        if split {
            Refine::Split
        } else {
            Refine::Stable
        }
    }

    /// Refines by the seeds and closes under converse and composition.
    /// Returns the conflicting term on failure.
    fn close(
        &mut self,
        a: &AtomStructure,
        b: &AtomStructure,
        seeds: impl IntoIterator<Item = (u64, u64, u32)>,
    ) -> Option<u32> {
        for (x, y, t) in seeds {
            if let Refine::Conflict(c) = self.refine(x, y, t) {
                return Some(c);
            }
        }
        // every element is a union of blocks and the operations distribute
        // over unions, so blocks alone need closing
        loop {
            let n = self.p.len();
            let mut changed = false;
            for i in 0..n {
                let (x, y) = (a.converse_bits(self.p[i]), b.converse_bits(self.q[i]));
                if x == self.p[i] && y == self.q[i] {
                    continue;
                }
                let t = self.terms.push(Node::Converse(self.term[i]));
                match self.refine(x, y, t) {
                    Refine::Conflict(c) => return Some(c),
                    Refine::Split => changed = true,
                    Refine::Stable => {}
                }
            }
            for i in 0..self.p.len() {
                for j in 0..self.p.len() {
                    let x = a.compose_bits(self.p[i], self.p[j]);
                    let y = b.compose_bits(self.q[i], self.q[j]);
                    let t = self.terms.push(Node::Compose(self.term[i], self.term[j]));
                    match self.refine(x, y, t) {
                        Refine::Conflict(c) => return Some(c),
                        Refine::Split => changed = true,
                        Refine::Stable => {}
                    }
                }
            }
            if !changed {
                return None;
            }
        }
    }

    fn len(&self) -> usize {
        self.p.len()
    }
}

/// Blocks of the subalgebras generated by the position, or the conflict.
pub(crate) fn generate(
    a: &AtomStructure,
    b: &AtomStructure,
    p: &PebblePosition,
) -> std::result::Result<Blocks, (Blocks, u32)> {
    let mut blocks = Blocks::new(a, b);
    let id = blocks.terms.push(Node::Leaf(1));
    let mut seeds = vec![(1u64 << a.identity(), 1u64 << b.identity(), id)];
    for (t, x, y) in p.placed() {
        let leaf = blocks.terms.push(Node::Leaf(t as u8 + 2));
        seeds.push((x, y, leaf));
    }
    match blocks.close(a, b, seeds) {
        None => Ok(blocks),
        Some(c) => Err((blocks, c)),
    }
}

/// Decides whether the induced map is a well-defined isomorphism of the
/// generated subalgebras, by refining a paired partition of the atoms.
pub fn induced_map_check(a: &AtomStructure, b: &AtomStructure, p: &PebblePosition) -> Result<InducedMap> {
    p.validate(a, b)?;
    if p.pebbles() > 250 {
        return input_err("too many pebbles");
    }
    Ok(match generate(a, b, p) {
        Ok(blocks) => InducedMap {
            is_iso: true,
            witness: None,
            blocks: blocks.len(),
        },
        Err((blocks, c)) => {
            let term = blocks.terms.build(c);
            let lookup_a = |i: usize| p.alpha.get(i).copied().flatten();
            let lookup_b = |i: usize| p.beta.get(i).copied().flatten();
            InducedMap {
                is_iso: false,
                witness: Some(MapConflict {
                    value_a: term.eval_bits(a, &lookup_a)?,
                    value_b: term.eval_bits(b, &lookup_b)?,
                    term: term.to_string(),
                }),
                blocks: blocks.len(),
            }
        }
    })
}

/// Reference check: closes the set of element pairs under every operation
/// and looks for a pair sharing a coordinate with another. Exponential;
/// only for small algebras.
pub fn induced_map_check_naive(a: &AtomStructure, b: &AtomStructure, p: &PebblePosition) -> Result<bool> {
    p.validate(a, b)?;
    let mut fwd: HashMap<u64, u64> = HashMap::new();
    let mut bwd: HashMap<u64, u64> = HashMap::new();
    let mut list: Vec<(u64, u64)> = Vec::new();
    let mut add = |x: u64, y: u64, list: &mut Vec<(u64, u64)>| -> bool {
        match (fwd.get(&x), bwd.get(&y)) {
            (Some(&y2), _) if y2 != y => false,
            (_, Some(&x2)) if x2 != x => false,
            (Some(_), Some(_)) => true,
            _ => {
                fwd.insert(x, y);
                bwd.insert(y, x);
                list.push((x, y));
                true
            }
        }
    };
    let mut seeds = vec![
        (0, 0),
        (a.full_bits(), b.full_bits()),
        (1 << a.identity(), 1 << b.identity()),
    ];
    seeds.extend(p.placed().map(|(_, x, y)| (x, y)));
    for (x, y) in seeds {
        if !add(x, y, &mut list) {
            return Ok(false);
        }
    }
    let mut k = 0;
    while k < list.len() {
        let (x, y) = list[k];
        if !add(a.complement_bits(x), b.complement_bits(y), &mut list)
            || !add(a.converse_bits(x), b.converse_bits(y), &mut list)
        {
            return Ok(false);
        }
        for j in 0..=k {
            let (x2, y2) = list[j];
            let ok = add(x & x2, y & y2, &mut list)
                && add(x | x2, y | y2, &mut list)
                && add(a.compose_bits(x, x2), b.compose_bits(y, y2), &mut list)
                && add(a.compose_bits(x2, x), b.compose_bits(y2, y), &mut list);
            if !ok {
                return Ok(false);
            }
        }
        k += 1;
    }
    Ok(true)
}

/// Largest atom count the exhaustive pebble solver accepts.
pub const PEBBLE_ATOM_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PebbleWinner {
    Exists,
    Forall,
    /// Position budget exhausted.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PebbleOutcome {
    pub winner: PebbleWinner,
    /// Positions expanded.
    pub positions: u64,
}

struct PebbleSolver<'a> {
    a: &'a AtomStructure,
    b: &'a AtomStructure,
    memo: HashMap<(Vec<Option<(u64, u64)>>, usize), bool>,
    budget: u64,
    positions: u64,
    out_of_budget: bool,
}

/// Every `y` compatible with `x` on each block of `blocks`: empty where `x`
/// misses the block, full where `x` covers it, otherwise a proper non-empty
/// part. Any other reply is refuted by a single block.
pub(crate) fn compatible_replies(x: u64, own: &[u64], other: &[u64]) -> Option<Vec<u64>> {
    let mut out = vec![0u64];
    for (&p, &q) in own.iter().zip(other) {
        let part = x & p;
        if part == 0 {
            continue;
        }
        if part == p {
            for y in &mut out {
                *y |= q;
            }
            continue;
        }
        let proper: Vec<u64> = crate::structures::subsets(q).filter(|&s| s != 0 && s != q).collect();
        if proper.is_empty() {
            return None;
        }
        out = out.iter().flat_map(|&y| proper.iter().map(move |&s| y | s)).collect();
    }
    Some(out)
}

impl PebbleSolver<'_> {
    fn forall_wins(&mut self, pos: &PebblePosition, left: usize) -> Result<bool> {
        if left == 0 {
            return Ok(false);
        }
        let key = (pos.key(), left);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        if self.positions >= self.budget {
            self.out_of_budget = true;
            return Ok(false);
        }
        self.positions += 1;
        let mut won = false;
        'moves: for t in 0..pos.pebbles() {
            let rest = pos.without(t);
            let Ok(blocks) = generate(self.a, self.b, &rest) else {
                unreachable!("a sub-position of a surviving position survives");
            };
            for side in [AlgebraSide::A, AlgebraSide::B] {
                let (own, other, full) = match side {
                    AlgebraSide::A => (&blocks.p, &blocks.q, self.a.full_bits()),
                    AlgebraSide::B => (&blocks.q, &blocks.p, self.b.full_bits()),
                };
                for x in 0..=full {
                    let replies = compatible_replies(x, own, other).unwrap_or_default();
                    let mut answered = false;
                    for y in replies {
                        let (xa, yb) = match side {
                            AlgebraSide::A => (x, y),
                            AlgebraSide::B => (y, x),
                        };
                        let mut next = rest.clone();
                        next.place(t, xa, yb);
                        if generate(self.a, self.b, &next).is_err() {
                            continue;
                        }
                        if !self.forall_wins(&next, left - 1)? {
                            answered = true;
                            break;
                        }
                        if self.out_of_budget {
                            return Ok(false);
                        }
                    }
                    if !answered {
                        won = true;
                        break 'moves;
                    }
                }
            }
        }
        if !self.out_of_budget {
            self.memo.insert(key, won);
        }
        Ok(won)
    }
}

/// Exact value of the `c`-pebble, `n`-round game from empty maps.
pub fn solve_bounded_pebble(a: &AtomStructure, b: &AtomStructure, c: usize, n: usize) -> Result<PebbleOutcome> {
    solve_bounded_pebble_with_budget(a, b, c, n, u64::MAX)
}

pub fn solve_bounded_pebble_with_budget(
    a: &AtomStructure,
    b: &AtomStructure,
    c: usize,
    n: usize,
    budget: u64,
) -> Result<PebbleOutcome> {
    for s in [a, b] {
        if s.atom_count() > PEBBLE_ATOM_CAP {
            return Err(Error::CapExceeded {
                what: "pebble game atom count",
                value: s.atom_count(),
                cap: PEBBLE_ATOM_CAP,
            });
        }
    }
    let start = PebblePosition::new(c);
    if generate(a, b, &start).is_err() {
        return Ok(PebbleOutcome {
            winner: PebbleWinner::Forall,
            positions: 0,
        });
    }
    let mut s = PebbleSolver {
        a,
        b,
        memo: HashMap::new(),
        budget,
        positions: 0,
        out_of_budget: false,
    };
    let won = s.forall_wins(&start, n)?;
    let winner = if s.out_of_budget {
        PebbleWinner::Inconclusive
    } else if won {
        PebbleWinner::Forall
    } else {
        PebbleWinner::Exists
    };
    Ok(PebbleOutcome {
        winner,
        positions: s.positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rainbow::build_rainbow;
    use crate::structures::{examples, Digraph};
    use proptest::prelude::*;

    fn rainbow_atoms(g: &Digraph, h: &Digraph) -> AtomStructure {
        build_rainbow(&g.to_structure(), &h.to_structure()).unwrap().atoms().clone()
    }

    fn k1() -> AtomStructure {
        let p = examples::loopless_point();
        rainbow_atoms(&p, &p)
    }

    #[test]
    fn identity_positions_are_isomorphisms() {
        let a = k1();
        let mut p = PebblePosition::new(2);
        assert!(induced_map_check(&a, &a, &p).unwrap().is_iso);
        p.place(0, 0b100110, 0b100110);
        p.place(1, 0b000011, 0b000011);
        let out = induced_map_check(&a, &a, &p).unwrap();
        assert!(out.is_iso);
        assert!(out.witness.is_none());
    }

    #[test]
    fn mismatched_pebbles_give_a_witness() {
        let a = k1();
        let mut p = PebblePosition::new(1);
        // the identity atom against white
        p.place(0, 1, 0b100);
        let out = induced_map_check(&a, &a, &p).unwrap();
        assert!(!out.is_iso);
        let w = out.witness.unwrap();
        assert!((w.value_a == 0) != (w.value_b == 0), "{w:?}");
    }

    #[test]
    fn ill_defined_maps_are_rejected() {
        let a = k1();
        let mut p = PebblePosition::new(2);
        p.place(0, 0b10, 0b10);
        p.place(1, 0b10, 0b100);
        assert!(!induced_map_check(&a, &a, &p).unwrap().is_iso);
        assert!(!induced_map_check_naive(&a, &a, &p).unwrap());
    }

    #[test]
    fn domains_must_agree() {
        assert!(PebblePosition::from_maps(vec![Some(1), None], vec![Some(1), Some(2)]).is_err());
        assert!(PebblePosition::from_maps(vec![Some(1)], vec![Some(1), None]).is_err());
    }

    #[test]
    fn copycat_wins_on_equal_algebras() {
        let a = k1();
        let out = solve_bounded_pebble(&a, &a, 1, 2).unwrap();
        assert_eq!(out.winner, PebbleWinner::Exists);
        let out = solve_bounded_pebble(&a, &a, 2, 0).unwrap();
        assert_eq!(out.winner, PebbleWinner::Exists);
    }

    #[test]
    fn pebble_cap_enforced() {
        let g = Digraph::empty(3).unwrap();
        let big = rainbow_atoms(&g, &g);
        assert!(matches!(
            solve_bounded_pebble(&big, &big, 1, 1),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn compatible_replies_respect_blocks() {
        let ys = compatible_replies(0b0110, &[0b0011, 0b1100], &[0b0101, 0b1010]).unwrap();
        assert_eq!(ys, vec![0b0001 | 0b0010, 0b0001 | 0b1000, 0b0100 | 0b0010, 0b0100 | 0b1000]);
        assert!(compatible_replies(0b01, &[0b11], &[0b01]).is_none());
    }

    fn two_atom_structures() -> impl Strategy<Value = (AtomStructure, AtomStructure)> {
        let pairs = vec![
            (examples::loopless_point(), examples::loopless_point()),
            (examples::single_arc(), examples::loopless_point()),
            (Digraph::from_edges(1, [(0, 0)]).unwrap(), examples::loopless_point()),
        ];
        (0..pairs.len(), 0..pairs.len()).prop_map(move |(i, j)| {
            (
                rainbow_atoms(&pairs[i].0, &pairs[i].1),
                rainbow_atoms(&pairs[j].0, &pairs[j].1),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn refinement_agrees_with_pair_closure(
            (a, b) in two_atom_structures(),
            raw in proptest::collection::vec((any::<u64>(), any::<u64>()), 0..3),
        ) {
            let mut p = PebblePosition::new(raw.len());
            for (t, (x, y)) in raw.iter().enumerate() {
                p.place(t, x & a.full_bits(), y & b.full_bits());
            }
            let fast = induced_map_check(&a, &b, &p).unwrap();
            prop_assert_eq!(fast.is_iso, induced_map_check_naive(&a, &b, &p).unwrap());
            if let Some(w) = fast.witness {
                prop_assert!((w.value_a == 0) != (w.value_b == 0));
            }
        }

        #[test]
        fn same_element_on_both_sides_is_iso(x in any::<u64>()) {
            let a = k1();
            let mut p = PebblePosition::new(1);
            p.place(0, x & a.full_bits(), x & a.full_bits());
            prop_assert!(induced_map_check(&a, &a, &p).unwrap().is_iso);
        }
    }
}
