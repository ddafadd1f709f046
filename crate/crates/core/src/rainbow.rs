//! The rainbow atom structure built from two binary structures `G` and `H`.
//!
//! Atoms, in canonical order: the identity `1'`, black `b`, white `w`,
//! yellow `y`, one green `g_i` per `G`-node, then one red `r_{j,j'}` per
//! ordered pair of `H`-nodes (diagonal included), lexicographically.
//! Every atom is self-converse except `r_{j,j'}˘ = r_{j',j}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ra::{AtomStructure, Triple, MAX_ATOMS};
use crate::structures::hom::HomContext;
use crate::structures::BinaryStructure;

pub const IDENTITY: usize = 0;
pub const BLACK: usize = 1;
pub const WHITE: usize = 2;
pub const YELLOW: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Colour {
    Identity,
    Black,
    White,
    Yellow,
    Green,
    Red,
}

impl Colour {
    pub fn name(self) -> &'static str {
        match self {
            Colour::Identity => "identity",
            Colour::Black => "black",
            Colour::White => "white",
            Colour::Yellow => "yellow",
            Colour::Green => "green",
            Colour::Red => "red",
        }
    }
}

/// Colour class of an atom together with its index payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AtomKind {
    Identity,
    Black,
    White,
    Yellow,
    Green(usize),
    Red(usize, usize),
}

impl AtomKind {
    pub fn colour(self) -> Colour {
        match self {
            AtomKind::Identity => Colour::Identity,
            AtomKind::Black => Colour::Black,
            AtomKind::White => Colour::White,
            AtomKind::Yellow => Colour::Yellow,
            AtomKind::Green(_) => Colour::Green,
            AtomKind::Red(..) => Colour::Red,
        }
    }
}

/// A rainbow atom structure with its colour bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rainbow {
    atoms: AtomStructure,
    kinds: Vec<AtomKind>,
    g: BinaryStructure,
    h: BinaryStructure,
    g_size: usize,
    h_size: usize,
}

impl Rainbow {
    pub fn atoms(&self) -> &AtomStructure {
        &self.atoms
    }

    /// The structure indexing the greens.
    pub fn g(&self) -> &BinaryStructure {
        &self.g
    }

    /// The structure indexing the reds.
    pub fn h(&self) -> &BinaryStructure {
        &self.h
    }

    pub fn g_size(&self) -> usize {
        self.g_size
    }

    pub fn h_size(&self) -> usize {
        self.h_size
    }

    pub fn atom_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, atom: usize) -> AtomKind {
        self.kinds[atom]
    }

    pub fn colour_of(&self, atom: usize) -> Colour {
        self.kinds[atom].colour()
    }

    #[inline]
    pub fn is_green(&self, atom: usize) -> bool {
        matches!(self.kinds[atom], AtomKind::Green(_))
    }

    #[inline]
    pub fn is_red(&self, atom: usize) -> bool {
        matches!(self.kinds[atom], AtomKind::Red(..))
    }

    pub fn green_index(&self, atom: usize) -> Result<usize> {
        match self.kinds[atom] {
            AtomKind::Green(i) => Ok(i),
            other => Err(Error::WrongColour {
                atom,
                expected: "green",
                actual: other.colour().name(),
            }),
        }
    }

    pub fn red_indices(&self, atom: usize) -> Result<(usize, usize)> {
        match self.kinds[atom] {
            AtomKind::Red(j, j2) => Ok((j, j2)),
            other => Err(Error::WrongColour {
                atom,
                expected: "red",
                actual: other.colour().name(),
            }),
        }
    }

    #[inline]
    pub fn green(&self, i: usize) -> usize {
        debug_assert!(i < self.g_size);
        4 + i
    }

    #[inline]
    pub fn red(&self, j: usize, j2: usize) -> usize {
        debug_assert!(j < self.h_size && j2 < self.h_size);
        4 + self.g_size + j * self.h_size + j2
    }

    /// Bit mask of all green atoms.
    pub fn green_mask(&self) -> u64 {
        ((1u64 << self.g_size) - 1) << 4
    }

    /// Bit mask of every non-green atom.
    pub fn non_green_mask(&self) -> u64 {
        self.atoms.full_bits() & !self.green_mask()
    }

    /// Green support of an atom set, as `G`-nodes.
    pub fn green_support(&self, bits: u64) -> u64 {
        (bits & self.green_mask()) >> 4
    }

    /// The atom set of greens over a node mask.
    pub fn greens_over(&self, nodes: u64) -> u64 {
        (nodes << 4) & self.green_mask()
    }
}

fn labels(g_size: usize, h_size: usize) -> Vec<String> {
    let mut labels: Vec<String> = ["1'", "b", "w", "y"].iter().map(|s| s.to_string()).collect();
    labels.extend((0..g_size).map(|i| format!("g{i}")));
    for j in 0..h_size {
        for j2 in 0..h_size {
            labels.push(format!("r{j},{j2}"));
        }
    }
    labels
}

/// Builds the rainbow atom structure of `(G, H)`; its forbidden set is the
/// Peircean closure of the six seed families.
pub fn build_rainbow(g: &BinaryStructure, h: &BinaryStructure) -> Result<Rainbow> {
    let (gs, hs) = (g.size(), h.size());
    if gs == 0 || hs == 0 {
        return Err(Error::Input("both structures need at least one node".into()));
    }
    let count = 4 + gs + hs * hs;
    if count > MAX_ATOMS {
        return Err(Error::CapExceeded {
            what: "rainbow atom count",
            value: count,
            cap: MAX_ATOMS,
        });
    }
    let mut kinds = vec![AtomKind::Identity, AtomKind::Black, AtomKind::White, AtomKind::Yellow];
    kinds.extend((0..gs).map(AtomKind::Green));
    for j in 0..hs {
        for j2 in 0..hs {
            kinds.push(AtomKind::Red(j, j2));
        }
    }
    let green = |i: usize| 4 + i;
    let red = |j: usize, j2: usize| 4 + gs + j * hs + j2;
    let converse: Vec<usize> = kinds
        .iter()
        .enumerate()
        .map(|(a, k)| match *k {
            AtomKind::Red(j, j2) => red(j2, j),
            _ => a,
        })
        .collect();

    let mut seeds: Vec<Triple> = Vec::new();
    // (I) identity law
    for a in 0..count {
        for b in 0..count {
            if a != b {
                seeds.push((IDENTITY, a, b));
            }
        }
    }
    // (II) no green triangles, no green-green-white
    for i in 0..gs {
        for i2 in 0..gs {
            seeds.push((green(i), green(i2), WHITE));
            for i3 in 0..gs {
                seeds.push((green(i), green(i2), green(i3)));
            }
        }
    }
    // (III)
    seeds.push((YELLOW, YELLOW, YELLOW));
    seeds.push((YELLOW, YELLOW, BLACK));
    // (IV) red triangles must agree on indices
    for j1 in 0..hs {
        for j2 in 0..hs {
            for k2 in 0..hs {
                for k3 in 0..hs {
                    for m1 in 0..hs {
                        for m3 in 0..hs {
                            if !(j1 == m1 && j2 == k2 && k3 == m3) {
                                seeds.push((red(j1, j2), red(k2, k3), red(m1, m3)));
                            }
                        }
                    }
                }
            }
        }
    }
    // (V) and (VI) green-green-red
    let ctx = HomContext::new(g, h);
    for i in 0..gs {
        for i2 in 0..gs {
            for j in 0..hs {
                for j2 in 0..hs {
                    if i == i2 || !ctx.compatible(i, j, i2, j2) {
                        seeds.push((green(i), green(i2), red(j, j2)));
                    }
                }
            }
        }
    }
    let atoms = AtomStructure::from_seeds(labels(gs, hs), IDENTITY, converse, seeds)?;
    Ok(Rainbow {
        atoms,
        kinds,
        g: g.clone(),
        h: h.clone(),
        g_size: gs,
        h_size: hs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ra::{check_ra_axioms, DEFAULT_AXIOM_CAP};
    use crate::structures::{Digraph, PartialMap};

    fn edgeless(n: usize) -> BinaryStructure {
        Digraph::empty(n).unwrap().to_structure()
    }

    #[test]
    fn atom_count_and_order() {
        let r = build_rainbow(&edgeless(2), &edgeless(2)).unwrap();
        assert_eq!(r.atom_count(), 10);
        assert_eq!(
            r.atoms().labels(),
            &["1'", "b", "w", "y", "g0", "g1", "r0,0", "r0,1", "r1,0", "r1,1"]
        );
        assert_eq!(r.atoms().converse(r.red(0, 1)), r.red(1, 0));
        assert_eq!(r.atoms().converse(r.green(1)), r.green(1));
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            build_rainbow(&edgeless(1), &edgeless(8)),
            Err(Error::CapExceeded { .. })
        ));
        assert!(build_rainbow(&edgeless(0), &edgeless(1)).is_err());
    }

    #[test]
    fn colour_accessors() {
        let r = build_rainbow(&edgeless(4), &edgeless(3)).unwrap();
        assert_eq!(r.colour_of(IDENTITY), Colour::Identity);
        assert_eq!(r.red_indices(r.red(2, 0)).unwrap(), (2, 0));
        assert_eq!(r.colour_of(r.green(3)), Colour::Green);
        assert_eq!(r.green_index(r.green(3)).unwrap(), 3);
        assert!(matches!(r.green_index(WHITE), Err(Error::WrongColour { .. })));
        assert!(matches!(r.red_indices(r.green(0)), Err(Error::WrongColour { .. })));
    }

    #[test]
    fn green_green_red_rules() {
        let g = Digraph::from_edges(3, [(0, 1), (1, 2)]).unwrap().to_structure();
        let h = Digraph::from_edges(2, [(0, 1), (1, 1)]).unwrap().to_structure();
        let r = build_rainbow(&g, &h).unwrap();
        let a = r.atoms();
        for j in 0..2 {
            for j2 in 0..2 {
                assert!(a.is_forbidden(r.green(0), r.green(0), r.red(j, j2)));
                for i in 0..3 {
                    for i2 in 0..3 {
                        if i == i2 {
                            continue;
                        }
                        let p = PartialMap::from_pairs([(i, j), (i2, j2)]).unwrap();
                        let hom = crate::structures::is_partial_homomorphism(&p, &g, &h).unwrap();
                        assert_eq!(a.is_forbidden(r.green(i), r.green(i2), r.red(j, j2)), !hom);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_seed_transform() {
        // (1', a, b) with a != b yields (b, a˘, 1')
        let r = build_rainbow(&edgeless(2), &edgeless(2)).unwrap();
        let a = r.atoms();
        for x in 0..a.atom_count() {
            for y in 0..a.atom_count() {
                assert_eq!(a.is_forbidden(y, a.converse(x), IDENTITY), x != y);
                assert_eq!(a.is_forbidden(IDENTITY, x, y), x != y);
            }
        }
    }

    #[test]
    fn composition_examples() {
        let r = build_rainbow(&edgeless(2), &edgeless(2)).unwrap();
        let a = r.atoms();
        let got = a.compose(a.atom(r.green(0)), a.atom(r.green(1))).unwrap();
        let want = a
            .element([BLACK, YELLOW, r.red(0, 0), r.red(0, 1), r.red(1, 0), r.red(1, 1)])
            .unwrap();
        assert_eq!(got, want);
        let yy = a.compose(a.atom(YELLOW), a.atom(YELLOW)).unwrap();
        assert_eq!(yy.bits(), a.full_bits() & !(1 << YELLOW | 1 << BLACK));
    }

    /// Atom-level associativity holds exactly when every pair of distinct
    /// `G`-nodes has some compatible target pair in `H`.
    #[test]
    fn associativity_tracks_pair_coverage() {
        let samples = [
            edgeless(1),
            edgeless(2),
            Digraph::from_edges(1, [(0, 0)]).unwrap().to_structure(),
            Digraph::from_edges(2, [(0, 1)]).unwrap().to_structure(),
            Digraph::from_edges(2, [(0, 1), (1, 0), (1, 1)]).unwrap().to_structure(),
        ];
        for g in &samples {
            for h in &samples {
                let r = build_rainbow(g, h).unwrap();
                let report = check_ra_axioms(r.atoms(), DEFAULT_AXIOM_CAP).unwrap();
                let covered = (0..g.size()).all(|i| {
                    (0..g.size()).all(|i2| {
                        i == i2
                            || (0..h.size()).any(|j| {
                                (0..h.size()).any(|j2| {
                                    let p = PartialMap::from_pairs([(i, j), (i2, j2)]).unwrap();
                                    crate::structures::is_partial_homomorphism(&p, g, h).unwrap()
                                })
                            })
                    })
                });
                assert_eq!(report.passed(), covered, "{:?}", &report.failures[..report.failures.len().min(5)]);
                let non_assoc = report
                    .failures
                    .iter()
                    .all(|f| matches!(f, crate::ra::AxiomFailure::Associativity { .. }));
                assert!(non_assoc);
            }
        }
    }
}
