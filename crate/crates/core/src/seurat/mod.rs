//! The c-colour set-colouring game on a pair of binary structures, plus the
//! modified digraph variant with the extra "every pair is an edge" win.
//!
//! ∀ colours a node set of one structure with colour `t`, erasing the
//! previous use of `t` on both sides; ∃ colours a set of the other structure
//! with `t`. ∀ wins at the first position where palette occupancy differs
//! (C1) or some predicate meets a palette product on one side only (C2).

mod bounded;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::structures::{bits, BinaryStructure};

pub use bounded::solve_bounded;
pub use solver::{solve, solve_with_cap, ColouringStrategy, MirrorStrategy, SolveSummary, Solved, MAX_TABLE};

/// Default cap on `c * (|G| + |H|)`.
pub const DEFAULT_BIT_CAP: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Win conditions C1 and C2 over every predicate.
    Standard,
    /// C1, C2, and a mismatch in whether a palette product lies wholly
    /// inside a predicate (diagonal pairs included).
    Modified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    G,
    H,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::G => Side::H,
            Side::H => Side::G,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    Exists,
    Forall,
}

/// A colour set: bit `t` means colour `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Palette(pub u32);

/// For each colour `t < c`, the node set carrying `t` (bit masks).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Interpretation {
    size: usize,
    sets: Vec<u64>,
}

impl Interpretation {
    pub fn empty(size: usize, colours: usize) -> Self {
        Self {
            size,
            sets: vec![0; colours],
        }
    }

    pub fn from_sets(size: usize, sets: Vec<u64>) -> Result<Self> {
        let full = crate::ra::full_mask(size);
        if let Some(s) = sets.iter().find(|&&s| s & !full != 0) {
            return input_err(format!("colour set {s:#b} exceeds {size} nodes"));
        }
        Ok(Self { size, sets })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn colours(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, t: usize) -> u64 {
        self.sets[t]
    }

    pub fn sets(&self) -> &[u64] {
        &self.sets
    }

    /// The colours worn by node `u`.
    pub fn palette_of(&self, u: usize) -> Palette {
        Palette(
            self.sets
                .iter()
                .enumerate()
                .filter(|(_, &s)| s >> u & 1 == 1)
                .fold(0, |acc, (t, _)| acc | 1 << t),
        )
    }
}

/// `π^g`: nodes coloured with exactly the colours of `π`.
pub fn palette_members(pi: Palette, interp: &Interpretation) -> u64 {
    (0..interp.size())
        .filter(|&u| interp.palette_of(u) == pi)
        .fold(0, |acc, u| acc | 1 << u)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Position {
    pub g: Interpretation,
    pub h: Interpretation,
}

impl Position {
    pub fn initial(g_size: usize, h_size: usize, colours: usize) -> Self {
        Self {
            g: Interpretation::empty(g_size, colours),
            h: Interpretation::empty(h_size, colours),
        }
    }

    pub fn colours(&self) -> usize {
        self.g.colours()
    }

    /// The position after ∀ plays `choice` and ∃ answers with `reply`.
    pub fn after(&self, choice: &ForallChoice, reply: u64) -> Result<Self> {
        let t = choice.colour;
        if t >= self.colours() {
            return input_err(format!("colour {t} out of range"));
        }
        let (gset, hset) = match choice.side {
            Side::G => (choice.set, reply),
            Side::H => (reply, choice.set),
        };
        let mut next = self.clone();
        if gset & !crate::ra::full_mask(self.g.size) != 0 || hset & !crate::ra::full_mask(self.h.size) != 0 {
            return input_err("coloured set exceeds the structure");
        }
        next.g.sets[t] = gset;
        next.h.sets[t] = hset;
        Ok(next)
    }
}

/// ∀ colours `set` on `side` with `colour`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ForallChoice {
    pub colour: usize,
    pub side: Side,
    pub set: u64,
}

/// Which win condition holds, and where.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum WinWitness {
    /// `π` is occupied on one side only.
    Occupancy { palette: Palette },
    /// The predicate meets `π × π2` on one side only.
    Product { palette: Palette, palette2: Palette, predicate: String },
    /// `π × π2` lies wholly inside the predicate on one side only.
    Covered { palette: Palette, palette2: Palette, predicate: String },
}

/// Relation pairs of `name` in `s`, or none if `s` lacks the predicate.
fn predicate_pairs(s: &BinaryStructure, name: &str) -> Vec<(usize, usize)> {
    s.predicate(name).map(|p| p.pairs().collect()).unwrap_or_default()
}

pub(crate) fn predicate_names(g: &BinaryStructure, h: &BinaryStructure) -> Vec<String> {
    let mut names: Vec<String> = g
        .predicates()
        .iter()
        .chain(h.predicates())
        .map(|p| p.name().to_string())
        .collect();
    names.sort();
    names.dedup();
    names
}

/// Checks C1, C2 (and the covering condition for the modified variant)
/// directly from the definitions, over every palette and palette pair.
pub fn forall_wins_position(
    p: &Position,
    g: &BinaryStructure,
    h: &BinaryStructure,
    variant: Variant,
) -> Result<Option<WinWitness>> {
    let c = p.colours();
    if p.h.colours() != c || p.g.size() != g.size() || p.h.size() != h.size() {
        return Err(Error::Input("position does not match the structures".into()));
    }
    if c > 16 {
        return Err(Error::CapExceeded {
            what: "colour count",
            value: c,
            cap: 16,
        });
    }
    let palettes = 1u32 << c;
    let members = |pi: u32| (palette_members(Palette(pi), &p.g), palette_members(Palette(pi), &p.h));
    for pi in 0..palettes {
        let (mg, mh) = members(pi);
        if (mg == 0) != (mh == 0) {
            return Ok(Some(WinWitness::Occupancy { palette: Palette(pi) }));
        }
    }
    for name in predicate_names(g, h) {
        let gp = predicate_pairs(g, &name);
        let hp = predicate_pairs(h, &name);
        for pi in 0..palettes {
            let (g1, h1) = members(pi);
            for pi2 in 0..palettes {
                let (g2, h2) = members(pi2);
                let meets = |pairs: &[(usize, usize)], a: u64, b: u64| {
                    pairs.iter().any(|&(u, v)| a >> u & 1 == 1 && b >> v & 1 == 1)
                };
                if meets(&gp, g1, g2) != meets(&hp, h1, h2) {
                    return Ok(Some(WinWitness::Product {
                        palette: Palette(pi),
                        palette2: Palette(pi2),
                        predicate: name,
                    }));
                }
                if variant == Variant::Modified {
                    let covered = |pairs: &[(usize, usize)], a: u64, b: u64| {
                        bits(a).all(|u| bits(b).all(|v| pairs.contains(&(u, v))))
                    };
                    if covered(&gp, g1, g2) != covered(&hp, h1, h2) {
                        return Ok(Some(WinWitness::Covered {
                            palette: Palette(pi),
                            palette2: Palette(pi2),
                            predicate: name,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Compact game description shared by the solvers: field `t` of a position
/// holds colour `t` as `gmask | hmask << |G|`.
#[derive(Clone, Debug)]
pub(crate) struct Game {
    pub(crate) ng: usize,
    pub(crate) nh: usize,
    pub(crate) c: usize,
    pub(crate) variant: Variant,
    /// Per predicate: pairs on each side, node indices in field layout.
    preds: Vec<(Vec<(u8, u8)>, Vec<(u8, u8)>)>,
}

impl Game {
    pub(crate) fn new(
        g: &BinaryStructure,
        h: &BinaryStructure,
        c: usize,
        variant: Variant,
        bit_cap: usize,
    ) -> Result<Self> {
        let bits_needed = c * (g.size() + h.size());
        if bits_needed > bit_cap {
            return Err(Error::CapExceeded {
                what: "position bits",
                value: bits_needed,
                cap: bit_cap,
            });
        }
        if c > 16 {
            return Err(Error::CapExceeded {
                what: "colour count",
                value: c,
                cap: 16,
            });
        }
        if g.size() + h.size() > 30 {
            return Err(Error::CapExceeded {
                what: "combined node count",
                value: g.size() + h.size(),
                cap: 30,
            });
        }
        let ng = g.size();
        let preds = predicate_names(g, h)
            .iter()
            .map(|name| {
                let gp = predicate_pairs(g, name).into_iter().map(|(u, v)| (u as u8, v as u8)).collect();
                let hp = predicate_pairs(h, name)
                    .into_iter()
                    .map(|(u, v)| ((u + ng) as u8, (v + ng) as u8))
                    .collect();
                (gp, hp)
            })
            .collect();
        Ok(Self {
            ng,
            nh: h.size(),
            c,
            variant,
            preds,
        })
    }

    pub(crate) fn nodes(&self) -> usize {
        self.ng + self.nh
    }

    pub(crate) fn field(&self, gset: u64, hset: u64) -> u32 {
        (gset | hset << self.ng) as u32
    }

    pub(crate) fn fields_of(&self, p: &Position) -> Vec<u32> {
        (0..self.c).map(|t| self.field(p.g.set(t), p.h.set(t))).collect()
    }

    /// Fast win test on a field array (any colour order).
    pub(crate) fn wins(&self, fields: &[u32], scratch: &mut Scratch) -> bool {
        let n = self.nodes();
        // a colour used (or total) on one side only is already a C1 win
        let (gfull, hfull) = ((1u32 << self.ng) - 1, (1u32 << self.nh) - 1);
        for &f in fields {
            let (gs, hs) = (f & gfull, f >> self.ng);
            if (gs == 0) != (hs == 0) || (gs == gfull) != (hs == hfull) {
                return true;
            }
        }
        let sig = &mut scratch.sig;
        sig.clear();
        sig.resize(n, 0);
        for (t, &f) in fields.iter().enumerate() {
            let mut m = f;
            while m != 0 {
                let u = m.trailing_zeros() as usize;
                sig[u] |= 1 << t;
                m &= m - 1;
            }
        }
        // C1
        let (gs, hs) = (&mut scratch.gsig, &mut scratch.hsig);
        gs.clear();
        hs.clear();
        gs.extend_from_slice(&sig[..self.ng]);
        hs.extend_from_slice(&sig[self.ng..]);
        gs.sort_unstable();
        gs.dedup();
        hs.sort_unstable();
        hs.dedup();
        if gs != hs {
            return true;
        }
        // C2 and the covering condition
        for (gp, hp) in &self.preds {
            let (gc, hc) = (&mut scratch.gcodes, &mut scratch.hcodes);
            gc.clear();
            hc.clear();
            gc.extend(gp.iter().map(|&(u, v)| (sig[u as usize] as u32) << 16 | sig[v as usize] as u32));
            hc.extend(hp.iter().map(|&(u, v)| (sig[u as usize] as u32) << 16 | sig[v as usize] as u32));
            gc.sort_unstable();
            hc.sort_unstable();
            if self.variant == Variant::Modified {
                let full_g = covered_codes(gc, &sig[..self.ng], &mut scratch.gfull);
                let full_h = covered_codes(hc, &sig[self.ng..], &mut scratch.hfull);
                if full_g != full_h {
                    return true;
                }
            }
            gc.dedup();
            hc.dedup();
            if gc != hc {
                return true;
            }
        }
        false
    }
}

/// Palette-pair codes whose whole product lies in the relation; `codes` is
/// sorted with multiplicity.
fn covered_codes<'s>(codes: &[u32], sigs: &[u16], out: &'s mut Vec<u32>) -> &'s [u32] {
    out.clear();
    let count = |p: u16| sigs.iter().filter(|&&s| s == p).count();
    let mut k = 0;
    while k < codes.len() {
        let code = codes[k];
        let mut run = 1;
        while k + run < codes.len() && codes[k + run] == code {
            run += 1;
        }
        let (p1, p2) = ((code >> 16) as u16, code as u16);
        if run == count(p1) * count(p2) {
            out.push(code);
        }
        k += run;
    }
    out
}

#[derive(Default)]
pub(crate) struct Scratch {
    sig: Vec<u16>,
    gsig: Vec<u16>,
    hsig: Vec<u16>,
    gcodes: Vec<u32>,
    hcodes: Vec<u32>,
    gfull: Vec<u32>,
    hfull: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Digraph;
    use proptest::prelude::*;

    fn s(d: &Digraph) -> BinaryStructure {
        d.to_structure()
    }

    #[test]
    fn palette_member_examples() {
        let empty = Interpretation::empty(3, 2);
        assert_eq!(palette_members(Palette(0), &empty), 0b111);
        assert_eq!(palette_members(Palette(1), &empty), 0);
        let i = Interpretation::from_sets(3, vec![0b011, 0b010]).unwrap();
        assert_eq!(palette_members(Palette(0b01), &i), 0b001);
        assert_eq!(palette_members(Palette(0b11), &i), 0b010);
        assert!(Interpretation::from_sets(2, vec![0b100]).is_err());
    }

    #[test]
    fn win_examples() {
        let arc = Digraph::from_edges(2, [(0, 1)]).unwrap();
        let two = Digraph::empty(2).unwrap();
        let p = Position::initial(2, 2, 2);
        let w = forall_wins_position(&p, &s(&arc), &s(&two), Variant::Standard).unwrap();
        assert!(matches!(w, Some(WinWitness::Product { .. })));
        assert_eq!(forall_wins_position(&p, &s(&arc), &s(&arc), Variant::Standard).unwrap(), None);
        // colour 0 used in H only
        let q = Position {
            g: Interpretation::empty(2, 1),
            h: Interpretation::from_sets(2, vec![0b01]).unwrap(),
        };
        let w = forall_wins_position(&q, &s(&two), &s(&two), Variant::Standard).unwrap();
        assert!(matches!(w, Some(WinWitness::Occupancy { .. })));
    }

    #[test]
    fn covering_condition_uses_diagonal_pairs() {
        // a looped point against a loopless one: the edge predicate meets
        // the product only on the looped side, so C2 already fires
        let looped = Digraph::from_edges(1, [(0, 0)]).unwrap();
        let plain = Digraph::empty(1).unwrap();
        let p = Position::initial(1, 1, 0);
        assert!(forall_wins_position(&p, &s(&looped), &s(&plain), Variant::Modified).unwrap().is_some());
        // with two loops added the whole product is covered on one side only
        let k2 = Digraph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        let k2l = Digraph::from_edges(2, [(0, 1), (1, 0), (0, 0), (1, 1)]).unwrap();
        let p = Position::initial(2, 2, 0);
        let std = forall_wins_position(&p, &s(&k2), &s(&k2l), Variant::Standard).unwrap();
        assert!(std.is_none());
        let modified = forall_wins_position(&p, &s(&k2), &s(&k2l), Variant::Modified).unwrap();
        assert!(matches!(modified, Some(WinWitness::Covered { .. })));
    }

    #[test]
    fn replacement_erases_previous_use() {
        let p = Position::initial(2, 3, 2);
        let c = ForallChoice { colour: 1, side: Side::H, set: 0b101 };
        let q = p.after(&c, 0b11).unwrap();
        assert_eq!(q.g.set(1), 0b11);
        assert_eq!(q.h.set(1), 0b101);
        let c2 = ForallChoice { colour: 1, side: Side::G, set: 0b01 };
        let r = q.after(&c2, 0b010).unwrap();
        assert_eq!(r.g.set(1), 0b01);
        assert_eq!(r.h.set(1), 0b010);
        assert_eq!(r.g.set(0), 0);
    }

    fn digraph(n: usize) -> impl Strategy<Value = Digraph> {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |cells| {
            let edges: Vec<_> = (0..n * n).filter(|&k| cells[k]).map(|k| (k / n, k % n)).collect();
            Digraph::from_edges(n, edges).unwrap()
        })
    }

    proptest! {
        #[test]
        fn fast_and_definitional_checks_agree(
            g in (1usize..4).prop_flat_map(digraph),
            h in (1usize..4).prop_flat_map(digraph),
            raw in proptest::collection::vec(any::<u64>(), 2),
            modified in any::<bool>(),
        ) {
            let variant = if modified { Variant::Modified } else { Variant::Standard };
            let (gs, hs) = (g.to_structure(), h.to_structure());
            let p = Position {
                g: Interpretation::from_sets(g.size(), raw.iter().map(|r| r & crate::ra::full_mask(g.size())).collect()).unwrap(),
                h: Interpretation::from_sets(h.size(), raw.iter().map(|r| (r >> 8) & crate::ra::full_mask(h.size())).collect()).unwrap(),
            };
            let game = Game::new(&gs, &hs, 2, variant, DEFAULT_BIT_CAP).unwrap();
            let fast = game.wins(&game.fields_of(&p), &mut Scratch::default());
            let slow = forall_wins_position(&p, &gs, &hs, variant).unwrap().is_some();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn one_round_matches_reference(
            sets in proptest::collection::vec((0u64..8, 0u64..8), 3),
            t in 0usize..3,
            x in 0u64..8,
            y in 0u64..8,
            on_g in any::<bool>(),
        ) {
            let p = Position {
                g: Interpretation::from_sets(3, sets.iter().map(|s| s.0).collect()).unwrap(),
                h: Interpretation::from_sets(3, sets.iter().map(|s| s.1).collect()).unwrap(),
            };
            let side = if on_g { Side::G } else { Side::H };
            let q = p.after(&ForallChoice { colour: t, side, set: x }, y).unwrap();
            // reference: palettes containing t see only the new sets
            for u in 0..3 {
                let in_g = if on_g { x } else { y };
                let in_h = if on_g { y } else { x };
                prop_assert_eq!(q.g.palette_of(u).0 >> t & 1 == 1, in_g >> u & 1 == 1);
                prop_assert_eq!(q.h.palette_of(u).0 >> t & 1 == 1, in_h >> u & 1 == 1);
                prop_assert_eq!(q.g.palette_of(u).0 & !(1 << t), p.g.palette_of(u).0 & !(1 << t));
                prop_assert_eq!(q.h.palette_of(u).0 & !(1 << t), p.h.palette_of(u).0 & !(1 << t));
            }
        }
    }
}
