//! Greatest-fixpoint solver for the ω-round colouring game.
//!
//! Colours are interchangeable, so a position is stored as the sorted
//! multiset of its `c` fields and ranked in the combinatorial number system.
//! Recolouring with `t` replaces one field: the successor is
//! `erase_t(p) + {(X, Y)}`. One pass computes, for every `(c-1)`-multiset
//! `q`, whether each `X ⊆ G` has a safe answer `Y` and vice versa, then drops
//! every safe position with some erasure lacking that property. The pass in
//! which a position drops is the number of rounds ∀ needs from it.

use serde::{Deserialize, Serialize};

use super::{ForallChoice, Game, Position, Scratch, Side, Variant, Winner, DEFAULT_BIT_CAP};
use crate::error::{Error, Result};
use crate::structures::BinaryStructure;

const SAFE: u16 = u16::MAX;

/// Largest symmetric position table the solver will allocate.
pub const MAX_TABLE: usize = 1 << 26;

struct Ranker {
    universe: usize,
    binom: Vec<Vec<usize>>,
}

impl Ranker {
    fn new(universe: usize, k: usize) -> Self {
        let rows = universe + k + 1;
        let mut binom = vec![vec![0usize; k + 2]; rows];
        for row in binom.iter_mut() {
            row[0] = 1;
        }
        for n in 1..rows {
            for j in 1..k + 2 {
                binom[n][j] = binom[n - 1][j - 1].saturating_add(binom[n - 1][j]);
            }
        }
        Self { universe, binom }
    }

    /// Number of `k`-multisets.
    fn count(&self, k: usize) -> usize {
        self.binom[self.universe + k - 1][k]
    }

    #[inline]
    fn rank(&self, sorted: &[u32]) -> usize {
        sorted
            .iter()
            .enumerate()
            .map(|(i, &a)| self.binom[a as usize + i][i + 1])
            .sum()
    }

    /// Rank of `sorted ∪ {f}`.
    #[inline]
    fn rank_with(&self, sorted: &[u32], f: u32) -> usize {
        let mut r = 0;
        let mut i = 0;
        let mut placed = false;
        for &a in sorted {
            if !placed && f <= a {
                r += self.binom[f as usize + i][i + 1];
                i += 1;
                placed = true;
            }
            r += self.binom[a as usize + i][i + 1];
            i += 1;
        }
        if !placed {
            r += self.binom[f as usize + i][i + 1];
        }
        r
    }
}

/// Calls `f` on every non-decreasing `k`-tuple over `0..universe`.
#[cfg(test)]
fn for_each_multiset(universe: usize, k: usize, mut f: impl FnMut(&[u32])) {
    let mut a = vec![0u32; k];
    loop {
        f(&a);
        // advance the odometer keeping the tuple non-decreasing
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if (a[i] as usize) + 1 < universe {
                let v = a[i] + 1;
                for x in &mut a[i..] {
                    *x = v;
                }
                break;
            }
        }
    }
}

/// Calls `f` on every sorted `c`-tuple of fields whose single fields and
/// pairs are not ∀ wins on their own. Forgetting colours only merges
/// palettes, which never creates a win, so every other tuple is won.
fn for_each_candidate(game: &Game, universe: usize, scratch: &mut Scratch, mut f: impl FnMut(&[u32], &mut Scratch)) {
    let c = game.c;
    let single: Vec<u32> = (0..universe as u32).filter(|&x| !game.wins(&[x], scratch)).collect();
    let m = single.len();
    let mut pair_ok = vec![false; m * m];
    if c >= 2 {
        for i in 0..m {
            for j in i..m {
                let ok = !game.wins(&[single[i], single[j]], scratch);
                pair_ok[i * m + j] = ok;
                pair_ok[j * m + i] = ok;
            }
        }
    }
    let mut idx = Vec::with_capacity(c);
    let mut tuple = Vec::with_capacity(c);
    fn rec(
        c: usize,
        start: usize,
        single: &[u32],
        pair_ok: &[bool],
        idx: &mut Vec<usize>,
        tuple: &mut Vec<u32>,
        scratch: &mut Scratch,
        f: &mut impl FnMut(&[u32], &mut Scratch),
    ) {
        if idx.len() == c {
            f(tuple, scratch);
            return;
        }
        let m = single.len();
        for j in start..m {
            if idx.iter().all(|&i| pair_ok[i * m + j]) {
                idx.push(j);
                tuple.push(single[j]);
                rec(c, j, single, pair_ok, idx, tuple, scratch, f);
                idx.pop();
                tuple.pop();
            }
        }
    }
    rec(c, 0, &single, &pair_ok, &mut idx, &mut tuple, scratch, &mut f);
}

/// Result of [`solve`]: the winner plus the full safety table.
pub struct Solved {
    game: Game,
    ranker: Ranker,
    layer: Vec<u16>,
    /// The fixpoint, as sorted field tuples.
    safe: Vec<Vec<u32>>,
    pub winner: Winner,
    /// Rounds ∀ needs from the initial position.
    pub rounds_to_win: Option<usize>,
    /// Safe positions up to colour renaming.
    pub safe_set_size: u64,
    /// Passes until the safe set stopped shrinking.
    pub iterations: usize,
}

/// Summary record for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub winner: Winner,
    pub rounds_to_win: Option<usize>,
    pub safe_set_size: u64,
    pub iterations: usize,
}

pub fn solve(g: &BinaryStructure, h: &BinaryStructure, c: usize, variant: Variant) -> Result<Solved> {
    solve_with_cap(g, h, c, variant, DEFAULT_BIT_CAP)
}

pub fn solve_with_cap(
    g: &BinaryStructure,
    h: &BinaryStructure,
    c: usize,
    variant: Variant,
    bit_cap: usize,
) -> Result<Solved> {
    let game = Game::new(g, h, c, variant, bit_cap)?;
    let universe = 1usize << game.nodes();
    let ranker = Ranker::new(universe, c);
    let total = if c == 0 { 1 } else { ranker.count(c) };
    if total > MAX_TABLE {
        return Err(Error::CapExceeded {
            what: "position table size",
            value: total,
            cap: MAX_TABLE,
        });
    }
    let mut layer = vec![0u16; total];
    let mut safe: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut scratch = Scratch::default();
    for_each_candidate(&game, universe, &mut scratch, |p, scratch| {
        if !game.wins(p, scratch) {
            let r = ranker.rank(p);
            layer[r] = SAFE;
            safe.push((r, p.to_vec()));
        }
    });
    let mut iterations = 0;
    if c > 0 {
        let (gsub, hsub) = (1u32 << game.ng, 1u32 << game.nh);
        // per (c-1)-multiset: 0 unknown, 1 every choice answerable, 2 not
        let mut good = vec![0u8; ranker.count(c - 1)];
        let mut q = Vec::with_capacity(c);
        for pass in 1.. {
            // Jacobi step: `good` reads the table as it stood before this
            // pass, so removals are applied afterwards
            good.fill(0);
            let mut dropped = Vec::new();
            for (r, p) in &safe {
                for t in 0..c {
                    if t > 0 && p[t] == p[t - 1] {
                        continue;
                    }
                    q.clear();
                    q.extend_from_slice(&p[..t]);
                    q.extend_from_slice(&p[t + 1..]);
                    let qr = ranker.rank(&q);
                    if good[qr] == 0 {
                        let ok = |x: u32, y: u32| layer[ranker.rank_with(&q, x | y << game.ng)] == SAFE;
                        let all = (0..gsub).all(|x| (0..hsub).any(|y| ok(x, y)))
                            && (0..hsub).all(|y| (0..gsub).any(|x| ok(x, y)));
                        good[qr] = if all { 1 } else { 2 };
                    }
                    if good[qr] == 2 {
                        dropped.push(*r);
                        break;
                    }
                }
            }
            if dropped.is_empty() {
                iterations = pass - 1;
                break;
            }
            if pass as u16 == SAFE - 1 {
                return Err(Error::CapExceeded {
                    what: "fixpoint passes",
                    value: pass,
                    cap: (SAFE - 1) as usize,
                });
            }
            for &r in &dropped {
                layer[r] = pass as u16;
            }
            safe.retain(|(r, _)| layer[*r] == SAFE);
        }
    }
    let initial = layer[0];
    let safe_set_size = safe.len() as u64;
    Ok(Solved {
        game,
        ranker,
        layer,
        safe: safe.into_iter().map(|(_, p)| p).collect(),
        winner: if initial == SAFE { Winner::Exists } else { Winner::Forall },
        rounds_to_win: (initial != SAFE).then_some(initial as usize),
        safe_set_size,
        iterations,
    })
}

/// Anything that answers ∀'s colouring choices.
pub trait ColouringStrategy {
    fn respond(&self, p: &Position, choice: &ForallChoice) -> Result<u64>;
}

impl Solved {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            winner: self.winner,
            rounds_to_win: self.rounds_to_win,
            safe_set_size: self.safe_set_size,
            iterations: self.iterations,
        }
    }

    pub fn colours(&self) -> usize {
        self.game.c
    }

    pub fn variant(&self) -> Variant {
        self.game.variant
    }

    fn sorted_fields(&self, p: &Position) -> Result<Vec<u32>> {
        if p.colours() != self.game.c || p.g.size() != self.game.ng || p.h.size() != self.game.nh {
            return Err(Error::Input("position does not match the solved game".into()));
        }
        let mut f = self.game.fields_of(p);
        f.sort_unstable();
        Ok(f)
    }

    /// Rounds ∀ needs from `p`, or `None` if `p` is safe for ∃.
    pub fn forall_rounds(&self, p: &Position) -> Result<Option<usize>> {
        let l = self.layer[self.ranker.rank(&self.sorted_fields(p)?)];
        Ok((l != SAFE).then_some(l as usize))
    }

    pub fn is_safe(&self, p: &Position) -> Result<bool> {
        Ok(self.forall_rounds(p)?.is_none())
    }

    /// Bounded value read off the layers: ∃ survives `n` rounds from the
    /// initial position.
    pub fn exists_survives(&self, n: usize) -> bool {
        let l = self.layer[0];
        l == SAFE || l as usize > n
    }

    fn erase(&self, p: &Position, t: usize) -> Result<Vec<u32>> {
        if t >= self.game.c {
            return Err(Error::Input(format!("colour {t} out of range")));
        }
        let removed = self.game.field(p.g.set(t), p.h.set(t));
        let mut q = self.sorted_fields(p)?;
        let k = q.iter().position(|&f| f == removed).expect("field present");
        q.remove(k);
        Ok(q)
    }

    fn side_sizes(&self, side: Side) -> (usize, usize) {
        match side {
            Side::G => (self.game.ng, self.game.nh),
            Side::H => (self.game.nh, self.game.ng),
        }
    }

    fn field_for(&self, side: Side, set: u64, reply: u64) -> u32 {
        match side {
            Side::G => self.game.field(set, reply),
            Side::H => self.game.field(reply, set),
        }
    }

    /// Replies ordered by closeness in size to ∀'s set, then numerically.
    /// The ordering only speeds up the search; every reply is considered.
    fn replies(&self, choice: &ForallChoice) -> Vec<u64> {
        let (_, other) = self.side_sizes(choice.side);
        let want = choice.set.count_ones() as i64;
        let mut ys: Vec<u64> = (0..1u64 << other).collect();
        ys.sort_by_key(|y| ((y.count_ones() as i64 - want).abs(), *y));
        ys
    }

    /// An ∃ reply from a safe position that keeps the successor safe.
    pub fn strategy_respond(&self, p: &Position, choice: &ForallChoice) -> Result<u64> {
        if !self.is_safe(p)? {
            return Err(Error::Precondition("position is not safe for ∃".into()));
        }
        let (own, _) = self.side_sizes(choice.side);
        if choice.set >> own != 0 {
            return Err(Error::Input("coloured set exceeds the structure".into()));
        }
        let q = self.erase(p, choice.colour)?;
        for y in self.replies(choice) {
            let f = self.field_for(choice.side, choice.set, y);
            if self.layer[self.ranker.rank_with(&q, f)] == SAFE {
                return Ok(y);
            }
        }
        unreachable!("a safe position has a safe reply to every choice")
    }

    /// Every reply to `choice` that keeps `p` safe.
    pub fn safe_replies(&self, p: &Position, choice: &ForallChoice) -> Result<Vec<u64>> {
        let (own, other) = self.side_sizes(choice.side);
        if choice.set >> own != 0 {
            return Err(Error::Input("coloured set exceeds the structure".into()));
        }
        let q = self.erase(p, choice.colour)?;
        Ok((0..1u64 << other)
            .filter(|&y| self.layer[self.ranker.rank_with(&q, self.field_for(choice.side, choice.set, y))] == SAFE)
            .collect())
    }

    /// ∀'s next choice from a position he wins in `k ≥ 1` rounds: every
    /// reply lands where he wins in fewer. `None` if `p` is safe or already won.
    pub fn forall_attack(&self, p: &Position) -> Result<Option<ForallChoice>> {
        let Some(k) = self.forall_rounds(p)? else {
            return Ok(None);
        };
        if k == 0 {
            return Ok(None);
        }
        for colour in 0..self.game.c {
            let q = self.erase(p, colour)?;
            for side in [Side::G, Side::H] {
                let (own, other) = self.side_sizes(side);
                for set in 0..1u64 << own {
                    let forced = (0..1u64 << other).all(|y| {
                        let l = self.layer[self.ranker.rank_with(&q, self.field_for(side, set, y))];
                        l != SAFE && (l as usize) < k
                    });
                    if forced {
                        return Ok(Some(ForallChoice { colour, side, set }));
                    }
                }
            }
        }
        unreachable!("a position lost in k rounds has a forcing choice")
    }

    /// Safe positions with a choice whose size-mismatched reply is also
    /// safe, up to `limit` examples. Requires at least two colours to be
    /// meaningful.
    pub fn cardinality_violations(&self, limit: usize) -> Vec<(Vec<u32>, ForallChoice, u64)> {
        let mut out = Vec::new();
        let c = self.game.c;
        if c == 0 {
            return out;
        }
        for p in &self.safe {
            for t in 0..c {
                let mut q = p.clone();
                q.remove(t);
                for side in [Side::G, Side::H] {
                    let (own, other) = self.side_sizes(side);
                    for set in 0..1u64 << own {
                        for y in 0..1u64 << other {
                            if y.count_ones() == set.count_ones() {
                                continue;
                            }
                            let f = self.field_for(side, set, y);
                            if self.layer[self.ranker.rank_with(&q, f)] == SAFE {
                                out.push((p.clone(), ForallChoice { colour: t, side, set }, y));
                                if out.len() >= limit {
                                    return out;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

impl ColouringStrategy for Solved {
    fn respond(&self, p: &Position, choice: &ForallChoice) -> Result<u64> {
        self.strategy_respond(p, choice)
    }
}

/// ∃ copies ∀'s set through an isomorphism `G -> H`.
#[derive(Clone, Debug)]
pub struct MirrorStrategy {
    iso: Vec<usize>,
}

impl MirrorStrategy {
    pub fn new(g: &BinaryStructure, h: &BinaryStructure) -> Option<Self> {
        find_isomorphism(g, h).map(|iso| Self { iso })
    }

    pub fn map(&self) -> &[usize] {
        &self.iso
    }
}

impl ColouringStrategy for MirrorStrategy {
    fn respond(&self, _p: &Position, choice: &ForallChoice) -> Result<u64> {
        let mut out = 0u64;
        for (u, &v) in self.iso.iter().enumerate() {
            match choice.side {
                Side::G if choice.set >> u & 1 == 1 => out |= 1 << v,
                Side::H if choice.set >> v & 1 == 1 => out |= 1 << u,
                _ => {}
            }
        }
        Ok(out)
    }
}

/// A predicate-preserving bijection, by brute force over permutations.
fn find_isomorphism(g: &BinaryStructure, h: &BinaryStructure) -> Option<Vec<usize>> {
    if g.size() != h.size() || g.size() > 8 {
        return None;
    }
    crate::structures::canon::permutations(g.size())
        .into_iter()
        .find(|p| g.permuted(p) == *h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seurat::{forall_wins_position, Interpretation};
    use crate::structures::Digraph;

    fn s(d: &Digraph) -> BinaryStructure {
        d.to_structure()
    }

    #[test]
    fn ranking_is_a_bijection() {
        for (u, k) in [(4, 3), (8, 2), (5, 0), (3, 4)] {
            let r = Ranker::new(u, k);
            let total = if k == 0 { 1 } else { r.count(k) };
            let mut seen = vec![false; total];
            for_each_multiset(u, k, |a| {
                let x = r.rank(a);
                assert!(!seen[x]);
                seen[x] = true;
                if k > 0 {
                    let (head, last) = a.split_at(k - 1);
                    assert_eq!(r.rank_with(head, last[0]), x);
                    assert_eq!(r.rank_with(&a[1..], a[0]), x);
                }
            });
            assert!(seen.into_iter().all(|b| b));
        }
    }

    #[test]
    fn identical_structures_are_an_exists_win() {
        let g = Digraph::from_edges(3, [(0, 1), (1, 2), (2, 2)]).unwrap();
        for c in 0..=3 {
            let out = solve(&s(&g), &s(&g), c, Variant::Standard).unwrap();
            assert_eq!(out.winner, Winner::Exists, "c={c}");
        }
    }

    #[test]
    fn cardinality_attack() {
        let one = Digraph::empty(1).unwrap();
        let two = Digraph::empty(2).unwrap();
        let out = solve(&s(&one), &s(&two), 2, Variant::Standard).unwrap();
        assert_eq!(out.winner, Winner::Forall);
        assert_eq!(out.rounds_to_win, Some(1));
        assert!(out.exists_survives(0));
        assert!(!out.exists_survives(1));
        let none = solve(&s(&one), &s(&two), 0, Variant::Standard).unwrap();
        assert_eq!(none.winner, Winner::Exists);
        // three against two nodes needs a second colour class
        let three = Digraph::empty(3).unwrap();
        let out = solve(&s(&two), &s(&three), 2, Variant::Standard).unwrap();
        assert_eq!(out.winner, Winner::Forall);
        let one_colour = solve(&s(&two), &s(&three), 1, Variant::Standard).unwrap();
        assert_eq!(one_colour.winner, Winner::Exists);
    }

    #[test]
    fn arc_against_edgeless_is_lost_at_once() {
        let arc = Digraph::from_edges(2, [(0, 1)]).unwrap();
        let two = Digraph::empty(2).unwrap();
        for c in 0..=3 {
            let out = solve(&s(&arc), &s(&two), c, Variant::Standard).unwrap();
            assert_eq!(out.rounds_to_win, Some(0));
        }
    }

    #[test]
    fn strategy_replies_stay_safe() {
        let g = Digraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let h = g.permuted(&[2, 0, 1]);
        let out = solve(&s(&g), &s(&h), 2, Variant::Standard).unwrap();
        assert_eq!(out.winner, Winner::Exists);
        let mut p = Position::initial(3, 3, 2);
        let choices = [
            ForallChoice { colour: 0, side: Side::G, set: 0b011 },
            ForallChoice { colour: 1, side: Side::H, set: 0b100 },
            ForallChoice { colour: 0, side: Side::H, set: 0b110 },
            ForallChoice { colour: 0, side: Side::H, set: 0b110 },
        ];
        for ch in choices {
            let y = out.strategy_respond(&p, &ch).unwrap();
            assert_eq!(y.count_ones(), ch.set.count_ones());
            p = p.after(&ch, y).unwrap();
            assert!(out.is_safe(&p).unwrap());
            assert!(forall_wins_position(&p, &s(&g), &s(&h), Variant::Standard).unwrap().is_none());
        }
    }

    #[test]
    fn unsafe_position_is_rejected() {
        let one = Digraph::empty(1).unwrap();
        let two = Digraph::empty(2).unwrap();
        let out = solve(&s(&one), &s(&two), 2, Variant::Standard).unwrap();
        let p = Position::initial(1, 2, 2);
        let ch = ForallChoice { colour: 0, side: Side::G, set: 1 };
        assert!(matches!(out.strategy_respond(&p, &ch), Err(Error::Precondition(_))));
        let attack = out.forall_attack(&p).unwrap().unwrap();
        for reply in 0..2 {
            let next = p.after(&attack, reply).unwrap();
            assert_eq!(out.forall_rounds(&next).unwrap(), Some(0));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = Digraph::empty(4).unwrap();
        assert!(matches!(
            solve(&s(&g), &s(&g), 4, Variant::Standard),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn mirror_strategy_maps_sets() {
        let g = Digraph::from_edges(3, [(0, 1)]).unwrap();
        let h = Digraph::from_edges(3, [(2, 0)]).unwrap();
        let m = MirrorStrategy::new(&s(&g), &s(&h)).unwrap();
        let p = Position {
            g: Interpretation::empty(3, 1),
            h: Interpretation::empty(3, 1),
        };
        let y = m.respond(&p, &ForallChoice { colour: 0, side: Side::G, set: 0b011 }).unwrap();
        assert_eq!(y, 0b101);
        let x = m.respond(&p, &ForallChoice { colour: 0, side: Side::H, set: 0b101 }).unwrap();
        assert_eq!(x, 0b011);
    }
}
