//! Exhaustive ∀-win search in the representation game.
//!
//! Depth counts ∀ moves after the opening. ∀ wins at depth `d` from `N` if
//! some non-trivial move leaves ∃ without a consistent extension, or every
//! consistent extension is itself a ∀ win at depth `d - 1`.

use std::collections::HashMap;

use serde::Serialize;

use super::{derive_state, distinct_legal_moves, exists_response, ForallMove, Network};
use crate::error::Result;
use crate::ra::AtomStructure;
use crate::rainbow::Rainbow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_depth: usize,
    /// Budget on expanded positions; exhausting it makes the result inconclusive.
    pub max_positions: u64,
}

/// ∀'s strategy: a move, then one subtree per consistent ∃ reply.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WinTree {
    pub forall_move: ForallMove,
    /// `(N'(w, z) for each old w, continuation)` per ∃ reply.
    pub replies: Vec<(Vec<usize>, WinTree)>,
}

impl WinTree {
    pub fn size(&self) -> usize {
        1 + self.replies.iter().map(|(_, t)| t.size()).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SearchOutcome {
    /// ∀ wins after opening with `opening`, within `depth` moves.
    Win { depth: usize, opening: usize, tree: WinTree, positions: u64 },
    /// No ∀ win within `depth` moves.
    NoWin { depth: usize, positions: u64 },
    Inconclusive { positions: u64 },
}

#[derive(Default, Clone, Copy)]
struct Known {
    /// ∀ cannot win within this many moves.
    safe_upto: usize,
    /// ∀ wins within this many moves.
    win_at: Option<usize>,
}

struct Searcher<'a> {
    a: &'a AtomStructure,
    hint: Option<&'a Rainbow>,
    budget: u64,
    positions: u64,
    memo: HashMap<Vec<u8>, Known>,
    out_of_budget: bool,
}

/// Every consistent extension of `net` answering `m`, as `N'(w, z)` vectors.
pub(crate) fn all_replies(a: &AtomStructure, net: &Network, m: ForallMove) -> Vec<Vec<usize>> {
    let n = net.size();
    let mut to_new = vec![usize::MAX; n];
    to_new[m.x] = m.alpha;
    to_new[m.y] = a.converse(m.beta);
    if m.x == m.y && m.alpha != a.converse(m.beta) {
        return Vec::new();
    }
    let fixed: Vec<usize> = if m.x == m.y { vec![m.x] } else { vec![m.x, m.y] };
    if !triangles_ok(a, net, &to_new, &fixed, &fixed) {
        return Vec::new();
    }
    let free: Vec<usize> = (0..n).filter(|w| !fixed.contains(w)).collect();
    let mut out = Vec::new();
    let mut done = fixed.clone();
    extend(a, net, &free, 0, &mut to_new, &mut done, &mut out);
    out
}

/// Triangles `(w, w2, z)` for `w` in `new` and `w2` in `placed`.
fn triangles_ok(a: &AtomStructure, net: &Network, to_new: &[usize], new: &[usize], placed: &[usize]) -> bool {
    new.iter().all(|&w| {
        placed
            .iter()
            .all(|&w2| !a.is_forbidden(net.label(w, w2), to_new[w2], to_new[w]))
    })
}

fn extend(
    a: &AtomStructure,
    net: &Network,
    free: &[usize],
    k: usize,
    to_new: &mut [usize],
    done: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if k == free.len() {
        out.push(to_new.to_vec());
        return;
    }
    let w = free[k];
    for atom in 0..a.atom_count() {
        if atom == a.identity() {
            continue;
        }
        to_new[w] = atom;
        if triangles_ok(a, net, to_new, &[w], done) {
            done.push(w);
            extend(a, net, free, k + 1, to_new, done, out);
            done.pop();
        }
    }
    to_new[w] = usize::MAX;
}

impl Searcher<'_> {
    /// Consistent replies, with ∃'s strategy reply (if any) first.
    fn replies(&self, net: &Network, m: ForallMove) -> Result<Vec<Vec<usize>>> {
        let mut all = all_replies(self.a, net, m);
        if let Some(r) = self.hint {
            if let Some(state) = derive_state(r, net)? {
                if let Ok(reply) = exists_response(r, &state, net, m)? {
                    if let Some(pos) = all.iter().position(|v| *v == reply.new_labels) {
                        all.swap(0, pos);
                    }
                }
            }
        }
        Ok(all)
    }

    fn wins(&mut self, net: &Network, depth: usize) -> Result<bool> {
        if depth == 0 {
            return Ok(false);
        }
        let key = net.canonical_key();
        let known = self.memo.get(&key).copied().unwrap_or_default();
        if known.safe_upto >= depth {
            return Ok(false);
        }
        if known.win_at.is_some_and(|d| d <= depth) {
            return Ok(true);
        }
        if self.positions >= self.budget {
            self.out_of_budget = true;
            return Ok(false);
        }
        self.positions += 1;
        let mut won = false;
        for m in distinct_legal_moves(self.a, net) {
            if self.move_wins(net, m, depth)? {
                won = true;
                break;
            }
            if self.out_of_budget {
                return Ok(false);
            }
        }
        let entry = self.memo.entry(key).or_default();
        if won {
            entry.win_at = Some(entry.win_at.map_or(depth, |d| d.min(depth)));
        } else {
            entry.safe_upto = entry.safe_upto.max(depth);
        }
        Ok(won)
    }

    fn move_wins(&mut self, net: &Network, m: ForallMove, depth: usize) -> Result<bool> {
        for labels in self.replies(net, m)? {
            let next = net.extended(self.a, &labels);
            if !self.wins(&next, depth - 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn tree(&mut self, net: &Network, depth: usize) -> Result<Option<WinTree>> {
        for m in distinct_legal_moves(self.a, net) {
            if self.move_wins(net, m, depth)? {
                let mut replies = Vec::new();
                for labels in self.replies(net, m)? {
                    let next = net.extended(self.a, &labels);
                    let sub = (1..depth).find_map(|d| self.tree(&next, d).transpose());
                    match sub {
                        Some(t) => replies.push((labels, t?)),
                        None => return Ok(None),
                    }
                }
                return Ok(Some(WinTree { forall_move: m, replies }));
            }
        }
        Ok(None)
    }
}

/// Iterative deepening search for a ∀ win over any atom structure.
pub fn search_forall_win(a: &AtomStructure, limits: SearchLimits) -> Result<SearchOutcome> {
    search(a, None, limits)
}

/// As [`search_forall_win`], trying ∃'s rainbow strategy reply first.
pub fn search_forall_win_with(r: &Rainbow, limits: SearchLimits) -> Result<SearchOutcome> {
    search(r.atoms(), Some(r), limits)
}

fn search(a: &AtomStructure, hint: Option<&Rainbow>, limits: SearchLimits) -> Result<SearchOutcome> {
    let mut s = Searcher {
        a,
        hint,
        budget: limits.max_positions,
        positions: 0,
        memo: HashMap::new(),
        out_of_budget: false,
    };
    for depth in 1..=limits.max_depth {
        for opening in 0..a.atom_count() {
            if opening == a.identity() {
                continue;
            }
            let net = Network::initial(a, opening)?;
            if s.wins(&net, depth)? {
                let tree = s.tree(&net, depth)?.expect("a win has a strategy tree");
                return Ok(SearchOutcome::Win {
                    depth,
                    opening,
                    tree,
                    positions: s.positions,
                });
            }
            if s.out_of_budget {
                return Ok(SearchOutcome::Inconclusive { positions: s.positions });
            }
        }
    }
    Ok(SearchOutcome::NoWin {
        depth: limits.max_depth,
        positions: s.positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rainbow::build_rainbow;
    use crate::structures::examples;

    fn limits(max_depth: usize) -> SearchLimits {
        SearchLimits {
            max_depth,
            max_positions: u64::MAX,
        }
    }

    #[test]
    fn depth_zero_finds_nothing() {
        let p = examples::loopless_point();
        let r = build_rainbow(&p.to_structure(), &p.to_structure()).unwrap();
        assert!(matches!(
            search_forall_win(r.atoms(), limits(0)).unwrap(),
            SearchOutcome::NoWin { depth: 0, .. }
        ));
    }

    #[test]
    fn arc_into_loopless_point_is_a_forall_win() {
        let r = build_rainbow(
            &examples::single_arc().to_structure(),
            &examples::loopless_point().to_structure(),
        )
        .unwrap();
        match search_forall_win_with(&r, limits(6)).unwrap() {
            SearchOutcome::Win { depth, tree, .. } => {
                assert!(depth <= 6);
                assert!(tree.size() >= 1);
            }
            other => panic!("expected a win, got {other:?}"),
        }
    }

    #[test]
    fn replies_cover_strategy_reply() {
        let p = examples::loopless_point();
        let r = build_rainbow(&p.to_structure(), &p.to_structure()).unwrap();
        let a = r.atoms();
        let net = Network::initial(a, crate::rainbow::WHITE).unwrap();
        for m in super::super::legal_moves(a, &net) {
            let replies = all_replies(a, &net, m);
            let reply = exists_response(&r, &Default::default(), &net, m).unwrap().unwrap();
            assert!(replies.contains(&reply.new_labels));
            for labels in replies {
                assert!(net.extended(a, &labels).is_consistent(a));
            }
        }
    }

    #[test]
    fn budget_gives_inconclusive() {
        let p = examples::loopless_point();
        let r = build_rainbow(&p.to_structure(), &p.to_structure()).unwrap();
        let out = search_forall_win(
            r.atoms(),
            SearchLimits {
                max_depth: 3,
                max_positions: 3,
            },
        )
        .unwrap();
        assert!(matches!(out, SearchOutcome::Inconclusive { .. }));
    }
}
