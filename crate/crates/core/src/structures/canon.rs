//! Brute-force canonical forms, isomorphism and enumeration of small digraphs.

use std::collections::BTreeSet;

use super::{BinaryStructure, Digraph};
use crate::error::{Error, Result};

/// Default node cap for [`enumerate_digraphs`].
pub const DEFAULT_ENUMERATION_CAP: usize = 5;

/// Largest digraph whose canonical code fits a `u64`.
const MAX_CANON_NODES: usize = 8;

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("successor exists");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

/// Adjacency bit string read row-major, first bit most significant.
fn code_under(g: &Digraph, inverse: &[usize]) -> u64 {
    // inverse[p] = original node placed at position p
    let n = g.size();
    let mut code = 0u64;
    for &u in inverse.iter().take(n) {
        let row = g.row(u);
        for &v in inverse.iter().take(n) {
            code = code << 1 | (row >> v & 1);
        }
    }
    code
}

/// The lexicographically least adjacency bit string over all relabelings,
/// packed into a `u64` (most significant bit first). Requires `n <= 8`.
pub fn canonical_code(g: &Digraph) -> u64 {
    assert!(g.size() <= MAX_CANON_NODES, "canonical codes support at most 8 nodes");
    permutations(g.size())
        .iter()
        .map(|inv| code_under(g, inv))
        .min()
        .unwrap_or(0)
}

fn from_code(n: usize, code: u64) -> Digraph {
    let mut rows = vec![0u64; n];
    for u in 0..n {
        for v in 0..n {
            let bit = n * n - 1 - (u * n + v);
            if code >> bit & 1 == 1 {
                rows[u] |= 1 << v;
            }
        }
    }
    Digraph::from_rows(n, rows)
}

/// The canonical representative of `g`'s isomorphism class.
pub fn canonical_form(g: &Digraph) -> Digraph {
    from_code(g.size(), canonical_code(g))
}

/// One canonical digraph per isomorphism class on exactly `n` nodes, sorted by
/// canonical code. Without `loops`, only loopless digraphs are produced.
pub fn enumerate_digraphs(n: usize, loops: bool, cap: usize) -> Result<Vec<Digraph>> {
    if n > cap || n > MAX_CANON_NODES {
        return Err(Error::CapExceeded {
            what: "enumeration node count",
            value: n,
            cap: cap.min(MAX_CANON_NODES),
        });
    }
    if n == 0 {
        return Ok(vec![Digraph::empty(0)?]);
    }
    // Every n-node digraph is an (n-1)-node class representative plus one node.
    let mut classes: BTreeSet<u64> = BTreeSet::new();
    let perms = permutations(n);
    let smaller = if n == 1 {
        vec![Digraph::empty(0)?]
    } else {
        enumerate_digraphs(n - 1, loops, cap)?
    };
    let new = n - 1;
    for base in &smaller {
        let k = base.size();
        let patterns = 1u64 << (2 * k + loops as usize);
        for pattern in 0..patterns {
            let mut rows: Vec<u64> = (0..k).map(|u| base.row(u)).collect();
            rows.push(0);
            for u in 0..k {
                if pattern >> u & 1 == 1 {
                    rows[u] |= 1 << new;
                }
                if pattern >> (k + u) & 1 == 1 {
                    rows[new] |= 1 << u;
                }
            }
            if loops && pattern >> (2 * k) & 1 == 1 {
                rows[new] |= 1 << new;
            }
            let g = Digraph::from_rows(n, rows);
            let code = perms.iter().map(|inv| code_under(&g, inv)).min().unwrap_or(0);
            classes.insert(code);
        }
    }
    Ok(classes.into_iter().map(|c| from_code(n, c)).collect())
}

/// Per-node invariant used to prune the isomorphism search.
fn node_signature(s: &BinaryStructure, u: usize) -> Vec<(u32, u32, bool)> {
    s.predicates()
        .iter()
        .map(|p| {
            let out = p.row(u).count_ones();
            let inn = (0..s.size()).filter(|&v| p.holds(v, u)).count() as u32;
            (out, inn, p.holds(u, u))
        })
        .collect()
}

/// Whether some bijection matches every predicate exactly. Structures of
/// different sizes or signatures are simply non-isomorphic.
pub fn are_isomorphic(g: &BinaryStructure, h: &BinaryStructure) -> bool {
    if g.size() != h.size() || g.predicates().len() != h.predicates().len() {
        return false;
    }
    let mut pairs = Vec::new();
    for pg in g.predicates() {
        match h.predicate(pg.name()) {
            Some(ph) if ph.len() == pg.len() => pairs.push((pg, ph)),
            _ => return false,
        }
    }
    let hs: Vec<_> = (0..h.size()).map(|v| node_signature_ordered(h, v, g)).collect();
    let gs: Vec<_> = (0..g.size()).map(|u| node_signature(g, u)).collect();
    let mut sorted_g = gs.clone();
    let mut sorted_h = hs.clone();
    sorted_g.sort();
    sorted_h.sort();
    if sorted_g != sorted_h {
        return false;
    }
    let n = g.size();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn search(
        u: usize,
        n: usize,
        map: &mut [usize],
        used: &mut [bool],
        gs: &[Vec<(u32, u32, bool)>],
        hs: &[Vec<(u32, u32, bool)>],
        pairs: &[(&super::Relation, &super::Relation)],
    ) -> bool {
        if u == n {
            return true;
        }
        for v in 0..n {
            if used[v] || gs[u] != hs[v] {
                continue;
            }
            let ok = (0..u).all(|w| {
                pairs.iter().all(|(pg, ph)| {
                    pg.holds(u, w) == ph.holds(v, map[w]) && pg.holds(w, u) == ph.holds(map[w], v)
                })
            }) && pairs.iter().all(|(pg, ph)| pg.holds(u, u) == ph.holds(v, v));
            if ok {
                map[u] = v;
                used[v] = true;
                if search(u + 1, n, map, used, gs, hs, pairs) {
                    return true;
                }
                used[v] = false;
            }
        }
        false
    }
    search(0, n, &mut map, &mut used, &gs, &hs, &pairs)
}

/// Signature of an `h` node listed in `g`'s predicate order.
fn node_signature_ordered(h: &BinaryStructure, v: usize, g: &BinaryStructure) -> Vec<(u32, u32, bool)> {
    g.predicates()
        .iter()
        .map(|pg| {
            let p = h.predicate(pg.name()).expect("matched signature");
            let out = p.row(v).count_ones();
            let inn = (0..h.size()).filter(|&w| p.holds(w, v)).count() as u32;
            (out, inn, p.holds(v, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent count: all labeled digraphs modulo relabeling, via a
    /// straightforward orbit-minimum over every adjacency matrix.
    fn brute_force_classes(n: usize, loops: bool) -> usize {
        let perms = permutations(n);
        let mut seen = BTreeSet::new();
        let cells: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| loops || u != v)
            .collect();
        for mask in 0u64..(1 << cells.len()) {
            let g = Digraph::from_edges(
                n,
                cells.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &c)| c),
            )
            .unwrap();
            let min = perms.iter().map(|p| g.permuted(p).to_text()).min().unwrap();
            seen.insert(min);
        }
        seen.len()
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn class_counts_match_brute_force() {
        assert_eq!(enumerate_digraphs(1, false, 5).unwrap().len(), 1);
        assert_eq!(enumerate_digraphs(2, false, 5).unwrap().len(), 3);
        assert_eq!(enumerate_digraphs(3, false, 5).unwrap().len(), 16);
        for (n, loops) in [(1, true), (2, false), (2, true), (3, false), (3, true)] {
            assert_eq!(
                enumerate_digraphs(n, loops, 5).unwrap().len(),
                brute_force_classes(n, loops),
                "n={n} loops={loops}"
            );
        }
        assert_eq!(enumerate_digraphs(4, false, 5).unwrap().len(), 218);
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(enumerate_digraphs(6, false, 5), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn isomorphism_examples() {
        let arc = Digraph::from_edges(2, [(0, 1)]).unwrap().to_structure();
        let rev = Digraph::from_edges(2, [(1, 0)]).unwrap().to_structure();
        let both = Digraph::from_edges(2, [(0, 1), (1, 0)]).unwrap().to_structure();
        assert!(are_isomorphic(&arc, &arc));
        assert!(are_isomorphic(&arc, &rev));
        assert!(!are_isomorphic(&arc, &both));
        assert!(!are_isomorphic(&arc, &Digraph::empty(3).unwrap().to_structure()));
    }

    #[test]
    fn canonical_form_is_invariant() {
        let g = Digraph::from_edges(4, [(0, 1), (1, 2), (2, 2), (3, 0)]).unwrap();
        let canon = canonical_form(&g);
        for p in permutations(4) {
            assert_eq!(canonical_form(&g.permuted(&p)), canon);
        }
        assert!(are_isomorphic(&canon.to_structure(), &g.to_structure()));
    }
}
