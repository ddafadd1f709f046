//! Atomic networks and the complete-representation game over rainbow algebras.
//!
//! [`exists_response`] implements ∃'s white/black/red labelling strategy with
//! a clique homomorphism per pair of nodes whose red clique has two or more
//! members. [`search_forall_win`] looks for ∀ wins by exhaustive minimax.

mod play;
mod search;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{input_err, Result};
use crate::ra::AtomStructure;
use crate::rainbow::{Rainbow, BLACK, WHITE, YELLOW};
use crate::structures::canon::permutations;
use crate::structures::{extend_to_homomorphism, is_homomorphism, PartialMap};

pub use play::{play_game, Adversary, GameOutcome, RoundRecord};
pub use search::{search_forall_win, search_forall_win_with, SearchLimits, SearchOutcome, WinTree};

/// Networks up to this size are memoized under their canonical relabeling.
pub const CANON_NODE_CAP: usize = 6;

/// A complete atom-labelled digraph on nodes `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Network {
    n: usize,
    labels: Vec<u8>,
}

impl Network {
    /// The two-node network `{x0, y0}` with `N(x0, y0) = atom`.
    pub fn initial(a: &AtomStructure, atom: usize) -> Result<Self> {
        if atom >= a.atom_count() {
            return input_err(format!("atom {atom} out of range"));
        }
        if atom == a.identity() {
            return input_err("the opening atom must not be the identity");
        }
        let id = a.identity() as u8;
        Ok(Self {
            n: 2,
            labels: vec![id, atom as u8, a.converse(atom) as u8, id],
        })
    }

    /// Builds a network from a full label matrix (row-major).
    pub fn from_matrix(a: &AtomStructure, rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        let mut labels = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return input_err("label matrix must be square");
            }
            for &l in row {
                if l >= a.atom_count() {
                    return input_err(format!("atom {l} out of range"));
                }
                labels.push(l as u8);
            }
        }
        let net = Self { n, labels };
        for x in 0..n {
            if net.label(x, x) != a.identity() {
                return input_err(format!("N({x},{x}) must be the identity"));
            }
            for y in 0..n {
                if net.label(y, x) != a.converse(net.label(x, y)) {
                    return input_err(format!("N({y},{x}) is not the converse of N({x},{y})"));
                }
            }
        }
        Ok(net)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> usize {
        self.labels[x * self.n + y] as usize
    }

    pub fn matrix(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|x| (0..self.n).map(|y| self.label(x, y)).collect()).collect()
    }

    /// Adds node `n` with `N(w, n) = to_new[w]`; converses fill the other side.
    fn extended(&self, a: &AtomStructure, to_new: &[usize]) -> Self {
        let n = self.n + 1;
        let mut labels = vec![0u8; n * n];
        for x in 0..self.n {
            labels[x * n..x * n + self.n].copy_from_slice(&self.labels[x * self.n..(x + 1) * self.n]);
        }
        for (w, &l) in to_new.iter().enumerate() {
            labels[w * n + self.n] = l as u8;
            labels[self.n * n + w] = a.converse(l) as u8;
        }
        labels[self.n * n + self.n] = a.identity() as u8;
        Self { n, labels }
    }

    /// First forbidden triangle `(x, y, z)`, if any.
    pub fn inconsistency(&self, a: &AtomStructure) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if a.is_forbidden(self.label(x, y), self.label(y, z), self.label(x, z)) {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    pub fn is_consistent(&self, a: &AtomStructure) -> bool {
        self.inconsistency(a).is_none()
    }

    /// Memo key: the least label matrix over all relabelings up to
    /// [`CANON_NODE_CAP`] nodes, the exact matrix beyond.
    pub fn canonical_key(&self) -> Vec<u8> {
        if self.n > CANON_NODE_CAP {
            let mut key = self.labels.clone();
            key.push(self.n as u8);
            return key;
        }
        thread_local! {
            static PERMS: Vec<Vec<Vec<usize>>> =
                (0..=CANON_NODE_CAP).map(permutations).collect();
        }
        PERMS.with(|perms| {
            let mut best: Option<Vec<u8>> = None;
            let mut scratch = Vec::with_capacity(self.n * self.n);
            for inv in &perms[self.n] {
                scratch.clear();
                let mut worse = false;
                let mut better = best.is_none();
                'fill: for &u in inv {
                    for &v in inv {
                        let l = self.labels[u * self.n + v];
                        if !better {
                            let b = best.as_ref().unwrap()[scratch.len()];
                            if l > b {
                                worse = true;
                                break 'fill;
                            }
                            if l < b {
                                better = true;
                            }
                        }
                        scratch.push(l);
                    }
                }
                if !worse && better {
                    best = Some(scratch.clone());
                }
            }
            let mut key = best.unwrap_or_default();
            key.push(self.n as u8);
            key
        })
    }
}

/// `(x, y, α, β)`: ∀ asks for a node `z` with `N(x, z) = α` and `N(z, y) = β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ForallMove {
    pub x: usize,
    pub y: usize,
    pub alpha: usize,
    pub beta: usize,
}

impl ForallMove {
    /// The same demand read from the other end: `(y, x, β˘, α˘)`.
    pub fn mirrored(self, a: &AtomStructure) -> Self {
        Self {
            x: self.y,
            y: self.x,
            alpha: a.converse(self.beta),
            beta: a.converse(self.alpha),
        }
    }

    fn representative(self, a: &AtomStructure) -> Self {
        self.min(self.mirrored(a))
    }
}

/// ∃'s bookkeeping: one homomorphism `G -> H` per pair `(x, y)` whose red
/// clique has at least two members.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StrategyState {
    pub clique_hom: BTreeMap<(usize, usize), Vec<usize>>,
}

/// Why ∃'s strategy could not answer a move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum StrategyFailure {
    /// The move is forbidden against `N(x, y)` or uses the identity.
    IllegalMove,
    /// A witness already exists.
    TrivialMove { witness: usize },
    /// No target pair is compatible with the two greens of a new clique.
    NoPartialHomomorphism { i: usize, i2: usize },
    /// The clique's partial map does not extend to a homomorphism.
    NoExtension { x: usize, y: usize, map: Vec<(usize, usize)> },
    /// Clique members do not carry well defined red indices.
    IllFormedClique { x: usize, y: usize },
    /// The labelled network has a forbidden triangle.
    Inconsistent { triangle: (usize, usize, usize) },
}

/// `R_N(x, y)`: nodes `z` with `N(x, z)` green and `N(z, y)` yellow.
pub fn red_clique(r: &Rainbow, net: &Network, x: usize, y: usize) -> Vec<usize> {
    (0..net.size())
        .filter(|&z| r.is_green(net.label(x, z)) && net.label(z, y) == YELLOW)
        .collect()
}

/// The index `ρ(z)` of each member of a red clique with two or more members:
/// the first subscript of the label towards another member. `None` if some
/// label is not red or two members disagree.
pub fn clique_indices(r: &Rainbow, net: &Network, clique: &[usize]) -> Option<Vec<usize>> {
    if clique.len() < 2 {
        return None;
    }
    let mut rho = Vec::with_capacity(clique.len());
    for (k, &z) in clique.iter().enumerate() {
        let mut index = None;
        for (k2, &z2) in clique.iter().enumerate() {
            if k == k2 {
                continue;
            }
            let (j, _) = r.red_indices(net.label(z, z2)).ok()?;
            if index.is_some_and(|i| i != j) {
                return None;
            }
            index = Some(j);
        }
        rho.push(index?);
    }
    Some(rho)
}

/// Witness for a move already present in the network.
fn witness(net: &Network, m: &ForallMove) -> Option<usize> {
    (0..net.size()).find(|&z| net.label(m.x, z) == m.alpha && net.label(z, m.y) == m.beta)
}

/// Every non-trivial legal ∀ move, in lexicographic `(x, y, α, β)` order.
pub fn legal_moves(a: &AtomStructure, net: &Network) -> Vec<ForallMove> {
    let mut out = Vec::new();
    let n = net.size();
    let id = a.identity();
    for x in 0..n {
        for y in 0..n {
            let lxy = net.label(x, y);
            for alpha in 0..a.atom_count() {
                if alpha == id {
                    continue;
                }
                for beta in 0..a.atom_count() {
                    if beta == id || a.is_forbidden(alpha, beta, lxy) {
                        continue;
                    }
                    let m = ForallMove { x, y, alpha, beta };
                    if witness(net, &m).is_none() {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// Legal moves up to the `(x, y, α, β) ~ (y, x, β˘, α˘)` symmetry.
pub fn distinct_legal_moves(a: &AtomStructure, net: &Network) -> Vec<ForallMove> {
    legal_moves(a, net)
        .into_iter()
        .filter(|m| m.representative(a) == *m)
        .collect()
}

/// A successful strategy reply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    pub network: Network,
    pub state: StrategyState,
    /// `N'(w, z)` for every old node `w`, `z` the new node.
    pub new_labels: Vec<usize>,
}

/// ∃'s answer to a ∀ move on the rainbow algebra `r`.
pub fn exists_response(
    r: &Rainbow,
    state: &StrategyState,
    net: &Network,
    m: ForallMove,
) -> Result<std::result::Result<Reply, StrategyFailure>> {
    let a = r.atoms();
    let n = net.size();
    if m.x >= n || m.y >= n || m.alpha >= a.atom_count() || m.beta >= a.atom_count() {
        return input_err(format!("move {m:?} out of range"));
    }
    if m.alpha == a.identity() || m.beta == a.identity() || a.is_forbidden(m.alpha, m.beta, net.label(m.x, m.y)) {
        return Ok(Err(StrategyFailure::IllegalMove));
    }
    if let Some(w) = witness(net, &m) {
        return Ok(Err(StrategyFailure::TrivialMove { witness: w }));
    }
    let mut state = state.clone();
    let mut to_new = vec![0usize; n];
    // N(w, z) for w in {x, y}
    to_new[m.x] = m.alpha;
    to_new[m.y] = a.converse(m.beta);
    for w in 0..n {
        if w == m.x || w == m.y {
            continue;
        }
        let (wx, wy) = (net.label(w, m.x), net.label(w, m.y));
        let green_x = r.is_green(wx) && r.is_green(m.alpha);
        let green_y = r.is_green(wy) && r.is_green(m.beta);
        let yellow_x = wx == YELLOW && m.alpha == YELLOW;
        let yellow_y = wy == YELLOW && m.beta == YELLOW;
        to_new[w] = if !green_x && !green_y {
            WHITE
        } else if (green_x && !yellow_y) || (green_y && !yellow_x) {
            BLACK
        } else {
            // w and z join R(x, y) (or R(y, x) in the mirrored case)
            let (u, v, gi, gi2) = if green_x {
                (m.x, m.y, wx, m.alpha)
            } else {
                (m.y, m.x, wy, m.beta)
            };
            let (i, i2) = (r.green_index(gi)?, r.green_index(gi2)?);
            let h = match state.clique_hom.get(&(u, v)) {
                Some(h) => h.clone(),
                None => match first_extension(r, i, i2)? {
                    Some(h) => {
                        state.clique_hom.insert((u, v), h.clone());
                        h
                    }
                    None => return Ok(Err(StrategyFailure::NoPartialHomomorphism { i, i2 })),
                },
            };
            r.red(h[i], h[i2])
        };
    }
    let network = net.extended(a, &to_new);
    if let Some(triangle) = network.inconsistency(a) {
        return Ok(Err(StrategyFailure::Inconsistent { triangle }));
    }
    if let Err(f) = complete_state(r, &network, &mut state)? {
        return Ok(Err(f));
    }
    Ok(Ok(Reply {
        network,
        state,
        new_labels: to_new,
    }))
}

/// Least `(j, j2)` whose pair map `{i -> j, i2 -> j2}` extends to a
/// homomorphism, and that extension.
fn first_extension(r: &Rainbow, i: usize, i2: usize) -> Result<Option<Vec<usize>>> {
    if i == i2 {
        return Ok(None);
    }
    for j in 0..r.h_size() {
        for j2 in 0..r.h_size() {
            let p = PartialMap::from_pairs([(i, j), (i2, j2)])?;
            if !crate::structures::is_partial_homomorphism(&p, r.g(), r.h())? {
                continue;
            }
            if let Some(h) = extend_to_homomorphism(&p, r.g(), r.h())? {
                return Ok(Some(h));
            }
        }
    }
    Ok(None)
}

/// Records a homomorphism for every clique of two or more members that
/// lacks one, extending the partial map read off the clique's red labels.
fn complete_state(
    r: &Rainbow,
    net: &Network,
    state: &mut StrategyState,
) -> Result<std::result::Result<(), StrategyFailure>> {
    let n = net.size();
    for x in 0..n {
        for y in 0..n {
            if x == y || state.clique_hom.contains_key(&(x, y)) {
                continue;
            }
            let clique = red_clique(r, net, x, y);
            if clique.len() < 2 {
                continue;
            }
            let Some(rho) = clique_indices(r, net, &clique) else {
                return Ok(Err(StrategyFailure::IllFormedClique { x, y }));
            };
            let mut pairs = Vec::with_capacity(clique.len());
            for (&z, &j) in clique.iter().zip(&rho) {
                pairs.push((r.green_index(net.label(x, z))?, j));
            }
            let Ok(p) = PartialMap::from_pairs(pairs.iter().copied()) else {
                return Ok(Err(StrategyFailure::IllFormedClique { x, y }));
            };
            let extension = if crate::structures::is_partial_homomorphism(&p, r.g(), r.h())? {
                extend_to_homomorphism(&p, r.g(), r.h())?
            } else {
                None
            };
            match extension {
                Some(h) => {
                    state.clique_hom.insert((x, y), h);
                }
                None => return Ok(Err(StrategyFailure::NoExtension { x, y, map: pairs })),
            }
        }
    }
    Ok(Ok(()))
}

/// The strategy state determined by a network alone: for each clique of
/// two or more members, the least homomorphism extending its partial map.
/// `None` if some clique admits none.
pub fn derive_state(r: &Rainbow, net: &Network) -> Result<Option<StrategyState>> {
    let mut state = StrategyState::default();
    Ok(complete_state(r, net, &mut state)?.ok().map(|_| state))
}

/// Outcome of [`verify_hypotheses`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub consistent: bool,
    /// Every clique of two or more members has a recorded homomorphism that
    /// determines its red labels, and no other pair has one.
    pub h1: bool,
    /// Every green/yellow demand has at most one witness.
    pub h2: bool,
    /// As `h2`, restricted to one green and one yellow label: the demands
    /// that build red cliques.
    pub h2_mixed: bool,
}

impl HypothesisReport {
    /// Consistency, H1 and the mixed form of H2.
    pub fn holds(&self) -> bool {
        self.consistent && self.h1 && self.h2_mixed
    }

    /// As [`holds`](Self::holds) with H2 read literally.
    pub fn holds_literally(&self) -> bool {
        self.holds() && self.h2
    }
}

pub fn verify_hypotheses(r: &Rainbow, net: &Network, state: &StrategyState) -> HypothesisReport {
    let a = r.atoms();
    let n = net.size();
    let consistent = net.is_consistent(a);
    let mut h1 = true;
    'pairs: for x in 0..n {
        for y in 0..n {
            let clique = red_clique(r, net, x, y);
            let recorded = state.clique_hom.get(&(x, y));
            if clique.len() < 2 {
                if recorded.is_some() {
                    h1 = false;
                    break 'pairs;
                }
                continue;
            }
            let Some(h) = recorded else {
                h1 = false;
                break 'pairs;
            };
            if !is_homomorphism(h, r.g(), r.h()) {
                h1 = false;
                break 'pairs;
            }
            for &w in &clique {
                for &w2 in &clique {
                    if w == w2 {
                        continue;
                    }
                    let i = r.green_index(net.label(x, w)).expect("clique member");
                    let i2 = r.green_index(net.label(x, w2)).expect("clique member");
                    if net.label(w, w2) != r.red(h[i], h[i2]) {
                        h1 = false;
                        break 'pairs;
                    }
                }
            }
        }
    }
    let (mut h2, mut h2_mixed) = (true, true);
    let gy = |l: usize| l == YELLOW || r.is_green(l);
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let mut seen = std::collections::HashSet::new();
            for w in 0..n {
                let (p, q) = (net.label(u, w), net.label(w, v));
                if gy(p) && gy(q) && !seen.insert((p, q)) {
                    h2 = false;
                    if (p == YELLOW) != (q == YELLOW) {
                        h2_mixed = false;
                    }
                }
            }
        }
    }
    HypothesisReport {
        consistent,
        h1,
        h2,
        h2_mixed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rainbow::build_rainbow;
    use crate::structures::{examples, Digraph};

    fn rainbow(g: &Digraph, h: &Digraph) -> Rainbow {
        build_rainbow(&g.to_structure(), &h.to_structure()).unwrap()
    }

    fn two_by_two() -> Rainbow {
        // G edgeless on 2 nodes, H a looped point: every pair map extends
        rainbow(&Digraph::empty(2).unwrap(), &Digraph::from_edges(1, [(0, 0)]).unwrap())
    }

    #[test]
    fn initial_network() {
        let r = two_by_two();
        let net = Network::initial(r.atoms(), WHITE).unwrap();
        assert_eq!(net.size(), 2);
        assert_eq!(net.label(0, 1), WHITE);
        assert!(net.is_consistent(r.atoms()));
        assert!(Network::initial(r.atoms(), 0).is_err());
        for x in 0..2 {
            for y in 0..2 {
                assert!(red_clique(&r, &net, x, y).is_empty());
            }
        }
        assert!(verify_hypotheses(&r, &net, &StrategyState::default()).holds());
    }

    #[test]
    fn legal_move_examples() {
        let r = two_by_two();
        let a = r.atoms();
        let net = Network::initial(a, WHITE).unwrap();
        let moves = legal_moves(a, &net);
        let m = ForallMove { x: 0, y: 1, alpha: r.green(0), beta: YELLOW };
        assert!(!a.is_forbidden(r.green(0), YELLOW, WHITE));
        assert!(moves.contains(&m));
        assert!(moves.iter().all(|m| m.alpha != 0 && m.beta != 0));
        // (0, 1, w, 1') would be witnessed by node 1 but uses the identity anyway;
        // (0, 0, w, w) is witnessed by node 1
        assert!(!moves.contains(&ForallMove { x: 0, y: 0, alpha: WHITE, beta: WHITE }));
        let distinct = distinct_legal_moves(a, &net);
        assert!(distinct.len() < moves.len());
        for m in &moves {
            assert!(distinct.contains(m) || distinct.contains(&m.mirrored(a)));
        }
    }

    #[test]
    fn case_c_creates_clique_hom() {
        let r = two_by_two();
        let a = r.atoms();
        // x=0, y=1, w=2 with N(x,w)=g0, N(w,y)=y
        let rows = vec![
            vec![0, WHITE, r.green(0)],
            vec![WHITE, 0, YELLOW],
            vec![r.green(0), YELLOW, 0],
        ];
        let net = Network::from_matrix(a, &rows).unwrap();
        assert_eq!(red_clique(&r, &net, 0, 1), vec![2]);
        let state = StrategyState::default();
        assert!(verify_hypotheses(&r, &net, &state).holds());
        let m = ForallMove { x: 0, y: 1, alpha: r.green(1), beta: YELLOW };
        let reply = exists_response(&r, &state, &net, m).unwrap().unwrap();
        let h = reply.state.clique_hom[&(0, 1)].clone();
        assert_eq!(reply.new_labels[2], r.red(h[0], h[1]));
        assert_eq!(red_clique(&r, &reply.network, 0, 1), vec![2, 3]);
        assert!(verify_hypotheses(&r, &reply.network, &reply.state).holds());
        assert_eq!(derive_state(&r, &reply.network).unwrap().unwrap(), reply.state);
    }

    #[test]
    fn case_a_white() {
        let r = two_by_two();
        let a = r.atoms();
        // N(w,x)=y, α=g0, N(w,y)=w, β=y
        let rows = vec![vec![0, WHITE, YELLOW], vec![WHITE, 0, WHITE], vec![YELLOW, WHITE, 0]];
        let net = Network::from_matrix(a, &rows).unwrap();
        let m = ForallMove { x: 0, y: 1, alpha: r.green(0), beta: YELLOW };
        let reply = exists_response(&r, &StrategyState::default(), &net, m).unwrap().unwrap();
        assert_eq!(reply.new_labels, vec![r.green(0), YELLOW, WHITE]);
    }

    #[test]
    fn case_b_black() {
        let r = two_by_two();
        let a = r.atoms();
        // N(w,x)=g1, α=g0 (green-green) while the y side is not yellow-yellow
        let rows = vec![
            vec![0, WHITE, r.green(1)],
            vec![WHITE, 0, WHITE],
            vec![r.green(1), WHITE, 0],
        ];
        let net = Network::from_matrix(a, &rows).unwrap();
        let m = ForallMove { x: 0, y: 1, alpha: r.green(0), beta: YELLOW };
        let reply = exists_response(&r, &StrategyState::default(), &net, m).unwrap().unwrap();
        assert_eq!(reply.new_labels[2], BLACK);
    }

    #[test]
    fn trivial_and_illegal_moves_are_reported() {
        let r = two_by_two();
        let a = r.atoms();
        let net = Network::initial(a, WHITE).unwrap();
        let trivial = ForallMove { x: 0, y: 0, alpha: WHITE, beta: WHITE };
        assert_eq!(
            exists_response(&r, &StrategyState::default(), &net, trivial).unwrap(),
            Err(StrategyFailure::TrivialMove { witness: 1 })
        );
        let illegal = ForallMove { x: 0, y: 1, alpha: r.green(0), beta: r.green(1) };
        assert_eq!(
            exists_response(&r, &StrategyState::default(), &net, illegal).unwrap(),
            Err(StrategyFailure::IllegalMove)
        );
    }

    #[test]
    fn strategy_failure_without_pair_coverage() {
        // single arc into a loopless point: no pair map exists
        let r = rainbow(&examples::single_arc(), &examples::loopless_point());
        let a = r.atoms();
        let rows = vec![
            vec![0, WHITE, r.green(0)],
            vec![WHITE, 0, YELLOW],
            vec![r.green(0), YELLOW, 0],
        ];
        let net = Network::from_matrix(a, &rows).unwrap();
        let m = ForallMove { x: 0, y: 1, alpha: r.green(1), beta: YELLOW };
        assert_eq!(
            exists_response(&r, &StrategyState::default(), &net, m).unwrap(),
            Err(StrategyFailure::NoPartialHomomorphism { i: 0, i2: 1 })
        );
    }

    #[test]
    fn h2_violation_detected() {
        let r = two_by_two();
        let a = r.atoms();
        // two witnesses for (0, 1, g0, y)
        let g0 = r.green(0);
        let red = r.red(0, 0);
        let rows = vec![
            vec![0, WHITE, g0, g0],
            vec![WHITE, 0, YELLOW, YELLOW],
            vec![g0, YELLOW, 0, red],
            vec![g0, YELLOW, red, 0],
        ];
        let net = Network::from_matrix(a, &rows).unwrap();
        let report = verify_hypotheses(&r, &net, &StrategyState::default());
        assert!(!report.h2);
        assert!(!report.h2_mixed);
        assert!(!report.holds());
    }

    #[test]
    fn green_green_demand_breaks_literal_h2() {
        let r = two_by_two();
        let a = r.atoms();
        let mut net = Network::initial(a, BLACK).unwrap();
        let mut state = StrategyState::default();
        for m in [
            ForallMove { x: 0, y: 0, alpha: WHITE, beta: WHITE },
            ForallMove { x: 0, y: 1, alpha: r.green(0), beta: r.green(0) },
            ForallMove { x: 0, y: 1, alpha: r.green(1), beta: r.green(1) },
        ] {
            let reply = exists_response(&r, &state, &net, m).unwrap().unwrap();
            net = reply.network;
            state = reply.state;
        }
        let report = verify_hypotheses(&r, &net, &state);
        // nodes 0 and 1 both witness (g0, g1) from node 3 to node 4
        assert!(!report.h2);
        assert!(report.holds());
    }

    #[test]
    fn canonical_key_is_relabeling_invariant() {
        let r = two_by_two();
        let a = r.atoms();
        let rows = vec![
            vec![0, WHITE, r.green(0)],
            vec![WHITE, 0, YELLOW],
            vec![r.green(0), YELLOW, 0],
        ];
        let net = Network::from_matrix(a, &rows).unwrap();
        let key = net.canonical_key();
        for p in permutations(3) {
            let m: Vec<Vec<usize>> = (0..3).map(|x| (0..3).map(|y| rows[p[x]][p[y]]).collect()).collect();
            assert_eq!(Network::from_matrix(a, &m).unwrap().canonical_key(), key);
        }
    }
}
