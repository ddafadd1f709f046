//! Playing the pebble game on `B_{G,F}` and `B_{H,F}` by copying non-green
//! parts and answering green parts with a colouring-game strategy for `G`
//! and `H` that has three spare colours.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{generate, AlgebraSide, PebblePosition};
use crate::error::{input_err, Error, Result};
use crate::ra::Term;
use crate::rainbow::Rainbow;
use crate::seurat::{ForallChoice, Position, Side, Solved};

/// Green support of `t` evaluated in `r`, as nodes of `r`'s first structure.
pub fn gamma(r: &Rainbow, t: &Term, assignment: &[Option<u64>]) -> Result<u64> {
    let v = t.eval_bits(r.atoms(), &|i| assignment.get(i).copied().flatten())?;
    Ok(r.green_support(v))
}

/// [`gamma`] on the second algebra.
pub fn eta(r: &Rainbow, t: &Term, assignment: &[Option<u64>]) -> Result<u64> {
    gamma(r, t, assignment)
}

/// Moves the non-green atoms of `bits` from `from` to `to`; both must share
/// the structure indexing the reds.
pub fn translate_non_green(from: &Rainbow, to: &Rainbow, bits: u64) -> u64 {
    let reds = bits >> (4 + from.g_size());
    (bits & 0xf) | reds << (4 + to.g_size())
}

/// The two algebras plus the solved parallel colouring game.
pub struct Transfer<'a> {
    a: &'a Rainbow,
    b: &'a Rainbow,
    solved: &'a Solved,
    pebbles: usize,
}

impl<'a> Transfer<'a> {
    /// `solved` must be the colouring game on `(G, H)` with `pebbles + 3` colours.
    pub fn new(a: &'a Rainbow, b: &'a Rainbow, solved: &'a Solved, pebbles: usize) -> Result<Self> {
        if a.h() != b.h() {
            return input_err("the algebras must share the structure indexing reds");
        }
        if solved.colours() != pebbles + 3 {
            return input_err(format!(
                "parallel game has {} colours, expected {}",
                solved.colours(),
                pebbles + 3
            ));
        }
        Ok(Self { a, b, solved, pebbles })
    }

    pub fn initial(&self) -> TransferState {
        TransferState {
            pebbles: PebblePosition::new(self.pebbles),
            parallel: Position::initial(self.a.g_size(), self.b.g_size(), self.pebbles + 3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TransferState {
    pub pebbles: PebblePosition,
    pub parallel: Position,
}

impl TransferState {
    fn key(&self) -> Vec<(Option<(u64, u64)>, u64, u64)> {
        let mut k: Vec<_> = (0..self.pebbles.pebbles())
            .map(|t| {
                let pair = self.pebbles.alpha(t).zip(self.pebbles.beta(t));
                (pair, self.parallel.g.set(t), self.parallel.h.set(t))
            })
            .collect();
        k.sort_unstable();
        k
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TransferFailure {
    /// The parallel position left the colouring strategy's safe set.
    UnsafeParallel,
}

/// ∃'s answer to ∀ placing pebble `t` on `element` of `side`.
pub fn transfer_respond(
    tr: &Transfer,
    state: &TransferState,
    t: usize,
    side: AlgebraSide,
    element: u64,
) -> Result<std::result::Result<(u64, TransferState), TransferFailure>> {
    if t >= tr.pebbles {
        return input_err(format!("pebble {t} out of range"));
    }
    let (from, to, seurat_side) = match side {
        AlgebraSide::A => (tr.a, tr.b, Side::G),
        AlgebraSide::B => (tr.b, tr.a, Side::H),
    };
    if element & !from.atoms().full_bits() != 0 {
        return input_err("element outside its algebra");
    }
    let choice = ForallChoice {
        colour: t,
        side: seurat_side,
        set: from.green_support(element),
    };
    let answer = match tr.solved.strategy_respond(&state.parallel, &choice) {
        Ok(y) => y,
        Err(Error::Precondition(_)) => return Ok(Err(TransferFailure::UnsafeParallel)),
        Err(e) => return Err(e),
    };
    let reply = translate_non_green(from, to, element & from.non_green_mask()) | to.greens_over(answer);
    let mut next = state.clone();
    next.parallel = state.parallel.after(&choice, answer)?;
    match side {
        AlgebraSide::A => next.pebbles.place(t, element, reply),
        AlgebraSide::B => next.pebbles.place(t, reply, element),
    }
    Ok(Ok((reply, next)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// Non-green atoms below the two values differ.
    NonGreen,
    /// `|γ(t)| ≠ |η(t)|`.
    Cardinality,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermViolation {
    pub term: String,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TermsReport {
    /// Distinct `(t^α, t^β)` pairs examined.
    pub pairs_checked: usize,
    pub violations: Vec<TermViolation>,
}

impl TermsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Distinct value pairs of every term of depth at most `depth` over the
/// placed pebbles, each with one representative term.
fn term_values(a: &Rainbow, b: &Rainbow, p: &PebblePosition, depth: usize) -> Vec<(u64, u64, Term)> {
    let (sa, sb) = (a.atoms(), b.atoms());
    let mut seen = HashSet::new();
    let mut out: Vec<(u64, u64, Term)> = Vec::new();
    let mut push = |x: u64, y: u64, t: Term, out: &mut Vec<(u64, u64, Term)>| {
        if seen.insert((x, y)) {
            out.push((x, y, t));
        }
    };
    push(0, 0, Term::Zero, &mut out);
    push(sa.full_bits(), sb.full_bits(), Term::One, &mut out);
    push(1 << sa.identity(), 1 << sb.identity(), Term::Identity, &mut out);
    for (t, x, y) in p.placed() {
        push(x, y, Term::var(t), &mut out);
    }
    let mut level_start = 0;
    for _ in 0..depth {
        let level_end = out.len();
        for i in level_start..level_end {
            let (x, y, t) = out[i].clone();
            push(sa.complement_bits(x), sb.complement_bits(y), Term::complement(t.clone()), &mut out);
            push(sa.converse_bits(x), sb.converse_bits(y), Term::converse(t), &mut out);
        }
        // one operand from the newest level keeps depths exact
        for j in level_start..level_end {
            for i in 0..=j {
                let (x1, y1, t1) = out[i].clone();
                let (x2, y2, t2) = out[j].clone();
                push(x1 & x2, y1 & y2, Term::meet(t1.clone(), t2.clone()), &mut out);
                push(x1 | x2, y1 | y2, Term::join(t1.clone(), t2.clone()), &mut out);
                push(sa.compose_bits(x1, x2), sb.compose_bits(y1, y2), Term::compose(t1.clone(), t2.clone()), &mut out);
                push(sa.compose_bits(x2, x1), sb.compose_bits(y2, y1), Term::compose(t2, t1), &mut out);
            }
        }
        level_start = level_end;
    }
    out
}

/// Checks, for every term over the placed pebbles up to `depth`, that the
/// non-green parts agree and the green supports have equal size.
pub fn verify_terms_lemma(a: &Rainbow, b: &Rainbow, p: &PebblePosition, depth: usize) -> Result<TermsReport> {
    if a.h() != b.h() {
        return input_err("the algebras must share the structure indexing reds");
    }
    p.validate(a.atoms(), b.atoms())?;
    let values = term_values(a, b, p, depth);
    let mut report = TermsReport {
        pairs_checked: values.len(),
        violations: Vec::new(),
    };
    for (x, y, t) in values {
        if translate_non_green(a, b, x & a.non_green_mask()) != y & b.non_green_mask() {
            report.violations.push(TermViolation {
                term: t.to_string(),
                kind: ViolationKind::NonGreen,
            });
        }
        if a.green_support(x).count_ones() != b.green_support(y).count_ones() {
            report.violations.push(TermViolation {
                term: t.to_string(),
                kind: ViolationKind::Cardinality,
            });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeViolation {
    pub term: String,
    pub side: Side,
    pub coloured: u64,
    pub expected: u64,
    pub safe_replies: Vec<u64>,
}

/// From `state`, colours `γ(t)` (and separately `η(t)`) with the first spare
/// colour and checks that the only safe answer is `η(t)` (resp. `γ(t)`).
pub fn probe_reserved_colours(tr: &Transfer, state: &TransferState, depth: usize) -> Result<Vec<ProbeViolation>> {
    if !tr.solved.is_safe(&state.parallel)? {
        return Err(Error::Precondition("parallel position is not safe".into()));
    }
    let mut out = Vec::new();
    for (x, y, t) in term_values(tr.a, tr.b, &state.pebbles, depth) {
        let (gx, hy) = (tr.a.green_support(x), tr.b.green_support(y));
        for (side, set, expected) in [(Side::G, gx, hy), (Side::H, hy, gx)] {
            let choice = ForallChoice {
                colour: tr.pebbles,
                side,
                set,
            };
            let safe = tr.solved.safe_replies(&state.parallel, &choice)?;
            if safe != [expected] {
                out.push(ProbeViolation {
                    term: t.to_string(),
                    side,
                    coloured: set,
                    expected,
                    safe_replies: safe,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferAdversary {
    /// Every ∀ move in every round, up to a budget on distinct states.
    Exhaustive { max_states: u64 },
    /// `plays` uniformly random games.
    Random { seed: u64, plays: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferChecks {
    /// Term depth for the lemma checks at each state.
    pub lemma_depth: usize,
    /// Term depth for the spare-colour probes; `None` skips them.
    pub probe_depth: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    /// Distinct states checked.
    pub states: u64,
    /// Every move was explored (exhaustive mode within budget).
    pub complete: bool,
    pub iso_failures: u64,
    pub transfer_failures: u64,
    pub lemma_violations: u64,
    pub probe_violations: u64,
    /// Description of the first problem found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl TransferReport {
    pub fn clean(&self) -> bool {
        self.iso_failures + self.transfer_failures + self.lemma_violations + self.probe_violations == 0
    }
}

struct Player<'t, 'a> {
    tr: &'t Transfer<'a>,
    checks: TransferChecks,
    report: TransferReport,
    seen: HashMap<Vec<(Option<(u64, u64)>, u64, u64)>, usize>,
    /// Verdict of [`Player::check`] per distinct state.
    checked: HashMap<Vec<(Option<(u64, u64)>, u64, u64)>, bool>,
}

impl Player<'_, '_> {
    fn note(&mut self, what: String) {
        self.report.first_failure.get_or_insert(what);
    }

    /// Checks a reached state once; false if it is a failure.
    fn check(&mut self, st: &TransferState) -> Result<bool> {
        let key = st.key();
        if let Some(&ok) = self.checked.get(&key) {
            return Ok(ok);
        }
        let ok = self.check_new(st)?;
        self.checked.insert(key, ok);
        Ok(ok)
    }

    fn check_new(&mut self, st: &TransferState) -> Result<bool> {
        self.report.states += 1;
        let (a, b) = (self.tr.a.atoms(), self.tr.b.atoms());
        if generate(a, b, &st.pebbles).is_err() {
            self.report.iso_failures += 1;
            self.note(format!("induced map fails at {:?}", st.pebbles));
            return Ok(false);
        }
        let lemma = verify_terms_lemma(self.tr.a, self.tr.b, &st.pebbles, self.checks.lemma_depth)?;
        if !lemma.passed() {
            self.report.lemma_violations += lemma.violations.len() as u64;
            self.note(format!("term check fails at {:?}: {:?}", st.pebbles, lemma.violations[0]));
        }
        if let Some(d) = self.checks.probe_depth {
            let probes = probe_reserved_colours(self.tr, st, d)?;
            if let Some(v) = probes.first() {
                self.report.probe_violations += probes.len() as u64;
                self.note(format!("probe fails at {:?}: {v:?}", st.pebbles));
            }
        }
        Ok(true)
    }

    fn moves(&self) -> impl Iterator<Item = (usize, AlgebraSide, u64)> + '_ {
        let (fa, fb) = (self.tr.a.atoms().full_bits(), self.tr.b.atoms().full_bits());
        (0..self.tr.pebbles).flat_map(move |t| {
            (0..=fa)
                .map(move |x| (t, AlgebraSide::A, x))
                .chain((0..=fb).map(move |y| (t, AlgebraSide::B, y)))
        })
    }

    fn explore(&mut self, st: &TransferState, left: usize, budget: u64) -> Result<()> {
        if left == 0 {
            return Ok(());
        }
        let key = st.key();
        if self.seen.get(&key).is_some_and(|&l| l >= left) {
            return Ok(());
        }
        let moves: Vec<_> = self.moves().collect();
        for (t, side, x) in moves {
            if self.report.states >= budget {
                self.report.complete = false;
                return Ok(());
            }
            match transfer_respond(self.tr, st, t, side, x)? {
                Err(f) => {
                    self.report.transfer_failures += 1;
                    self.note(format!("{f:?} after pebble {t} on {x:#b}"));
                }
                Ok((_, next)) => {
                    if self.check(&next)? {
                        self.explore(&next, left - 1, budget)?;
                    }
                }
            }
        }
        self.seen.insert(key, left);
        Ok(())
    }
}

/// Plays transfer against ∀ for `rounds` rounds, checking the induced map,
/// the term lemma and (optionally) the spare-colour probes at every state.
pub fn play_transfer(
    tr: &Transfer,
    rounds: usize,
    adversary: TransferAdversary,
    checks: TransferChecks,
) -> Result<TransferReport> {
    let mut pl = Player {
        tr,
        checks,
        report: TransferReport {
            complete: true,
            ..Default::default()
        },
        seen: HashMap::new(),
        checked: HashMap::new(),
    };
    let start = tr.initial();
    if !pl.check(&start)? {
        return Ok(pl.report);
    }
    match adversary {
        TransferAdversary::Exhaustive { max_states } => pl.explore(&start, rounds, max_states)?,
        TransferAdversary::Random { seed, plays } => {
            pl.report.complete = false;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (fa, fb) = (tr.a.atoms().full_bits(), tr.b.atoms().full_bits());
            // without pebbles ∀ has no moves
            let rounds = if tr.pebbles == 0 { 0 } else { rounds };
            for _ in 0..plays {
                let mut st = start.clone();
                for _ in 0..rounds {
                    let t = rng.gen_range(0..tr.pebbles);
                    let (side, x) = if rng.gen_bool(0.5) {
                        (AlgebraSide::A, rng.gen_range(0..=fa))
                    } else {
                        (AlgebraSide::B, rng.gen_range(0..=fb))
                    };
                    match transfer_respond(tr, &st, t, side, x)? {
                        Err(f) => {
                            pl.report.transfer_failures += 1;
                            pl.note(format!("{f:?}"));
                            break;
                        }
                        Ok((_, next)) => {
                            if !pl.check(&next)? {
                                break;
                            }
                            st = next;
                        }
                    }
                }
            }
        }
    }
    Ok(pl.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rainbow::build_rainbow;
    use crate::seurat::{solve, Variant};
    use crate::structures::{examples, Digraph};

    fn setup(g: &Digraph, h: &Digraph, f: &Digraph, c: usize) -> (Rainbow, Rainbow, Solved) {
        let a = build_rainbow(&g.to_structure(), &f.to_structure()).unwrap();
        let b = build_rainbow(&h.to_structure(), &f.to_structure()).unwrap();
        let s = solve(&g.to_structure(), &h.to_structure(), c + 3, Variant::Standard).unwrap();
        (a, b, s)
    }

    #[test]
    fn gamma_examples() {
        let g = Digraph::from_edges(3, [(0, 1)]).unwrap();
        let r = build_rainbow(&g.to_structure(), &examples::loopless_point().to_structure()).unwrap();
        let x = 1 << crate::rainbow::WHITE | 1 << r.green(2);
        assert_eq!(gamma(&r, &Term::var(0), &[Some(x)]).unwrap(), 0b100);
        assert_eq!(gamma(&r, &Term::Identity, &[]).unwrap(), 0);
        assert_eq!(gamma(&r, &Term::complement(Term::var(0)), &[Some(x)]).unwrap(), 0b011);
        assert_eq!(gamma(&r, &Term::converse(Term::var(0)), &[Some(x)]).unwrap(), 0b100);
        assert!(matches!(gamma(&r, &Term::var(1), &[Some(x)]), Err(Error::UnassignedVariable(1))));
    }

    #[test]
    fn respond_copies_non_green_and_mirrors_green() {
        let g = Digraph::from_edges(2, [(0, 1)]).unwrap();
        let h = g.permuted(&[1, 0]);
        let (a, b, s) = setup(&g, &h, &h, 1);
        let tr = Transfer::new(&a, &b, &s, 1).unwrap();
        let st = tr.initial();
        let x = 1 << crate::rainbow::WHITE | 1 << a.green(0);
        let (y, next) = transfer_respond(&tr, &st, 0, AlgebraSide::A, x).unwrap().unwrap();
        assert_eq!(y & b.non_green_mask(), 1 << crate::rainbow::WHITE);
        assert_eq!(b.green_support(y), 0b10);
        assert_eq!(next.parallel.g.set(0), 0b01);
        // purely non-green elements are copied unchanged
        let red = 1 << a.red(0, 1);
        let (y, _) = transfer_respond(&tr, &st, 0, AlgebraSide::A, red).unwrap().unwrap();
        assert_eq!(y, 1 << b.red(0, 1));
        // reuse overwrites pebble 0 and colour 0
        let (_, again) = transfer_respond(&tr, &next, 0, AlgebraSide::A, red).unwrap().unwrap();
        assert_eq!(again.pebbles.alpha(0), Some(red));
        assert_eq!(again.parallel.g.set(0), 0);
    }

    #[test]
    fn corrupted_beta_is_reported() {
        let g = Digraph::from_edges(2, [(0, 1)]).unwrap();
        let (a, b, _) = setup(&g, &g, &g, 1);
        let mut p = PebblePosition::new(1);
        p.place(0, 1 << a.green(0), (1 << b.green(0)) | (1 << b.green(1)));
        let report = verify_terms_lemma(&a, &b, &p, 1).unwrap();
        assert!(!report.passed());
        let mut ok = PebblePosition::new(1);
        ok.place(0, 1 << a.green(0), 1 << b.green(0));
        assert!(verify_terms_lemma(&a, &b, &ok, 2).unwrap().passed());
    }

    #[test]
    fn exhaustive_transfer_on_a_point() {
        let p = Digraph::from_edges(1, [(0, 0)]).unwrap();
        let (a, b, s) = setup(&p, &p, &p, 2);
        let tr = Transfer::new(&a, &b, &s, 2).unwrap();
        let checks = TransferChecks {
            lemma_depth: 2,
            probe_depth: Some(1),
        };
        let report = play_transfer(&tr, 3, TransferAdversary::Exhaustive { max_states: u64::MAX }, checks).unwrap();
        assert!(report.complete);
        assert!(report.clean(), "{report:?}");
    }

    #[test]
    fn mismatched_parallel_game_is_rejected() {
        let g = Digraph::from_edges(2, [(0, 1)]).unwrap();
        let (a, b, s) = setup(&g, &g, &g, 1);
        assert!(Transfer::new(&a, &b, &s, 2).is_err());
        let other = build_rainbow(&g.to_structure(), &examples::loopless_point().to_structure()).unwrap();
        assert!(Transfer::new(&a, &other, &s, 1).is_err());
    }
}
