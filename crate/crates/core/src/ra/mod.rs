//! Finite atom structures and their complex algebras.
//!
//! An [`AtomStructure`] lists atoms, an identity atom, a converse involution
//! and a set of forbidden triples. A triple `(a, b, c)` is forbidden when
//! `(a ; b) · c = 0`, i.e. a triangle with sides `a`, `b` and base `c` is
//! inconsistent. Elements of the complex algebra are sets of atoms, held in a
//! single `u64`, which caps structures at 64 atoms.

mod dump;
mod term;

pub use dump::AtomStructureDump;
pub use term::{eval_term, Term};

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::error::{input_err, Error, Result};

/// Hard limit on atom count: an element is one machine word.
pub const MAX_ATOMS: usize = 64;

pub type Triple = (usize, usize, usize);

/// Fingerprint of an atom structure; elements carry it so operations can
/// reject mixing elements of different algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraId(u64);

/// An element of a complex algebra: a set of atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    bits: u64,
    algebra: AlgebraId,
}

impl Element {
    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn algebra(self) -> AlgebraId {
        self.algebra
    }

    pub fn contains(self, atom: usize) -> bool {
        atom < 64 && self.bits >> atom & 1 == 1
    }

    pub fn atoms(self) -> impl Iterator<Item = usize> {
        crate::structures::bits(self.bits)
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }
}

#[derive(Clone, Debug)]
pub struct AtomStructure {
    labels: Vec<String>,
    identity: usize,
    converse: Vec<usize>,
    /// `forbidden[a * n + b]` is the set of bases `c` with `(a, b, c)` forbidden.
    forbidden: Vec<u64>,
    /// `compose[a * n + b]` is the complement of `forbidden[a * n + b]`.
    compose: Vec<u64>,
    id: AlgebraId,
}

impl PartialEq for AtomStructure {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.identity == other.identity
            && self.converse == other.converse
            && self.forbidden == other.forbidden
    }
}

impl Eq for AtomStructure {}

impl AtomStructure {
    /// Builds a structure whose forbidden set is the Peircean closure of `seeds`.
    pub fn from_seeds(
        labels: Vec<String>,
        identity: usize,
        converse: Vec<usize>,
        seeds: impl IntoIterator<Item = Triple>,
    ) -> Result<Self> {
        Self::validate(&labels, identity, &converse)?;
        let seeds: BTreeSet<Triple> = seeds.into_iter().collect();
        let n = labels.len();
        if let Some(t) = seeds.iter().find(|t| t.0 >= n || t.1 >= n || t.2 >= n) {
            return input_err(format!("triple {t:?} out of range"));
        }
        if converse.iter().enumerate().any(|(a, &ca)| converse[ca] != a) {
            return Err(Error::Precondition("closure needs an involutive converse".into()));
        }
        let table = close_table(n, &converse, seeds.iter().copied());
        Self::build_table(labels, identity, converse, table)
    }

    /// Builds a structure with exactly the given forbidden triples, closed or not.
    /// [`check_ra_axioms`] reports any defect.
    pub fn from_forbidden(
        labels: Vec<String>,
        identity: usize,
        converse: Vec<usize>,
        forbidden: impl IntoIterator<Item = Triple>,
    ) -> Result<Self> {
        Self::validate(&labels, identity, &converse)?;
        let n = labels.len();
        let triples: Vec<Triple> = forbidden.into_iter().collect();
        if let Some(t) = triples.iter().find(|t| t.0 >= n || t.1 >= n || t.2 >= n) {
            return input_err(format!("triple {t:?} out of range"));
        }
        Self::build(labels, identity, converse, triples)
    }

    fn validate(labels: &[String], identity: usize, converse: &[usize]) -> Result<()> {
        let n = labels.len();
        if n == 0 {
            return input_err("atom structure needs at least one atom");
        }
        if n > MAX_ATOMS {
            return Err(Error::CapExceeded {
                what: "atom count",
                value: n,
                cap: MAX_ATOMS,
            });
        }
        if identity >= n {
            return input_err(format!("identity atom {identity} out of range"));
        }
        if converse.len() != n || converse.iter().any(|&c| c >= n) {
            return input_err("converse must map every atom to an atom");
        }
        Ok(())
    }

    fn build(
        labels: Vec<String>,
        identity: usize,
        converse: Vec<usize>,
        triples: impl IntoIterator<Item = Triple>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut forbidden = vec![0u64; n * n];
        for (a, b, c) in triples {
            forbidden[a * n + b] |= 1 << c;
        }
        Self::build_table(labels, identity, converse, forbidden)
    }

    fn build_table(labels: Vec<String>, identity: usize, converse: Vec<usize>, forbidden: Vec<u64>) -> Result<Self> {
        let n = labels.len();
        let all = full_mask(n);
        let compose = forbidden.iter().map(|f| all & !f).collect();
        let mut hasher = DefaultHasher::new();
        labels.hash(&mut hasher);
        identity.hash(&mut hasher);
        converse.hash(&mut hasher);
        forbidden.hash(&mut hasher);
        Ok(Self {
            labels,
            identity,
            converse,
            forbidden,
            compose,
            id: AlgebraId(hasher.finish()),
        })
    }

    pub fn atom_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.labels[atom]
    }

    pub fn atom_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn converse(&self, atom: usize) -> usize {
        self.converse[atom]
    }

    pub fn converse_map(&self) -> &[usize] {
        &self.converse
    }

    pub fn id(&self) -> AlgebraId {
        self.id
    }

    #[inline]
    pub fn is_forbidden(&self, a: usize, b: usize, c: usize) -> bool {
        self.forbidden[a * self.labels.len() + b] >> c & 1 == 1
    }

    /// Atoms `c` with `(a, b, c)` not forbidden, i.e. `a ; b` on atoms.
    #[inline]
    pub fn compose_atoms(&self, a: usize, b: usize) -> u64 {
        self.compose[a * self.labels.len() + b]
    }

    /// All forbidden triples in lexicographic order.
    pub fn forbidden_triples(&self) -> Vec<Triple> {
        let n = self.labels.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in crate::structures::bits(self.forbidden[a * n + b]) {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    // -- raw bit-level operations, for hot loops -----------------------------

    #[inline]
    pub fn full_bits(&self) -> u64 {
        full_mask(self.labels.len())
    }

    #[inline]
    pub fn compose_bits(&self, x: u64, y: u64) -> u64 {
        let n = self.labels.len();
        let all = full_mask(n);
        let mut out = 0u64;
        let mut xs = x;
        while xs != 0 {
            let a = xs.trailing_zeros() as usize;
            xs &= xs - 1;
            let row = &self.compose[a * n..a * n + n];
            let mut ys = y;
            while ys != 0 {
                let b = ys.trailing_zeros() as usize;
                ys &= ys - 1;
                out |= row[b];
            }
            if out == all {
                break;
            }
        }
        out
    }

    #[inline]
    pub fn converse_bits(&self, x: u64) -> u64 {
        crate::structures::bits(x).fold(0, |acc, a| acc | 1 << self.converse[a])
    }

    #[inline]
    pub fn complement_bits(&self, x: u64) -> u64 {
        self.full_bits() & !x
    }

    // -- checked element API -------------------------------------------------

    /// Wraps a bit set; fails if it names atoms outside the structure.
    pub fn element_from_bits(&self, bits: u64) -> Result<Element> {
        if bits & !self.full_bits() != 0 {
            return input_err("element mentions atoms outside the structure");
        }
        Ok(self.wrap(bits))
    }

    pub fn element(&self, atoms: impl IntoIterator<Item = usize>) -> Result<Element> {
        let mut bits = 0u64;
        for a in atoms {
            if a >= self.atom_count() {
                return input_err(format!("atom {a} out of range"));
            }
            bits |= 1 << a;
        }
        Ok(self.wrap(bits))
    }

    #[inline]
    pub(crate) fn wrap(&self, bits: u64) -> Element {
        Element { bits, algebra: self.id }
    }

    pub fn zero(&self) -> Element {
        self.wrap(0)
    }

    pub fn one(&self) -> Element {
        self.wrap(self.full_bits())
    }

    pub fn identity_element(&self) -> Element {
        self.wrap(1 << self.identity)
    }

    pub fn atom(&self, a: usize) -> Element {
        assert!(a < self.atom_count(), "atom {a} out of range");
        self.wrap(1 << a)
    }

    fn own(&self, x: Element) -> Result<u64> {
        if x.algebra == self.id {
            Ok(x.bits)
        } else {
            Err(Error::MixedAlgebras)
        }
    }

    /// `{c : (a, b, c) not forbidden for some a ∈ x, b ∈ y}`.
    pub fn compose(&self, x: Element, y: Element) -> Result<Element> {
        Ok(self.wrap(self.compose_bits(self.own(x)?, self.own(y)?)))
    }

    pub fn converse_el(&self, x: Element) -> Result<Element> {
        Ok(self.wrap(self.converse_bits(self.own(x)?)))
    }

    pub fn meet(&self, x: Element, y: Element) -> Result<Element> {
        Ok(self.wrap(self.own(x)? & self.own(y)?))
    }

    pub fn join(&self, x: Element, y: Element) -> Result<Element> {
        Ok(self.wrap(self.own(x)? | self.own(y)?))
    }

    pub fn complement(&self, x: Element) -> Result<Element> {
        Ok(self.wrap(self.complement_bits(self.own(x)?)))
    }

    pub fn format_element(&self, x: Element) -> String {
        format_bits(self, x.bits)
    }
}

pub(crate) fn format_bits(a: &AtomStructure, bits: u64) -> String {
    let parts: Vec<&str> = crate::structures::bits(bits).map(|i| a.label(i)).collect();
    format!("{{{}}}", parts.join(", "))
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// The five non-trivial Peircean transforms of `(a, b, c)`.
pub fn peircean_transforms((a, b, c): Triple, converse: &[usize]) -> [Triple; 5] {
    let (ca, cb, cc) = (converse[a], converse[b], converse[c]);
    [(ca, c, b), (c, cb, a), (cb, ca, cc), (b, cc, ca), (cc, a, cb)]
}

/// Least superset of `triples` closed under the Peircean transforms.
/// `converse` must be an involution covering every atom mentioned.
pub fn peircean_closure(triples: &BTreeSet<Triple>, converse: &[usize]) -> BTreeSet<Triple> {
    let n = converse.len();
    let table = close_table(n, converse, triples.iter().copied());
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            for c in crate::structures::bits(table[a * n + b]) {
                out.insert((a, b, c));
            }
        }
    }
    out
}

/// Worklist closure over an `n * n` table of base masks.
fn close_table(n: usize, converse: &[usize], seeds: impl IntoIterator<Item = Triple>) -> Vec<u64> {
    let mut table = vec![0u64; n * n];
    let mut queue: Vec<Triple> = Vec::new();
    let insert = |table: &mut Vec<u64>, queue: &mut Vec<Triple>, (a, b, c): Triple| {
        let cell = &mut table[a * n + b];
        if *cell >> c & 1 == 0 {
            *cell |= 1 << c;
            queue.push((a, b, c));
        }
    };
    for t in seeds {
        insert(&mut table, &mut queue, t);
    }
    while let Some(t) = queue.pop() {
        for u in peircean_transforms(t, converse) {
            insert(&mut table, &mut queue, u);
        }
    }
    table
}

/// Default cap for [`check_ra_axioms`].
pub const DEFAULT_AXIOM_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AxiomFailure {
    ConverseNotInvolution { atom: usize },
    IdentityNotSelfConverse,
    /// `(1', a, b)` or `(a, 1', b)` has the wrong status.
    IdentityLaw { a: usize, b: usize },
    /// `c ≤ a;b` but not `c˘ ≤ b˘;a˘`, or the other way round.
    ConverseLaw { a: usize, b: usize, c: usize },
    NotPeirceanClosed { triple: Triple, missing: Triple },
    /// `d` lies below exactly one of `(a;b);c` and `a;(b;c)`.
    Associativity { a: usize, b: usize, c: usize, d: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies the relation algebra axioms at atom level.
pub fn check_ra_axioms(a: &AtomStructure, cap: usize) -> Result<AxiomReport> {
    let n = a.atom_count();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "atom count",
            value: n,
            cap,
        });
    }
    let mut failures = Vec::new();
    let conv = a.converse_map();
    for x in 0..n {
        if conv[conv[x]] != x {
            failures.push(AxiomFailure::ConverseNotInvolution { atom: x });
        }
    }
    if conv[a.identity()] != a.identity() {
        failures.push(AxiomFailure::IdentityNotSelfConverse);
    }
    let id = a.identity();
    for x in 0..n {
        for y in 0..n {
            if a.is_forbidden(id, x, y) != (x != y) || a.is_forbidden(x, id, y) != (x != y) {
                failures.push(AxiomFailure::IdentityLaw { a: x, b: y });
            }
        }
    }
    let involutive = failures
        .iter()
        .all(|f| !matches!(f, AxiomFailure::ConverseNotInvolution { .. }));
    for x in 0..n {
        for y in 0..n {
            let xy = a.compose_atoms(x, y);
            let rev = a.compose_atoms(conv[y], conv[x]);
            for z in 0..n {
                if (xy >> z & 1) != (rev >> conv[z] & 1) {
                    failures.push(AxiomFailure::ConverseLaw { a: x, b: y, c: z });
                }
            }
        }
    }
    if involutive {
        for t in a.forbidden_triples() {
            for u in peircean_transforms(t, conv) {
                if !a.is_forbidden(u.0, u.1, u.2) {
                    failures.push(AxiomFailure::NotPeirceanClosed { triple: t, missing: u });
                }
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            let xy = a.compose_atoms(x, y);
            for z in 0..n {
                let left = a.compose_bits(xy, 1 << z);
                let right = a.compose_bits(1 << x, a.compose_atoms(y, z));
                for d in crate::structures::bits(left ^ right) {
                    failures.push(AxiomFailure::Associativity { a: x, b: y, c: z, d });
                }
            }
        }
    }
    Ok(AxiomReport { failures })
}

impl fmt::Display for AtomStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&AtomStructureDump::from(self).to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_identity() -> AtomStructure {
        AtomStructure::from_seeds(vec!["1'".into()], 0, vec![0], []).unwrap()
    }

    /// 1' plus one symmetric diversity atom `d` with `d;d = 1 `.
    fn two_atom() -> AtomStructure {
        AtomStructure::from_seeds(vec!["1'".into(), "d".into()], 0, vec![0, 1], [(0, 1, 0), (0, 0, 1)]).unwrap()
    }

    #[test]
    fn closure_of_empty_is_empty() {
        assert!(peircean_closure(&BTreeSet::new(), &[0, 1]).is_empty());
    }

    #[test]
    fn single_identity_passes() {
        assert!(check_ra_axioms(&single_identity(), DEFAULT_AXIOM_CAP).unwrap().passed());
        assert!(check_ra_axioms(&two_atom(), DEFAULT_AXIOM_CAP).unwrap().passed());
    }

    #[test]
    fn non_involutive_converse_fails() {
        let a = AtomStructure::from_forbidden(
            vec!["1'".into(), "p".into(), "q".into()],
            0,
            vec![0, 2, 2],
            [],
        )
        .unwrap();
        let report = check_ra_axioms(&a, DEFAULT_AXIOM_CAP).unwrap();
        assert!(report
            .failures
            .contains(&AxiomFailure::ConverseNotInvolution { atom: 1 }));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(check_ra_axioms(&two_atom(), 1), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn mixed_algebras_rejected() {
        let a = single_identity();
        let b = two_atom();
        assert_eq!(a.compose(a.one(), b.one()), Err(Error::MixedAlgebras));
        assert_eq!(a.meet(a.one(), b.zero()), Err(Error::MixedAlgebras));
    }

    #[test]
    fn boolean_operations() {
        let a = two_atom();
        assert_eq!(a.complement(a.zero()).unwrap(), a.one());
        let x = a.atom(1);
        assert_eq!(a.meet(x, a.complement(x).unwrap()).unwrap(), a.zero());
        assert_eq!(a.compose(a.identity_element(), x).unwrap(), x);
        assert_eq!(a.compose(x, x).unwrap(), a.one());
    }

    fn small_structure() -> impl Strategy<Value = (Vec<usize>, BTreeSet<Triple>)> {
        // 1' plus up to 4 atoms, converse as a random involution.
        (2usize..=5).prop_flat_map(|n| {
            let conv = proptest::collection::vec(any::<bool>(), n).prop_map(move |pairing| {
                let mut c: Vec<usize> = (0..n).collect();
                let mut i = 1;
                while i + 1 < n {
                    if pairing[i] {
                        c.swap(i, i + 1);
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                c
            });
            let triples = proptest::collection::btree_set((0..n, 0..n, 0..n), 0..12);
            (conv, triples)
        })
    }

    proptest! {
        #[test]
        fn closure_is_idempotent((conv, seeds) in small_structure()) {
            let once = peircean_closure(&seeds, &conv);
            prop_assert!(once.is_superset(&seeds));
            prop_assert_eq!(peircean_closure(&once, &conv), once);
        }

        #[test]
        fn compose_is_additive(x in 0u64..64, x2 in 0u64..64, y in 0u64..64) {
            let a = crate::rainbow::build_rainbow(
                &crate::structures::Digraph::from_edges(1, []).unwrap().to_structure(),
                &crate::structures::Digraph::from_edges(1, [(0, 0)]).unwrap().to_structure(),
            ).unwrap();
            let a = a.atoms();
            let (x, x2, y) = (a.wrap(x), a.wrap(x2), a.wrap(y));
            let lhs = a.compose(a.join(x, x2).unwrap(), y).unwrap();
            let rhs = a.join(a.compose(x, y).unwrap(), a.compose(x2, y).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(
                a.converse_el(a.compose(x, y).unwrap()).unwrap(),
                a.compose(a.converse_el(y).unwrap(), a.converse_el(x).unwrap()).unwrap()
            );
        }
    }
}
