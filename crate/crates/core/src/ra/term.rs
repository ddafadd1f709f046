use std::collections::BTreeMap;
use std::fmt;

use super::{AtomStructure, Element};
use crate::error::{Error, Result};

/// Relation algebra terms over variables `x0, x1, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    Zero,
    One,
    Identity,
    Complement(Box<Term>),
    Converse(Box<Term>),
    Meet(Box<Term>, Box<Term>),
    Join(Box<Term>, Box<Term>),
    Compose(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(i: usize) -> Self {
        Term::Var(i)
    }

    pub fn complement(t: Term) -> Self {
        Term::Complement(Box::new(t))
    }

    pub fn converse(t: Term) -> Self {
        Term::Converse(Box::new(t))
    }

    pub fn meet(a: Term, b: Term) -> Self {
        Term::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: Term, b: Term) -> Self {
        Term::Join(Box::new(a), Box::new(b))
    }

    pub fn compose(a: Term, b: Term) -> Self {
        Term::Compose(Box::new(a), Box::new(b))
    }

    /// Operator nesting depth; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Zero | Term::One | Term::Identity => 0,
            Term::Complement(t) | Term::Converse(t) => 1 + t.depth(),
            Term::Meet(a, b) | Term::Join(a, b) | Term::Compose(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Largest variable index, if any variable occurs.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Term::Var(i) => Some(*i),
            Term::Zero | Term::One | Term::Identity => None,
            Term::Complement(t) | Term::Converse(t) => t.max_var(),
            Term::Meet(a, b) | Term::Join(a, b) | Term::Compose(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Evaluates on raw atom sets; `lookup` supplies variable values.
    pub fn eval_bits(&self, a: &AtomStructure, lookup: &impl Fn(usize) -> Option<u64>) -> Result<u64> {
        Ok(match self {
            Term::Var(i) => lookup(*i).ok_or(Error::UnassignedVariable(*i))?,
            Term::Zero => 0,
            Term::One => a.full_bits(),
            Term::Identity => 1 << a.identity(),
            Term::Complement(t) => a.complement_bits(t.eval_bits(a, lookup)?),
            Term::Converse(t) => a.converse_bits(t.eval_bits(a, lookup)?),
            Term::Meet(x, y) => x.eval_bits(a, lookup)? & y.eval_bits(a, lookup)?,
            Term::Join(x, y) => x.eval_bits(a, lookup)? | y.eval_bits(a, lookup)?,
            Term::Compose(x, y) => a.compose_bits(x.eval_bits(a, lookup)?, y.eval_bits(a, lookup)?),
        })
    }
}

/// Structural evaluation in the complex algebra of `a`.
pub fn eval_term(a: &AtomStructure, t: &Term, assignment: &BTreeMap<usize, Element>) -> Result<Element> {
    if assignment.values().any(|e| e.algebra() != a.id()) {
        return Err(Error::MixedAlgebras);
    }
    let bits = t.eval_bits(a, &|i| assignment.get(&i).map(|e| e.bits()))?;
    Ok(a.wrap(bits))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::Zero => f.write_str("0"),
            Term::One => f.write_str("1"),
            Term::Identity => f.write_str("1'"),
            Term::Complement(t) => write!(f, "-{t}"),
            Term::Converse(t) => write!(f, "{t}~"),
            Term::Meet(a, b) => write!(f, "({a} . {b})"),
            Term::Join(a, b) => write!(f, "({a} + {b})"),
            Term::Compose(a, b) => write!(f, "({a} ; {b})"),
        }
    }
}
