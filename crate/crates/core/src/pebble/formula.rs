//! First-order sentences over the relation algebra signature, a seeded
//! sampler for them, and agreement testing between two algebras.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{solve_bounded_pebble, PebbleWinner};
use crate::error::{input_err, Error, Result};
use crate::ra::{AtomStructure, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Exists(usize, Box<Formula>),
}

impl Formula {
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(f, g) => f.quantifier_depth().max(g.quantifier_depth()),
            Formula::Exists(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Free variables as a bit mask (variables above 63 are rejected earlier).
    fn free(&self) -> u64 {
        fn term_vars(t: &Term) -> u64 {
            match t {
                Term::Var(i) => 1u64.checked_shl(*i as u32).unwrap_or(0),
                Term::Zero | Term::One | Term::Identity => 0,
                Term::Complement(x) | Term::Converse(x) => term_vars(x),
                Term::Meet(x, y) | Term::Join(x, y) | Term::Compose(x, y) => term_vars(x) | term_vars(y),
            }
        }
        match self {
            Formula::Eq(s, t) => term_vars(s) | term_vars(t),
            Formula::Not(f) => f.free(),
            Formula::And(f, g) => f.free() | g.free(),
            Formula::Exists(v, f) => f.free() & !(1u64 << v),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Formula::Eq(s, t) => s.max_var().max(t.max_var()),
            Formula::Not(f) => f.max_var(),
            Formula::And(f, g) => f.max_var().max(g.max_var()),
            Formula::Exists(v, f) => Some(*v).max(f.max_var()),
        }
    }

    /// Truth in the complex algebra of `a` under `env`.
    pub fn holds(&self, a: &AtomStructure, env: &mut [Option<u64>]) -> Result<bool> {
        Ok(match self {
            Formula::Eq(s, t) => {
                let look = |i: usize| env.get(i).copied().flatten();
                s.eval_bits(a, &look)? == t.eval_bits(a, &look)?
            }
            Formula::Not(f) => !f.holds(a, env)?,
            Formula::And(f, g) => f.holds(a, env)? && g.holds(a, env)?,
            Formula::Exists(v, f) => {
                let saved = env[*v];
                let mut found = false;
                for x in 0..=a.full_bits() {
                    env[*v] = Some(x);
                    if f.holds(a, env)? {
                        found = true;
                        break;
                    }
                }
                env[*v] = saved;
                found
            }
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(s, t) => write!(f, "{s} = {t}"),
            Formula::Not(g) => write!(f, "~({g})"),
            Formula::And(g, h) => write!(f, "({g} & {h})"),
            Formula::Exists(v, g) => write!(f, "E x{v}. {g}"),
        }
    }
}

/// Rejects anything but a sentence in `c` variables of quantifier depth ≤ `n`.
pub fn check_sentence(phi: &Formula, c: usize, n: usize) -> Result<()> {
    if phi.max_var().is_some_and(|v| v >= c || v >= 64) {
        return input_err(format!("sentence uses a variable beyond x{}", c.saturating_sub(1)));
    }
    if phi.quantifier_depth() > n {
        return input_err(format!("quantifier depth {} exceeds {n}", phi.quantifier_depth()));
    }
    if phi.free() != 0 {
        return input_err("formula has free variables");
    }
    Ok(())
}

/// Seeded grammar sampler: equalities of terms, negation, conjunction and
/// existential quantifiers over `x0..x{c-1}`.
pub struct FormulaSampler {
    rng: ChaCha8Rng,
    c: usize,
    depth: usize,
}

impl FormulaSampler {
    pub fn new(c: usize, depth: usize, seed: u64) -> Result<Self> {
        if c == 0 || c > 64 {
            return input_err("variable count must be between 1 and 64");
        }
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            c,
            depth,
        })
    }

    pub fn sample(&mut self) -> Formula {
        self.formula(self.depth, 0, 4, true)
    }

    fn formula(&mut self, qd: usize, bound: u64, size: usize, top: bool) -> Formula {
        let r = self.rng.gen_range(0..10);
        if qd > 0 && (top || r < 4) {
            let v = self.rng.gen_range(0..self.c);
            let body = self.formula(qd - 1, bound | 1 << v, size, false);
            return Formula::Exists(v, Box::new(body));
        }
        if size > 0 && r < 6 {
            return Formula::Not(Box::new(self.formula(qd, bound, size - 1, false)));
        }
        if size > 0 && r < 8 {
            let f = self.formula(qd, bound, size - 1, false);
            let g = self.formula(qd, bound, size - 1, false);
            return Formula::And(Box::new(f), Box::new(g));
        }
        let s = self.term(bound, 2);
        let t = if self.rng.gen_bool(0.5) { Term::Zero } else { self.term(bound, 2) };
        Formula::Eq(s, t)
    }

    fn term(&mut self, bound: u64, depth: usize) -> Term {
        if depth == 0 || self.rng.gen_bool(0.35) {
            let vars: Vec<usize> = (0..self.c).filter(|v| bound >> v & 1 == 1).collect();
            let k = self.rng.gen_range(0..3 + vars.len() * 2);
            return match k {
                0 => Term::One,
                1 => Term::Identity,
                2 => Term::Zero,
                k => Term::var(vars[(k - 3) / 2]),
            };
        }
        match self.rng.gen_range(0..5) {
            0 => Term::complement(self.term(bound, depth - 1)),
            1 => Term::converse(self.term(bound, depth - 1)),
            2 => Term::meet(self.term(bound, depth - 1), self.term(bound, depth - 1)),
            3 => Term::join(self.term(bound, depth - 1), self.term(bound, depth - 1)),
            _ => Term::compose(self.term(bound, depth - 1), self.term(bound, depth - 1)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    pub samples: usize,
    pub agreed: usize,
    /// Sentences true in both algebras.
    pub true_in_both: usize,
    pub disagreements: Vec<String>,
}

/// Samples sentences and compares their truth in `a` and `b`. Refuses unless
/// the exhaustive solver confirms ∃ wins the `c`-pebble, `n`-round game.
pub fn sample_formula_agreement(
    a: &AtomStructure,
    b: &AtomStructure,
    c: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<AgreementReport> {
    let verdict = solve_bounded_pebble(a, b, c, n)?;
    if verdict.winner != PebbleWinner::Exists {
        return Err(Error::Precondition(format!(
            "∃ does not win the {c}-pebble {n}-round game ({:?})",
            verdict.winner
        )));
    }
    let mut sampler = FormulaSampler::new(c, n, seed)?;
    let mut report = AgreementReport {
        samples,
        agreed: 0,
        true_in_both: 0,
        disagreements: Vec::new(),
    };
    let mut env = vec![None; c];
    for _ in 0..samples {
        let phi = sampler.sample();
        check_sentence(&phi, c, n)?;
        let (x, y) = (phi.holds(a, &mut env)?, phi.holds(b, &mut env)?);
        if x == y {
            report.agreed += 1;
            report.true_in_both += x as usize;
        } else {
            report.disagreements.push(phi.to_string());
        }
    }
    Ok(report)
}
