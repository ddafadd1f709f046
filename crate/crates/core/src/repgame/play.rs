//! Playing ∃'s strategy against a random or exhaustive ∀.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    derive_state, distinct_legal_moves, exists_response, legal_moves, verify_hypotheses, ForallMove,
    HypothesisReport, Network, StrategyFailure, StrategyState,
};
use crate::error::Result;
use crate::rainbow::Rainbow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adversary {
    /// Every opening atom and every non-trivial move sequence, up to a budget
    /// on distinct positions.
    Exhaustive { max_positions: u64 },
    /// Uniformly random openings and moves.
    Random { seed: u64 },
}

/// One line of a game trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Opening atom on round 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opening: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forall_move: Option<ForallMove>,
    /// `N'(w, z)` for each old node `w`.
    pub response: Vec<usize>,
    pub checks: HypothesisReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<StrategyFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameOutcome {
    pub survived: bool,
    /// Budget ran out before the exhaustive sweep finished.
    pub inconclusive: bool,
    pub positions: u64,
    /// Strategy replies after which H2 failed in its literal form only.
    pub literal_h2_violations: u64,
    /// For random play the whole game; for exhaustive play the failing line,
    /// or empty on success.
    pub trace: Vec<RoundRecord>,
}

/// Plays ∃'s strategy for `rounds` ∀ moves after the opening.
pub fn play_game(r: &Rainbow, rounds: usize, adversary: Adversary) -> Result<GameOutcome> {
    match adversary {
        Adversary::Random { seed } => play_random(r, rounds, seed),
        Adversary::Exhaustive { max_positions } => play_exhaustive(r, rounds, max_positions),
    }
}

fn opening_record(r: &Rainbow, net: &Network, atom: usize) -> RoundRecord {
    RoundRecord {
        round: 0,
        opening: Some(atom),
        forall_move: None,
        response: vec![atom],
        checks: verify_hypotheses(r, net, &StrategyState::default()),
        failure: None,
    }
}

fn play_random(r: &Rainbow, rounds: usize, seed: u64) -> Result<GameOutcome> {
    let a = r.atoms();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let openings: Vec<usize> = (0..a.atom_count()).filter(|&x| x != a.identity()).collect();
    let atom = openings[rng.gen_range(0..openings.len())];
    let mut net = Network::initial(a, atom)?;
    let mut state = StrategyState::default();
    let mut trace = vec![opening_record(r, &net, atom)];
    let mut survived = trace[0].checks.holds();
    for round in 1..=rounds {
        if !survived {
            break;
        }
        let moves = legal_moves(a, &net);
        let Some(&m) = moves.choose(&mut rng) else {
            break;
        };
        match exists_response(r, &state, &net, m)? {
            Ok(reply) => {
                let checks = verify_hypotheses(r, &reply.network, &reply.state);
                survived = checks.holds();
                trace.push(RoundRecord {
                    round,
                    opening: None,
                    forall_move: Some(m),
                    response: reply.new_labels,
                    checks,
                    failure: None,
                });
                net = reply.network;
                state = reply.state;
            }
            Err(failure) => {
                survived = false;
                trace.push(RoundRecord {
                    round,
                    opening: None,
                    forall_move: Some(m),
                    response: Vec::new(),
                    checks: verify_hypotheses(r, &net, &state),
                    failure: Some(failure),
                });
            }
        }
    }
    Ok(GameOutcome {
        survived,
        inconclusive: false,
        positions: trace.len() as u64,
        literal_h2_violations: trace.iter().filter(|t| !t.checks.h2).count() as u64,
        trace,
    })
}

struct Sweep<'a> {
    r: &'a Rainbow,
    budget: u64,
    positions: u64,
    /// Canonical network -> most remaining rounds already cleared.
    seen: HashMap<Vec<u8>, usize>,
    literal_h2_violations: u64,
    out_of_budget: bool,
}

impl Sweep<'_> {
    /// Returns the failing line below `net`, if any.
    fn visit(&mut self, net: &Network, state: &StrategyState, left: usize) -> Result<Option<Vec<RoundRecord>>> {
        if left == 0 {
            return Ok(None);
        }
        let key = net.canonical_key();
        if self.seen.get(&key).is_some_and(|&done| done >= left) {
            return Ok(None);
        }
        if self.positions >= self.budget {
            self.out_of_budget = true;
            return Ok(None);
        }
        self.positions += 1;
        let a = self.r.atoms();
        for m in distinct_legal_moves(a, net) {
            let round = net.size() - 1;
            let record = |response, checks, failure| RoundRecord {
                round,
                opening: None,
                forall_move: Some(m),
                response,
                checks,
                failure,
            };
            match exists_response(self.r, state, net, m)? {
                Err(failure) => {
                    return Ok(Some(vec![record(Vec::new(), verify_hypotheses(self.r, net, state), Some(failure))]));
                }
                Ok(reply) => {
                    let mut checks = verify_hypotheses(self.r, &reply.network, &reply.state);
                    // the state must be a function of the network for the memo to be sound
                    let derived = derive_state(self.r, &reply.network)?;
                    checks.h1 &= derived.as_ref() == Some(&reply.state);
                    if !checks.holds() {
                        return Ok(Some(vec![record(reply.new_labels, checks, None)]));
                    }
                    if !checks.h2 {
                        self.literal_h2_violations += 1;
                    }
                    if let Some(mut line) = self.visit(&reply.network, &reply.state, left - 1)? {
                        line.insert(0, record(reply.new_labels, checks, None));
                        return Ok(Some(line));
                    }
                    if self.out_of_budget {
                        return Ok(None);
                    }
                }
            }
        }
        self.seen.insert(key, left);
        Ok(None)
    }
}

fn play_exhaustive(r: &Rainbow, rounds: usize, budget: u64) -> Result<GameOutcome> {
    let a = r.atoms();
    let mut sweep = Sweep {
        r,
        budget,
        positions: 0,
        seen: HashMap::new(),
        literal_h2_violations: 0,
        out_of_budget: false,
    };
    for atom in 0..a.atom_count() {
        if atom == a.identity() {
            continue;
        }
        let net = Network::initial(a, atom)?;
        let opening = opening_record(r, &net, atom);
        if !opening.checks.holds() {
            return Ok(GameOutcome {
                survived: false,
                inconclusive: false,
                positions: sweep.positions,
                literal_h2_violations: sweep.literal_h2_violations,
                trace: vec![opening],
            });
        }
        if let Some(line) = sweep.visit(&net, &StrategyState::default(), rounds)? {
            let mut trace = vec![opening];
            trace.extend(line);
            return Ok(GameOutcome {
                survived: false,
                inconclusive: false,
                positions: sweep.positions,
                literal_h2_violations: sweep.literal_h2_violations,
                trace,
            });
        }
        if sweep.out_of_budget {
            break;
        }
    }
    Ok(GameOutcome {
        survived: !sweep.out_of_budget,
        inconclusive: sweep.out_of_budget,
        positions: sweep.positions,
        literal_h2_violations: sweep.literal_h2_violations,
        trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rainbow::build_rainbow;
    use crate::structures::{examples, Digraph};

    fn rainbow(g: &Digraph, h: &Digraph) -> Rainbow {
        build_rainbow(&g.to_structure(), &h.to_structure()).unwrap()
    }

    #[test]
    fn zero_rounds_survive() {
        let p = examples::loopless_point();
        let r = rainbow(&p, &p);
        let out = play_game(&r, 0, Adversary::Exhaustive { max_positions: 10 }).unwrap();
        assert!(out.survived);
        let out = play_game(&r, 0, Adversary::Random { seed: 3 }).unwrap();
        assert!(out.survived);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn k1_survives_three_exhaustive_rounds() {
        let p = examples::loopless_point();
        let r = rainbow(&p, &p);
        let out = play_game(&r, 3, Adversary::Exhaustive { max_positions: u64::MAX }).unwrap();
        assert!(out.survived, "{:?}", out.trace);
        assert!(!out.inconclusive);
    }

    #[test]
    fn random_play_is_reproducible() {
        let g = Digraph::from_edges(2, [(0, 1)]).unwrap();
        let h = Digraph::from_edges(2, [(0, 1), (1, 1)]).unwrap();
        let r = rainbow(&g, &h);
        let one = play_game(&r, 12, Adversary::Random { seed: 7 }).unwrap();
        let two = play_game(&r, 12, Adversary::Random { seed: 7 }).unwrap();
        assert_eq!(one, two);
        assert!(one.survived, "{:?}", one.trace.last());
    }

    #[test]
    fn exhaustive_play_finds_the_failure_without_pair_coverage() {
        let r = rainbow(&examples::single_arc(), &examples::loopless_point());
        let out = play_game(&r, 2, Adversary::Exhaustive { max_positions: u64::MAX }).unwrap();
        assert!(!out.survived);
        assert!(out.trace.last().unwrap().failure.is_some());
    }

    #[test]
    fn literal_h2_failures_are_counted_not_fatal() {
        let g = Digraph::empty(2).unwrap();
        let h = Digraph::from_edges(1, [(0, 0)]).unwrap();
        let r = rainbow(&g, &h);
        let out = play_game(&r, 3, Adversary::Exhaustive { max_positions: u64::MAX }).unwrap();
        assert!(out.survived, "{:?}", out.trace);
        assert!(out.literal_h2_violations > 0);
    }

    #[test]
    fn budget_makes_the_sweep_inconclusive() {
        let p = examples::loopless_point();
        let r = rainbow(&p, &p);
        let out = play_game(&r, 3, Adversary::Exhaustive { max_positions: 2 }).unwrap();
        assert!(out.inconclusive);
        assert!(!out.survived);
    }
}
