//! Reference solver for the n-round game: plain memoized recursion on
//! unsorted positions with the definitional win check.

use std::collections::HashMap;

use super::{forall_wins_position, ForallChoice, Game, Position, Side, Variant, Winner, DEFAULT_BIT_CAP};
use crate::error::Result;
use crate::structures::BinaryStructure;

struct Bounded<'a> {
    g: &'a BinaryStructure,
    h: &'a BinaryStructure,
    variant: Variant,
    memo: HashMap<(Vec<u64>, Vec<u64>, usize), bool>,
}

impl Bounded<'_> {
    fn forall_wins(&mut self, p: &Position, n: usize) -> Result<bool> {
        let key = (p.g.sets().to_vec(), p.h.sets().to_vec(), n);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut won = forall_wins_position(p, self.g, self.h, self.variant)?.is_some();
        if !won && n > 0 {
            'choices: for colour in 0..p.colours() {
                for side in [Side::G, Side::H] {
                    let (own, other) = match side {
                        Side::G => (self.g.size(), self.h.size()),
                        Side::H => (self.h.size(), self.g.size()),
                    };
                    for set in 0..1u64 << own {
                        let choice = ForallChoice { colour, side, set };
                        let mut forced = true;
                        for reply in 0..1u64 << other {
                            if !self.forall_wins(&p.after(&choice, reply)?, n - 1)? {
                                forced = false;
                                break;
                            }
                        }
                        if forced {
                            won = true;
                            break 'choices;
                        }
                    }
                }
            }
        }
        self.memo.insert(key, won);
        Ok(won)
    }
}

/// Winner of the `n`-round game with `c` colours, from the initial position.
pub fn solve_bounded(
    g: &BinaryStructure,
    h: &BinaryStructure,
    c: usize,
    n: usize,
    variant: Variant,
) -> Result<Winner> {
    Game::new(g, h, c, variant, DEFAULT_BIT_CAP)?;
    let mut b = Bounded {
        g,
        h,
        variant,
        memo: HashMap::new(),
    };
    let p = Position::initial(g.size(), h.size(), c);
    Ok(if b.forall_wins(&p, n)? { Winner::Forall } else { Winner::Exists })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seurat::solve;
    use crate::structures::Digraph;
    use proptest::prelude::*;

    #[test]
    fn one_colour_separates_one_node_from_two() {
        let one = Digraph::empty(1).unwrap().to_structure();
        let two = Digraph::empty(2).unwrap().to_structure();
        assert_eq!(solve_bounded(&one, &two, 1, 0, Variant::Standard).unwrap(), Winner::Exists);
        assert_eq!(solve_bounded(&one, &two, 1, 1, Variant::Standard).unwrap(), Winner::Forall);
        // without colours there are no moves
        assert_eq!(solve_bounded(&one, &two, 0, 4, Variant::Standard).unwrap(), Winner::Exists);
    }

    fn digraph(n: usize) -> impl Strategy<Value = Digraph> {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |cells| {
            let edges: Vec<_> = (0..n * n).filter(|&k| cells[k]).map(|k| (k / n, k % n)).collect();
            Digraph::from_edges(n, edges).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn layers_agree_with_the_reference(
            g in (1usize..3).prop_flat_map(digraph),
            h in (1usize..3).prop_flat_map(digraph),
            c in 0usize..3,
            modified in any::<bool>(),
        ) {
            let variant = if modified { Variant::Modified } else { Variant::Standard };
            let (gs, hs) = (g.to_structure(), h.to_structure());
            let solved = solve(&gs, &hs, c, variant).unwrap();
            for n in 0..4 {
                let reference = solve_bounded(&gs, &hs, c, n, variant).unwrap();
                prop_assert_eq!(solved.exists_survives(n), reference == Winner::Exists, "n={}", n);
            }
        }
    }
}
