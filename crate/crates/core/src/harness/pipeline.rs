//! Every check that bears on one pair, in one report.

use serde::Serialize;

use super::PairConditions;
use crate::error::{Error, Result};
use crate::pebble::{play_transfer, Transfer, TransferAdversary, TransferChecks, TransferReport};
use crate::rainbow::build_rainbow;
use crate::repgame::{play_game, Adversary};
use crate::seurat::{solve_with_cap, SolveSummary, Variant, Winner, DEFAULT_BIT_CAP};
use crate::structures::{
    canonical_code, check_rainbow_condition, check_theorem42_conditions, Digraph, RainbowConditionReport,
    Theorem42Report,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Pebbles; the colouring game is played with three more colours.
    pub c: usize,
    pub bit_cap: usize,
    pub seed: u64,
    pub transfer_plays: u64,
    pub transfer_rounds: usize,
    pub lemma_depth: usize,
    pub rep_plays: u64,
    pub rep_rounds: usize,
}

impl PipelineOptions {
    pub fn new(c: usize) -> Self {
        Self {
            c,
            bit_cap: DEFAULT_BIT_CAP,
            seed: 0,
            transfer_plays: 20,
            transfer_rounds: 3,
            lemma_depth: 1,
            rep_plays: 20,
            rep_rounds: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeuratStage {
    /// Isomorphic structures: copying ∀'s moves along an isomorphism wins for ∃.
    Mirror,
    Solved(SolveSummary),
    CapExceeded { message: String },
}

impl SeuratStage {
    pub fn exists_wins(&self) -> Option<bool> {
        match self {
            SeuratStage::Mirror => Some(true),
            SeuratStage::Solved(s) => Some(s.winner == Winner::Exists),
            SeuratStage::CapExceeded { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransferStage {
    /// No solved ∃ win to transfer.
    NotRun { reason: String },
    Played(TransferReport),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepGameSpotCheck {
    pub plays: u64,
    pub rounds: usize,
    pub survived: u64,
    /// Seed of the first play ∃'s strategy lost.
    pub first_failure_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub c: usize,
    pub isomorphic: bool,
    pub rainbow_gh: RainbowConditionReport,
    pub rainbow_hh: RainbowConditionReport,
    pub hom_conditions: Theorem42Report,
    pub conditions: PairConditions,
    pub seurat: SeuratStage,
    pub transfer: TransferStage,
    pub rep_game_hh: RepGameSpotCheck,
    /// ∃ wins the unbounded colouring game with `c + 3` colours; `None` when
    /// the solver hit its cap.
    pub hypothesis_game: Option<bool>,
    pub hypothesis_target_homs_extend: bool,
    pub hypothesis_non_extending_pair: bool,
    /// All three hypotheses hold on a non-isomorphic pair.
    pub finding: bool,
}

impl PipelineReport {
    /// The hypotheses (by position: game, target extension, non-extending
    /// pair) that are known to hold.
    pub fn satisfied(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.hypothesis_game == Some(true) {
            out.push("game");
        }
        if self.hypothesis_target_homs_extend {
            out.push("target-extension");
        }
        if self.hypothesis_non_extending_pair {
            out.push("non-extending-pair");
        }
        out
    }
}

fn spot_check_rep_game(h: &Digraph, opts: &PipelineOptions) -> Result<RepGameSpotCheck> {
    let hs = h.to_structure();
    let r = build_rainbow(&hs, &hs)?;
    let mut check = RepGameSpotCheck {
        plays: opts.rep_plays,
        rounds: opts.rep_rounds,
        survived: 0,
        first_failure_seed: None,
    };
    for k in 0..opts.rep_plays {
        let seed = opts.seed.wrapping_add(k);
        if play_game(&r, opts.rep_rounds, Adversary::Random { seed })?.survived {
            check.survived += 1;
        } else if check.first_failure_seed.is_none() {
            check.first_failure_seed = Some(seed);
        }
    }
    Ok(check)
}

/// Runs the structural checks, the colouring game with `c + 3` colours, the
/// strategy transfer into the pebble game between `B_{G,H}` and `B_{H,H}`
/// when the colouring game is a solved ∃ win, and random representation-game
/// plays on `B_{H,H}`.
pub fn pipeline_check(g: &Digraph, h: &Digraph, opts: &PipelineOptions) -> Result<PipelineReport> {
    let (gs, hs) = (g.to_structure(), h.to_structure());
    let isomorphic = g.size() == h.size() && canonical_code(g) == canonical_code(h);
    let hom_conditions = check_theorem42_conditions(&gs, &hs);
    let colours = opts.c + 3;

    let solved = match solve_with_cap(&gs, &hs, colours, Variant::Standard, opts.bit_cap) {
        Ok(s) => Some(s),
        Err(Error::CapExceeded { .. }) if isomorphic => None,
        Err(e @ Error::CapExceeded { .. }) => {
            return finish(g, h, opts, isomorphic, hom_conditions, cap_stage(e), None);
        }
        Err(e) => return Err(e),
    };
    let seurat = match &solved {
        Some(s) => SeuratStage::Solved(s.summary()),
        None => SeuratStage::Mirror,
    };

    let transfer = match &solved {
        Some(s) if s.winner == Winner::Exists => {
            let a = build_rainbow(&gs, &hs)?;
            let b = build_rainbow(&hs, &hs)?;
            let tr = Transfer::new(&a, &b, s, opts.c)?;
            let report = play_transfer(
                &tr,
                opts.transfer_rounds,
                TransferAdversary::Random {
                    seed: opts.seed,
                    plays: opts.transfer_plays,
                },
                TransferChecks {
                    lemma_depth: opts.lemma_depth,
                    probe_depth: None,
                },
            )?;
            Some(report)
        }
        _ => None,
    };
    finish(g, h, opts, isomorphic, hom_conditions, seurat, transfer)
}

fn cap_stage(e: Error) -> SeuratStage {
    SeuratStage::CapExceeded { message: e.to_string() }
}

fn finish(
    g: &Digraph,
    h: &Digraph,
    opts: &PipelineOptions,
    isomorphic: bool,
    hom_conditions: Theorem42Report,
    seurat: SeuratStage,
    transfer: Option<TransferReport>,
) -> Result<PipelineReport> {
    let (gs, hs) = (g.to_structure(), h.to_structure());
    let transfer = match transfer {
        Some(t) => TransferStage::Played(t),
        None => TransferStage::NotRun {
            reason: match &seurat {
                SeuratStage::Mirror => "game decided by isomorphism; no solved strategy".into(),
                SeuratStage::CapExceeded { .. } => "colouring game not solved".into(),
                SeuratStage::Solved(_) => "∀ wins the colouring game".into(),
            },
        },
    };
    let hypothesis_game = seurat.exists_wins();
    let report = PipelineReport {
        c: opts.c,
        isomorphic,
        rainbow_gh: check_rainbow_condition(&gs, &hs),
        rainbow_hh: check_rainbow_condition(&hs, &hs),
        conditions: PairConditions::of(g, h),
        rep_game_hh: spot_check_rep_game(h, opts)?,
        hypothesis_game,
        hypothesis_target_homs_extend: hom_conditions.condition2,
        hypothesis_non_extending_pair: hom_conditions.condition3,
        finding: !isomorphic && hypothesis_game == Some(true) && hom_conditions.condition2 && hom_conditions.condition3,
        hom_conditions,
        seurat,
        transfer,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::examples::{loopless_point, single_arc};

    #[test]
    fn four_cycle_against_itself() {
        let c4 = Digraph::cycle(4).unwrap();
        let report = pipeline_check(&c4, &c4, &PipelineOptions::new(2)).unwrap();
        assert!(report.isomorphic);
        assert_eq!(report.hypothesis_game, Some(true));
        assert!(report.conditions.forward.target_embeddings_extend);
        // {0 -> 0, 2 -> 1} is a partial homomorphism, but node 1 would need a
        // common neighbour of 0 and 1
        assert!(!report.hypothesis_target_homs_extend);
        assert!(!report.finding);
        assert_eq!(report.rep_game_hh.survived, report.rep_game_hh.plays);
    }

    #[test]
    fn arc_against_a_point() {
        let report = pipeline_check(&single_arc(), &loopless_point(), &PipelineOptions::new(2)).unwrap();
        assert!(!report.isomorphic);
        assert!(!report.rainbow_gh.holds);
        assert!(matches!(&report.seurat, SeuratStage::Solved(s) if s.winner == Winner::Forall));
        assert_eq!(report.hypothesis_game, Some(false));
        assert!(matches!(report.transfer, TransferStage::NotRun { .. }));
        assert!(!report.finding);
    }

    #[test]
    fn solved_exists_wins_are_transferred() {
        let p = Digraph::from_edges(1, [(0, 0)]).unwrap();
        let report = pipeline_check(&p, &p, &PipelineOptions::new(1)).unwrap();
        match &report.transfer {
            TransferStage::Played(t) => assert!(t.clean(), "{t:?}"),
            other => panic!("{other:?}"),
        }
        assert_eq!(report.satisfied(), vec!["game", "target-extension"]);
    }

    #[test]
    fn empty_single_nodes_are_isomorphic() {
        let e = Digraph::empty(1).unwrap();
        let report = pipeline_check(&e, &e, &PipelineOptions::new(0)).unwrap();
        assert!(report.isomorphic);
        assert!(!report.finding);
    }
}
