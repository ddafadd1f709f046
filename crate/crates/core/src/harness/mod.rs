//! Batch drivers: the hunt over small digraph pairs and the per-pair
//! condition pipeline.
//!
//! Hunt records are appended to a line-delimited JSON log. A run that finds
//! an existing log skips every pair already recorded there, so an interrupted
//! hunt resumes where it stopped.

mod pipeline;

pub use pipeline::{pipeline_check, PipelineOptions, PipelineReport, RepGameSpotCheck, SeuratStage, TransferStage};

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seurat::{solve_bounded, solve_with_cap, SolveSummary, Variant, Winner, DEFAULT_BIT_CAP};
use crate::structures::{
    canonical_code, check_corollary43_conditions, check_theorem42_conditions, enumerate_digraphs, Digraph,
    DEFAULT_ENUMERATION_CAP,
};

/// A digraph named by its node count and canonical code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphCode {
    pub nodes: usize,
    pub code: u64,
}

impl GraphCode {
    pub fn of(g: &Digraph) -> Self {
        Self {
            nodes: g.size(),
            code: canonical_code(g),
        }
    }

    /// Rebuilds the canonical digraph (row-major code, most significant bit first).
    pub fn digraph(&self) -> Result<Digraph> {
        let n = self.nodes;
        if n * n > 64 || (n * n < 64 && self.code >> (n * n) != 0) {
            return Err(Error::Input(format!("code {} does not fit {n} nodes", self.code)));
        }
        let edges = (0..n * n)
            .filter(|k| self.code >> (n * n - 1 - k) & 1 == 1)
            .map(|k| (k / n, k % n));
        Digraph::from_edges(n, edges)
    }
}

/// Structural conditions with one digraph as source and the other as target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationFlags {
    /// Every size-two partial homomorphism of the target into itself extends.
    pub target_homs_extend: bool,
    /// Some size-two partial homomorphism from source to target does not extend.
    pub non_extending_pair: bool,
    /// Every size-two partial embedding of the target into itself extends to
    /// an automorphism.
    pub target_embeddings_extend: bool,
    /// The source does not embed in the target.
    pub no_embedding: bool,
}

impl OrientationFlags {
    pub fn of(source: &Digraph, target: &Digraph) -> Self {
        let hom = check_theorem42_conditions(&source.to_structure(), &target.to_structure());
        let emb = check_corollary43_conditions(source, target);
        Self {
            target_homs_extend: hom.condition2,
            non_extending_pair: hom.condition3,
            target_embeddings_extend: emb.embeddings_extend,
            no_embedding: emb.no_embedding,
        }
    }

    /// The digraph-level structural conditions (automorphism extension and
    /// no embedding) both hold.
    pub fn digraph_conditions(&self) -> bool {
        self.target_embeddings_extend && self.no_embedding
    }

    /// The binary-structure-level conditions both hold.
    pub fn structure_conditions(&self) -> bool {
        self.target_homs_extend && self.non_extending_pair
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairConditions {
    /// `g` as source, `h` as target.
    pub forward: OrientationFlags,
    /// `h` as source, `g` as target.
    pub backward: OrientationFlags,
}

impl PairConditions {
    pub fn of(g: &Digraph, h: &Digraph) -> Self {
        Self {
            forward: OrientationFlags::of(g, h),
            backward: OrientationFlags::of(h, g),
        }
    }

    pub fn digraph_conditions(&self) -> bool {
        self.forward.digraph_conditions() || self.backward.digraph_conditions()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HuntFilter {
    /// Solve every pair.
    None,
    /// Solve only pairs where some orientation has target automorphisms
    /// extending partial embeddings and no embedding of the source.
    DigraphConditions,
}

/// One line of the hunt log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuntRecord {
    pub g: GraphCode,
    pub h: GraphCode,
    pub c: usize,
    pub variant: Variant,
    pub conditions: PairConditions,
    /// Solver outcome; absent when the pair was filtered or capped.
    pub outcome: Option<SolveSummary>,
    /// Why the pair was not solved.
    pub skipped: Option<String>,
    /// ∃ wins on a non-isomorphic pair.
    pub finding: bool,
    /// Bounded-solver confirmation of a finding.
    pub verified: Option<bool>,
    pub wall_ms: u64,
    pub version: String,
}

impl HuntRecord {
    fn key(&self) -> RecordKey {
        (self.g, self.h, self.c, self.variant)
    }
}

type RecordKey = (GraphCode, GraphCode, usize, Variant);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuntConfig {
    /// Largest node count on either side.
    pub n_max: usize,
    /// Colours in the colouring game.
    pub colours: usize,
    pub variant: Variant,
    /// Include digraphs with loops.
    pub loops: bool,
    pub filter: HuntFilter,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Pairs solved between log flushes.
    pub chunk: usize,
    /// Append-only record log; `None` keeps records in memory only.
    pub log: Option<PathBuf>,
    pub bit_cap: usize,
}

impl HuntConfig {
    pub fn new(n_max: usize, colours: usize, variant: Variant) -> Self {
        Self {
            n_max,
            colours,
            variant,
            loops: true,
            filter: HuntFilter::None,
            threads: None,
            chunk: 256,
            log: None,
            bit_cap: DEFAULT_BIT_CAP,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HuntSummary {
    pub pairs: u64,
    /// Records taken from an existing log rather than recomputed.
    pub resumed: u64,
    pub solved: u64,
    pub filtered: u64,
    pub capped: u64,
    pub exists_wins: u64,
    pub forall_wins: u64,
    pub findings: Vec<HuntRecord>,
    pub wall_ms: u64,
}

impl HuntSummary {
    fn add(&mut self, r: &HuntRecord) {
        self.pairs += 1;
        match (&r.outcome, &r.skipped) {
            (Some(o), _) => {
                self.solved += 1;
                match o.winner {
                    Winner::Exists => self.exists_wins += 1,
                    Winner::Forall => self.forall_wins += 1,
                }
            }
            (None, Some(reason)) if reason.starts_with(CAPPED) => self.capped += 1,
            _ => self.filtered += 1,
        }
        if r.finding {
            self.findings.push(r.clone());
        }
    }

    /// Some pair could not be solved within the caps.
    pub fn inconclusive(&self) -> bool {
        self.capped > 0
    }
}

const CAPPED: &str = "cap exceeded";

/// Unordered pairs of distinct canonical digraphs with 1 to `n_max` nodes,
/// ordered by total size and then by codes.
pub fn hunt_pairs(n_max: usize, loops: bool) -> Result<Vec<(Digraph, Digraph)>> {
    if n_max > DEFAULT_ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "hunt node count",
            value: n_max,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let mut graphs = Vec::new();
    for n in 1..=n_max {
        for g in enumerate_digraphs(n, loops, DEFAULT_ENUMERATION_CAP)? {
            graphs.push((GraphCode::of(&g), g));
        }
    }
    graphs.sort();
    let mut pairs = Vec::new();
    for (i, (ci, gi)) in graphs.iter().enumerate() {
        for (cj, gj) in &graphs[i + 1..] {
            pairs.push((ci.nodes + cj.nodes, *ci, *cj, gi.clone(), gj.clone()));
        }
    }
    pairs.sort_by(|x, y| (x.0, x.1, x.2).cmp(&(y.0, y.1, y.2)));
    Ok(pairs.into_iter().map(|(_, _, _, g, h)| (g, h)).collect())
}

/// Builds the record for one pair.
pub fn hunt_record(g: &Digraph, h: &Digraph, config: &HuntConfig) -> Result<HuntRecord> {
    let start = Instant::now();
    let conditions = PairConditions::of(g, h);
    let mut record = HuntRecord {
        g: GraphCode::of(g),
        h: GraphCode::of(h),
        c: config.colours,
        variant: config.variant,
        conditions,
        outcome: None,
        skipped: None,
        finding: false,
        verified: None,
        wall_ms: 0,
        version: crate::VERSION.to_string(),
    };
    if config.filter == HuntFilter::DigraphConditions && !conditions.digraph_conditions() {
        let reason = if !conditions.forward.no_embedding || !conditions.backward.no_embedding {
            "filtered: one digraph embeds in the other"
        } else {
            "filtered: partial embeddings of the target do not extend"
        };
        record.skipped = Some(reason.to_string());
        return Ok(record);
    }
    let (gs, hs) = (g.to_structure(), h.to_structure());
    match solve_with_cap(&gs, &hs, config.colours, config.variant, config.bit_cap) {
        Ok(solved) => {
            if solved.winner == Winner::Exists && record.g != record.h {
                record.finding = true;
                let n = solved.iterations + 1;
                let bounded = solve_bounded(&gs, &hs, config.colours, n, config.variant)?;
                record.verified = Some(bounded == Winner::Exists);
            }
            record.outcome = Some(solved.summary());
        }
        Err(e @ Error::CapExceeded { .. }) => record.skipped = Some(format!("{CAPPED}: {e}")),
        Err(e) => return Err(e),
    }
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

/// Reads the complete records of an existing log, truncating a partial last
/// line left by an interrupted write.
pub fn read_log(path: &std::path::Path) -> Result<Vec<HuntRecord>> {
    let mut text = String::new();
    match File::open(path) {
        Ok(mut f) => {
            f.read_to_string(&mut text)?;
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    }
    let complete = text.rfind('\n').map_or(0, |i| i + 1);
    if complete < text.len() {
        OpenOptions::new().write(true).open(path)?.set_len(complete as u64)?;
    }
    text[..complete]
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Runs the hunt, calling `sink` on every record in pair order (resumed ones
/// included).
pub fn hunt_with(config: &HuntConfig, mut sink: impl FnMut(&HuntRecord) -> Result<()>) -> Result<HuntSummary> {
    let start = Instant::now();
    let pairs = hunt_pairs(config.n_max, config.loops)?;
    let mut known: std::collections::HashMap<RecordKey, HuntRecord> = std::collections::HashMap::new();
    let mut writer = match &config.log {
        Some(path) => {
            for r in read_log(path)? {
                known.insert(r.key(), r);
            }
            let file = OpenOptions::new().create(true).append(true).open(path)?;
            Some(BufWriter::new(file))
        }
        None => None,
    };
    let pool = match config.threads {
        Some(t) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Input(format!("thread pool: {e}")))?,
        ),
        None => None,
    };
    let mut summary = HuntSummary::default();
    for chunk in pairs.chunks(config.chunk.max(1)) {
        let key_of = |g: &Digraph, h: &Digraph| (GraphCode::of(g), GraphCode::of(h), config.colours, config.variant);
        let todo: Vec<&(Digraph, Digraph)> = chunk.iter().filter(|(g, h)| !known.contains_key(&key_of(g, h))).collect();
        let run = || todo.par_iter().map(|(g, h)| hunt_record(g, h, config)).collect::<Result<Vec<_>>>();
        let fresh = match &pool {
            Some(p) => p.install(run)?,
            None => run()?,
        };
        if let Some(w) = writer.as_mut() {
            for r in &fresh {
                serde_json::to_writer(&mut *w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        let mut fresh = fresh.into_iter();
        for (g, h) in chunk {
            let r = match known.get(&key_of(g, h)) {
                Some(r) => {
                    summary.resumed += 1;
                    r.clone()
                }
                None => fresh.next().expect("one fresh record per unrecorded pair"),
            };
            summary.add(&r);
            sink(&r)?;
        }
    }
    summary.wall_ms = start.elapsed().as_millis() as u64;
    Ok(summary)
}

pub fn hunt(config: &HuntConfig) -> Result<HuntSummary> {
    hunt_with(config, |_| Ok(()))
}
