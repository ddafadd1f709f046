mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use input::{parse_algebra, parse_input, parse_map, STRUCTURE_HELP};
use rra_core::harness::{hunt_with, pipeline_check, HuntConfig, HuntFilter, PipelineOptions, SeuratStage};
use rra_core::pebble::{
    play_transfer, sample_formula_agreement, solve_bounded_pebble_with_budget, PebbleWinner, Transfer,
    TransferAdversary, TransferChecks,
};
use rra_core::ra::{check_ra_axioms, AtomStructureDump, DEFAULT_AXIOM_CAP};
use rra_core::rainbow::build_rainbow;
use rra_core::repgame::{play_game, search_forall_win_with, Adversary, SearchLimits, SearchOutcome};
use rra_core::seurat::{solve_bounded, solve_with_cap, Variant, Winner, DEFAULT_BIT_CAP};
use rra_core::structures::{extend_to_homomorphism, is_partial_homomorphism};

const CACHE_ENV: &str = "RRA_CACHE_DIR";

#[derive(Parser)]
#[command(name = "rra", version, about = "Rainbow relation algebras and their games", after_help = STRUCTURE_HELP)]
struct Cli {
    /// Worker threads for parallel commands.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for persistent results such as hunt logs.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    Modified,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Standard => Variant::Standard,
            VariantArg::Modified => Variant::Modified,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the set-colouring game on two structures.
    SolveSeurat {
        g: String,
        h: String,
        #[arg(short, long)]
        colours: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
        variant: VariantArg,
        /// Also solve the game with this many rounds using the reference solver.
        #[arg(long)]
        rounds: Option<usize>,
        /// Play on the edge / non-edge / non-equality encodings of two digraphs.
        #[arg(long)]
        three_predicates: bool,
        #[arg(long, default_value_t = DEFAULT_BIT_CAP)]
        bit_cap: usize,
    },
    /// Print the rainbow atom structure of `(G, H)`.
    BuildRainbow {
        g: String,
        h: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check the relation algebra axioms of an atom structure (dump file or `G+H`).
    CheckRa {
        algebra: String,
        #[arg(long, default_value_t = DEFAULT_AXIOM_CAP)]
        cap: usize,
    },
    /// Play ∃'s rainbow strategy in the representation game, or search for a ∀ win.
    RepGame {
        g: String,
        h: String,
        #[arg(short, long, default_value_t = 4)]
        rounds: usize,
        #[arg(long, value_enum, default_value_t = RepMode::Exhaustive)]
        mode: RepMode,
        /// Position budget (exhaustive play and search).
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// The pebble game on two finite relation algebras.
    Pebble {
        #[command(subcommand)]
        command: PebbleCommand,
    },
    /// Run every condition check on a pair of digraphs.
    CheckConditions {
        g: String,
        h: String,
        /// Pebbles; the colouring game gets three more colours.
        #[arg(short, default_value_t = 2)]
        c: usize,
        #[arg(long, default_value_t = DEFAULT_BIT_CAP)]
        bit_cap: usize,
    },
    /// Solve the colouring game on every pair of small non-isomorphic digraphs.
    Hunt(HuntArgs),
    /// Extend a partial map `G -> H` to a homomorphism.
    HomExt {
        g: String,
        h: String,
        /// Pairs `source:target`, comma separated.
        #[arg(long)]
        map: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RepMode {
    Exhaustive,
    Random,
    Search,
}

#[derive(Subcommand)]
enum PebbleCommand {
    /// Exhaustive bounded solve (algebras as dump files or `G+H`).
    Solve {
        a: String,
        b: String,
        #[arg(short, default_value_t = 2)]
        c: usize,
        #[arg(short, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 5_000_000)]
        budget: u64,
    },
    /// Play B_{G,H} against B_{H,H} with the strategy transferred from the
    /// colouring game, checking every position.
    Transfer {
        g: String,
        h: String,
        #[arg(short, default_value_t = 2)]
        c: usize,
        #[arg(short, long, default_value_t = 3)]
        rounds: usize,
        /// Number of random plays; exhaustive when absent.
        #[arg(long)]
        plays: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 2)]
        lemma_depth: usize,
        #[arg(long)]
        probe_depth: Option<usize>,
    },
    /// Sample sentences and compare their truth in both algebras.
    Formulas {
        a: String,
        b: String,
        #[arg(short, default_value_t = 2)]
        c: usize,
        #[arg(short, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Args)]
struct HuntArgs {
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    /// Colours in the colouring game.
    #[arg(short, long, default_value_t = 2)]
    colours: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Modified)]
    variant: VariantArg,
    /// Restrict to loopless digraphs.
    #[arg(long)]
    no_loops: bool,
    /// Only solve pairs meeting the digraph conditions in some orientation.
    #[arg(long)]
    filter: bool,
    /// Record log; defaults to a file in the cache directory when one is set.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Print every record, not just the summary.
    #[arg(long)]
    records: bool,
    #[arg(long, default_value_t = DEFAULT_BIT_CAP)]
    bit_cap: usize,
}

/// Marks a run whose answer is incomplete because a cap or budget was hit.
#[derive(Debug)]
struct Inconclusive;

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    let out = match format {
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
        Format::Text => text(),
    };
    write_stdout(&out)
}

/// Writes to stdout, treating a closed pipe as success.
fn write_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn run(cli: &Cli) -> Result<Option<Inconclusive>> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let fmt = cli.format;
    match &cli.command {
        Command::SolveSeurat {
            g,
            h,
            colours,
            variant,
            rounds,
            three_predicates,
            bit_cap,
        } => {
            let (gi, hi) = (parse_input(g)?, parse_input(h)?);
            let (gs, hs) = if *three_predicates {
                (gi.digraph()?.to_three_predicates(), hi.digraph()?.to_three_predicates())
            } else {
                (gi.structure(), hi.structure())
            };
            let variant = Variant::from(*variant);
            let solved = match solve_with_cap(&gs, &hs, *colours, variant, *bit_cap) {
                Err(e @ rra_core::Error::CapExceeded { .. }) => {
                    eprintln!("{e}");
                    return Ok(Some(Inconclusive));
                }
                other => other?,
            };
            let bounded = match rounds {
                Some(n) => Some(solve_bounded(&gs, &hs, *colours, *n, variant)?),
                None => None,
            };
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                summary: rra_core::seurat::SolveSummary,
                bounded: Option<(usize, Winner)>,
            }
            let out = Out {
                summary: solved.summary(),
                bounded: rounds.zip(bounded),
            };
            emit(fmt, &out, || {
                let mut s = format!(
                    "winner: {:?}\nrounds to win: {}\nsafe positions: {}\niterations: {}\n",
                    out.summary.winner,
                    out.summary.rounds_to_win.map_or("-".into(), |r| r.to_string()),
                    out.summary.safe_set_size,
                    out.summary.iterations
                );
                if let Some((n, w)) = out.bounded {
                    s.push_str(&format!("{n}-round winner: {w:?}\n"));
                }
                s
            })?;
        }
        Command::BuildRainbow { g, h, out } => {
            let r = build_rainbow(&parse_input(g)?.structure(), &parse_input(h)?.structure())?;
            let dump = AtomStructureDump::from(r.atoms());
            let text = dump.to_text();
            match out {
                Some(path) => {
                    std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
                    eprintln!("{} atoms written to {}", r.atom_count(), path.display());
                }
                None => write_stdout(&text)?,
            }
        }
        Command::CheckRa { algebra, cap } => {
            let alg = parse_algebra(algebra)?;
            let report = check_ra_axioms(alg.atoms(), *cap)?;
            emit(fmt, &report, || {
                if report.passed() {
                    "all axioms hold\n".to_string()
                } else {
                    let mut s = format!("{} failures\n", report.failures.len());
                    for f in report.failures.iter().take(20) {
                        s.push_str(&format!("  {f:?}\n"));
                    }
                    s
                }
            })?;
        }
        Command::RepGame {
            g,
            h,
            rounds,
            mode,
            budget,
        } => {
            let r = build_rainbow(&parse_input(g)?.structure(), &parse_input(h)?.structure())?;
            match mode {
                RepMode::Search => {
                    let out = search_forall_win_with(
                        &r,
                        SearchLimits {
                            max_depth: *rounds,
                            max_positions: *budget,
                        },
                    )?;
                    emit(fmt, &out, || match &out {
                        SearchOutcome::Win {
                            depth,
                            opening,
                            tree,
                            positions,
                        } => format!(
                            "∀ wins within {depth} moves after opening with {} (tree size {}, {positions} positions)\n",
                            r.atoms().label(*opening),
                            tree.size()
                        ),
                        SearchOutcome::NoWin { depth, positions } => {
                            format!("no ∀ win within {depth} moves ({positions} positions)\n")
                        }
                        SearchOutcome::Inconclusive { positions } => {
                            format!("inconclusive after {positions} positions\n")
                        }
                    })?;
                    if matches!(out, SearchOutcome::Inconclusive { .. }) {
                        return Ok(Some(Inconclusive));
                    }
                }
                RepMode::Exhaustive | RepMode::Random => {
                    let adversary = match mode {
                        RepMode::Random => Adversary::Random { seed: cli.seed },
                        _ => Adversary::Exhaustive { max_positions: *budget },
                    };
                    let out = play_game(&r, *rounds, adversary)?;
                    emit(fmt, &out, || {
                        let mut s = format!(
                            "survived: {}\npositions: {}\nliteral H2 violations: {}\n",
                            out.survived, out.positions, out.literal_h2_violations
                        );
                        if out.inconclusive {
                            s.push_str("budget exhausted\n");
                        }
                        if let Some(f) = out.trace.last().and_then(|t| t.failure.as_ref()) {
                            s.push_str(&format!("failure: {f:?}\n"));
                        }
                        s
                    })?;
                    if out.inconclusive {
                        return Ok(Some(Inconclusive));
                    }
                }
            }
        }
        Command::Pebble { command } => return run_pebble(cli, command),
        Command::CheckConditions { g, h, c, bit_cap } => {
            let (gi, hi) = (parse_input(g)?, parse_input(h)?);
            let mut opts = PipelineOptions::new(*c);
            opts.seed = cli.seed;
            opts.bit_cap = *bit_cap;
            let report = pipeline_check(gi.digraph()?, hi.digraph()?, &opts)?;
            emit(fmt, &report, || {
                let game = match &report.seurat {
                    SeuratStage::Mirror => "∃ wins (isomorphic)".to_string(),
                    SeuratStage::Solved(s) => format!("{:?} wins", s.winner),
                    SeuratStage::CapExceeded { message } => format!("not solved: {message}"),
                };
                format!(
                    "isomorphic: {}\nrainbow condition (G,H): {}\nrainbow condition (H,H): {}\n\
                     colouring game with {} colours: {game}\n\
                     partial embeddings of H extend: {}\nno embedding G -> H: {}\n\
                     representation game on B(H,H): {}/{} random plays survived\n\
                     hypotheses satisfied: {}\nfinding: {}\n",
                    report.isomorphic,
                    report.rainbow_gh.holds,
                    report.rainbow_hh.holds,
                    c + 3,
                    report.conditions.forward.target_embeddings_extend,
                    report.conditions.forward.no_embedding,
                    report.rep_game_hh.survived,
                    report.rep_game_hh.plays,
                    report.satisfied().join(", "),
                    report.finding
                )
            })?;
            if report.hypothesis_game.is_none() {
                return Ok(Some(Inconclusive));
            }
        }
        Command::Hunt(args) => return run_hunt(cli, args),
        Command::HomExt { g, h, map } => {
            let (gs, hs) = (parse_input(g)?.structure(), parse_input(h)?.structure());
            let p = parse_map(map)?;
            if !is_partial_homomorphism(&p, &gs, &hs)? {
                bail!(rra_core::Error::Input("the map is not a partial homomorphism".into()));
            }
            let ext = extend_to_homomorphism(&p, &gs, &hs)?;
            emit(fmt, &ext, || match &ext {
                Some(m) => format!("extension: {m:?}\n"),
                None => "no extension\n".to_string(),
            })?;
        }
    }
    Ok(None)
}

fn run_pebble(cli: &Cli, command: &PebbleCommand) -> Result<Option<Inconclusive>> {
    let fmt = cli.format;
    match command {
        PebbleCommand::Solve { a, b, c, n, budget } => {
            let (a, b) = (parse_algebra(a)?, parse_algebra(b)?);
            let out = solve_bounded_pebble_with_budget(a.atoms(), b.atoms(), *c, *n, *budget)?;
            emit(fmt, &out, || format!("winner: {:?}\npositions: {}\n", out.winner, out.positions))?;
            if out.winner == PebbleWinner::Inconclusive {
                return Ok(Some(Inconclusive));
            }
        }
        PebbleCommand::Transfer {
            g,
            h,
            c,
            rounds,
            plays,
            budget,
            lemma_depth,
            probe_depth,
        } => {
            let (gs, hs) = (parse_input(g)?.structure(), parse_input(h)?.structure());
            let solved = solve_with_cap(&gs, &hs, c + 3, Variant::Standard, DEFAULT_BIT_CAP)?;
            if solved.winner != Winner::Exists {
                bail!(rra_core::Error::Precondition(format!(
                    "∀ wins the colouring game with {} colours; there is no strategy to transfer",
                    c + 3
                )));
            }
            let a = build_rainbow(&gs, &hs)?;
            let b = build_rainbow(&hs, &hs)?;
            let tr = Transfer::new(&a, &b, &solved, *c)?;
            let adversary = match plays {
                Some(p) => TransferAdversary::Random {
                    seed: cli.seed,
                    plays: *p,
                },
                None => TransferAdversary::Exhaustive { max_states: *budget },
            };
            let checks = TransferChecks {
                lemma_depth: *lemma_depth,
                probe_depth: *probe_depth,
            };
            let report = play_transfer(&tr, *rounds, adversary, checks)?;
            emit(fmt, &report, || {
                format!(
                    "states: {}\ncomplete: {}\ninduced map failures: {}\ntransfer failures: {}\n\
                     term violations: {}\nprobe violations: {}\n{}",
                    report.states,
                    report.complete,
                    report.iso_failures,
                    report.transfer_failures,
                    report.lemma_violations,
                    report.probe_violations,
                    report
                        .first_failure
                        .as_ref()
                        .map_or(String::new(), |f| format!("first failure: {f}\n"))
                )
            })?;
            if plays.is_none() && !report.complete {
                return Ok(Some(Inconclusive));
            }
        }
        PebbleCommand::Formulas { a, b, c, n, samples } => {
            let (a, b) = (parse_algebra(a)?, parse_algebra(b)?);
            let report = sample_formula_agreement(a.atoms(), b.atoms(), *c, *n, *samples, cli.seed)?;
            emit(fmt, &report, || {
                let mut s = format!(
                    "agreed: {}/{}\ntrue in both: {}\n",
                    report.agreed, report.samples, report.true_in_both
                );
                for d in report.disagreements.iter().take(10) {
                    s.push_str(&format!("  disagrees: {d}\n"));
                }
                s
            })?;
        }
    }
    Ok(None)
}

fn run_hunt(cli: &Cli, args: &HuntArgs) -> Result<Option<Inconclusive>> {
    let variant = Variant::from(args.variant);
    let mut config = HuntConfig::new(args.n_max, args.colours, variant);
    config.loops = !args.no_loops;
    config.filter = if args.filter {
        HuntFilter::DigraphConditions
    } else {
        HuntFilter::None
    };
    config.threads = cli.threads;
    config.bit_cap = args.bit_cap;
    config.log = match (&args.log, &cli.cache) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let name = format!(
                "hunt-n{}-c{}-{}{}{}.jsonl",
                args.n_max,
                args.colours,
                match variant {
                    Variant::Standard => "standard",
                    Variant::Modified => "modified",
                },
                if args.no_loops { "-loopless" } else { "" },
                if args.filter { "-filtered" } else { "" },
            );
            Some(dir.join(name))
        }
        (None, None) => None,
    };
    let summary = hunt_with(&config, |r| {
        if args.records {
            write_stdout(&(serde_json::to_string(r)? + "\n")).map_err(|e| rra_core::Error::Io(e.to_string()))?;
        }
        Ok(())
    })?;
    emit(cli.format, &summary, || {
        let mut s = format!(
            "pairs: {}\nresumed from log: {}\nsolved: {} (∃ {}, ∀ {})\nfiltered: {}\ncapped: {}\nfindings: {}\nwall time: {} ms\n",
            summary.pairs,
            summary.resumed,
            summary.solved,
            summary.exists_wins,
            summary.forall_wins,
            summary.filtered,
            summary.capped,
            summary.findings.len(),
            summary.wall_ms
        );
        for f in &summary.findings {
            s.push_str(&format!(
                "  FINDING {:?} vs {:?} (bounded check: {:?})\n",
                f.g, f.h, f.verified
            ));
        }
        if let Some(log) = &config.log {
            s.push_str(&format!("log: {}\n", log.display()));
        }
        s
    })?;
    Ok(summary.inconclusive().then_some(Inconclusive))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use rra_core::Error as E;
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<E>() {
            return match err {
                E::CapExceeded { .. } => 2,
                E::Io(_) => 1,
                _ => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Inconclusive)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
