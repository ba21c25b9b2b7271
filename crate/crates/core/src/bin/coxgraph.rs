use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use coxgraph::analysis::{
    finite_index, infinite_index_witness, intersection_acceptor, membership, quasiconvexity_constant,
    vertex_distances,
};
use coxgraph::pipeline::{build, Build, BuildOptions};
use coxgraph::recognizer::StreamingNormalFormChecker;
use coxgraph::rewriting::{dehn_reduce, normal_form};
use coxgraph::sampling::bench;
use coxgraph::separability::{residual_witness, separate};
use coxgraph::surface::{self, SurfaceKind, SurfacePresentation};
use coxgraph::{io, parse_presentation, CoxeterPresentation, Error, Word};

const SCHEMA_VERSION: u32 = 1;

/// Subgroup graphs for Coxeter groups of extra-large type and surface groups.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// Presentation file (`gens n`, `m i j k`, optional `cover ...`).
    #[arg(long, global = true)]
    presentation: Option<PathBuf>,

    /// Subgroup generators, one word per line.
    #[arg(long, global = true)]
    gens: Option<PathBuf>,

    /// Subgroup generator given inline; may be repeated.
    #[arg(long = "gen", global = true)]
    inline_gens: Vec<String>,

    /// Query word; may be repeated.
    #[arg(long = "word", global = true)]
    words: Vec<String>,

    /// Cover for the reduction hypothesis, e.g. `1,2`.
    #[arg(long, global = true, value_delimiter = ',')]
    cover: Option<Vec<usize>>,

    #[arg(long, global = true)]
    export_dot: Option<PathBuf>,

    /// Writes the final graph as a JSON document.
    #[arg(long, global = true)]
    export_graph: Option<PathBuf>,

    /// Prints every Phase I step.
    #[arg(long, global = true)]
    trace: bool,

    /// Runs without the reduction hypothesis; requires --budget.
    #[arg(long, global = true, requires = "budget")]
    unchecked: bool,

    /// Maximum number of Phase I steps.
    #[arg(long, global = true)]
    budget: Option<usize>,

    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Machine-readable output instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Reports the reduction hypothesis and the separability condition.
    Check,
    /// Runs both phases and reports sizes and timings.
    Build,
    /// Membership of each --word in H.
    Member,
    /// Finite index test.
    Index,
    /// Diameter of the completed graph.
    Qc,
    /// Element whose powers avoid H, for infinite-index subgroups.
    Witness,
    /// Intersection with the subgroup generated by --other.
    Intersect {
        #[arg(long)]
        other: PathBuf,
    },
    /// Finite quotient separating --word from H.
    Separate,
    /// Finite quotient in which --word acts nontrivially.
    Rf,
    /// Shortlex normal form of each --word.
    Nf,
    /// Normal-form test of each --word.
    Isnf,
    /// Surface group subgroups; words use `'` or `-` for inverses.
    Surface {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        nonorientable: bool,
    },
    /// Timing sweep over random subgroups.
    Bench {
        #[arg(long, default_value_t = 1500)]
        max: usize,
        #[arg(long, default_value_t = 100)]
        step: usize,
    },
}

struct Output {
    value: Value,
    text: String,
    /// Exit with status 2 when a hypothesis fails.
    hypothesis_failed: bool,
}

impl Output {
    fn new(value: Value, text: String) -> Self {
        Self {
            value,
            text,
            hypothesis_failed: false,
        }
    }
}

fn load_presentation(common: &Common, fallback: Option<CoxeterPresentation>) -> Result<CoxeterPresentation, Error> {
    let p = match (&common.presentation, fallback) {
        (Some(path), _) => parse_presentation(&fs::read_to_string(path)?)?,
        (None, Some(p)) => p,
        (None, None) => return Err(Error::Document("--presentation is required".into())),
    };
    Ok(match &common.cover {
        Some(cover) => p.with_cover(cover.iter().map(|c| c.saturating_sub(1)).collect())?,
        None => p,
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>, Error> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn generator_texts(common: &Common) -> Result<Vec<String>, Error> {
    let mut out = match &common.gens {
        Some(path) => read_lines(path)?,
        None => Vec::new(),
    };
    out.extend(common.inline_gens.iter().cloned());
    Ok(out)
}

fn parse_words(texts: &[String], n: usize) -> Result<Vec<Word>, Error> {
    texts.iter().map(|t| Word::parse(t, n)).collect()
}

fn build_options(common: &Common, p: &CoxeterPresentation) -> BuildOptions {
    BuildOptions {
        cover: p.cover().map(<[_]>::to_vec),
        checked: !common.unchecked,
        budget: common.budget,
        trace: common.trace,
    }
}

fn export(common: &Common, g: &coxgraph::SubgroupGraph) -> Result<(), Error> {
    if let Some(path) = &common.export_dot {
        fs::write(path, io::to_dot(g))?;
    }
    if let Some(path) = &common.export_graph {
        fs::write(path, io::to_json(g)?)?;
    }
    Ok(())
}

fn run_build(common: &Common, p: &CoxeterPresentation) -> Result<(Vec<Word>, Build), Error> {
    let gens = parse_words(&generator_texts(common)?, p.generator_count())?;
    let b = build(p, &gens, &build_options(common, p))?;
    export(common, &b.delta2)?;
    Ok((gens, b))
}

fn query_words(common: &Common, n: usize) -> Result<Vec<Word>, Error> {
    if common.words.is_empty() {
        return Err(Error::Document("--word is required".into()));
    }
    parse_words(&common.words, n)
}

fn check(common: &Common) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let cover = p.cover().map(<[_]>::to_vec).or_else(|| p.find_cover());
    let reduction = cover.as_ref().map(|c| p.check_reduction_hypothesis(c));
    let separability = p.check_separability_condition();
    let passed = reduction.as_ref().is_some_and(|r| r.passed());
    let mut text = format!(
        "k_G = {}\nreduction hypothesis: {}\n",
        p.k_g(),
        if passed { "pass" } else { "fail" }
    );
    match (&cover, &reduction) {
        (Some(c), Some(r)) => {
            let names: Vec<String> = c.iter().map(|i| format!("a{}", i + 1)).collect();
            text.push_str(&format!("  cover {{{}}}\n", names.join(", ")));
            for v in &r.violations {
                text.push_str(&format!("  {v}\n"));
            }
        }
        _ => text.push_str("  no cover satisfies the hypothesis\n"),
    }
    text.push_str(&format!(
        "separability condition: {}\n",
        if separability.passed() { "pass" } else { "fail" }
    ));
    for &(i, j, m) in &separability.odd {
        text.push_str(&format!("  m_{}{} = {m} is odd\n", i + 1, j + 1));
    }
    for t in &separability.triangle {
        text.push_str(&format!("  {t}\n"));
    }
    let mut out = Output::new(
        json!({
            "k_g": p.k_g(),
            "reduction": { "passed": passed, "report": reduction },
            "separability": { "passed": separability.passed(), "report": separability },
        }),
        text,
    );
    out.hypothesis_failed = !passed;
    Ok(out)
}

fn build_verb(common: &Common) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let (gens, b) = run_build(common, &p)?;
    let mut text = String::new();
    if common.trace {
        for e in &b.phase1.trace {
            text.push_str(&format!("{e}\n"));
        }
    }
    text.push_str(&format!(
        "s_H = {}, edge bound k_G s_H = {}\n\
         Delta0: {} vertices, {} edges\n\
         Delta1: {} vertices, {} edges after {} steps ({} completions, {} identifications)\n\
         Delta2: {} vertices, {} edges, {} secondary chains\n\
         time: phase I {:?}, phase II {:?}\n",
        b.s_h,
        b.edge_bound,
        b.delta0.vertex_count(),
        b.delta0.edge_count(),
        b.delta1.vertex_count(),
        b.delta1.edge_count(),
        b.phase1.steps,
        b.phase1.completions,
        b.phase1.identifications,
        b.delta2.vertex_count(),
        b.delta2.edge_count(),
        b.completion.path_chains + b.completion.pair_chains,
        b.timings.fold_and_reduce,
        b.timings.complete,
    ));
    Ok(Output::new(
        json!({
            "generators": gens.iter().map(Word::to_indexed).collect::<Vec<_>>(),
            "s_h": b.s_h,
            "edge_bound": b.edge_bound,
            "delta0": { "vertices": b.delta0.vertex_count(), "edges": b.delta0.edge_count() },
            "delta1": { "vertices": b.delta1.vertex_count(), "edges": b.delta1.edge_count() },
            "delta2": { "vertices": b.delta2.vertex_count(), "edges": b.delta2.edge_count() },
            "phase1": b.phase1,
            "completion": b.completion,
            "timings": b.timings,
        }),
        text,
    ))
}

fn member(common: &Common) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let (_, b) = run_build(common, &p)?;
    let words = query_words(common, p.generator_count())?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for w in &words {
        let m = membership(&b.delta2, &p, w)?;
        let trace: Vec<String> = m.trace.iter().map(ToString::to_string).collect();
        text.push_str(&format!(
            "{}: {} (reduced {}, trace {})\n",
            w.to_indexed(),
            if m.member { "member" } else { "not a member" },
            m.reduced.to_indexed(),
            trace.join(" ")
        ));
        rows.push(json!({
            "word": w.to_indexed(),
            "reduced": m.reduced.to_indexed(),
            "member": m.member,
            "trace": m.trace,
        }));
    }
    Ok(Output::new(json!({ "memberships": rows }), text))
}

fn index(common: &Common) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let (_, b) = run_build(common, &p)?;
    let fi = finite_index(&b.delta2);
    let text = match fi.coset_estimate {
        Some(c) => format!("finite index: full graph with {c} vertices\n"),
        None => format!("infinite index: graph with {} vertices is not full\n", b.delta2.vertex_count()),
    };
    Ok(Output::new(
        json!({ "full": fi.full, "vertices": b.delta2.vertex_count(), "coset_estimate": fi.coset_estimate }),
        text,
    ))
}

fn qc(common: &Common) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let (_, b) = run_build(common, &p)?;
    let d = quasiconvexity_constant(&b.delta2);
    Ok(Output::new(
        json!({ "diameter": d, "distances": vertex_distances(&b.delta2) }),
        format!("quasiconvexity constant (diameter): {d}\n"),
    ))
}

fn witness(common: &Common) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let (_, b) = run_build(common, &p)?;
    let z = infinite_index_witness(&b.delta2, &p)?;
    Ok(Output::new(
        json!({
            "z": z.z.to_indexed(),
            "vertex": z.vertex,
            "missing": format!("a{}", z.missing + 1),
            "path": z.path.to_indexed(),
            "powers_checked": z.powers,
        }),
        format!(
            "z = {} (vertex {} lacks a{}; z^n normal and outside H for n <= {})\n",
            z.z.to_indexed(),
            z.vertex,
            z.missing + 1,
            z.powers
        ),
    ))
}

fn intersect(common: &Common, other: &Path) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let (_, h) = run_build(common, &p)?;
    let k_gens = parse_words(&read_lines(other)?, p.generator_count())?;
    let k = build(&p, &k_gens, &build_options(common, &p))?;
    let acc = intersection_acceptor(&h.delta2, &k.delta2);
    let mut rows = Vec::new();
    let mut text = format!(
        "intersection acceptor: {} vertices, {} edges\n",
        acc.vertex_count(),
        acc.edge_count()
    );
    for w in parse_words(&common.words, p.generator_count())? {
        let reduced = dehn_reduce(&p, &w)?;
        let accepted = acc.trace(acc.basepoint(), reduced.letters()) == Some(acc.basepoint());
        text.push_str(&format!(
            "{}: {}\n",
            w.to_indexed(),
            if accepted { "in both" } else { "not in both" }
        ));
        rows.push(json!({ "word": w.to_indexed(), "member": accepted }));
    }
    Ok(Output::new(
        json!({ "vertices": acc.vertex_count(), "edges": acc.edge_count(), "memberships": rows }),
        text,
    ))
}

fn separate_verb(common: &Common) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let gens = parse_words(&generator_texts(common)?, p.generator_count())?;
    let words = query_words(common, p.generator_count())?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for w in &words {
        let s = separate(&p, &gens, w, &build_options(common, &p))?;
        text.push_str(&format!("{}:\n{}", w.to_indexed(), s.to_text()));
        rows.push(json!({ "word": w.to_indexed(), "separation": s }));
    }
    Ok(Output::new(json!({ "separations": rows }), text))
}

fn rf(common: &Common) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let words = query_words(common, p.generator_count())?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for w in &words {
        let q = residual_witness(&p, w)?;
        let image = q.word_image(w.letters());
        text.push_str(&format!("{}:\n{}phi(w) = {image}\n", w.to_indexed(), q.to_text()));
        rows.push(json!({ "word": w.to_indexed(), "quotient": q, "image": image }));
    }
    Ok(Output::new(json!({ "witnesses": rows }), text))
}

fn nf(common: &Common, test_only: bool) -> Result<Output, Error> {
    let p = load_presentation(common, None)?;
    let words = query_words(common, p.generator_count())?;
    let checker = StreamingNormalFormChecker::new(&p);
    let mut text = String::new();
    let mut rows = Vec::new();
    for w in &words {
        if test_only {
            let rejected = checker.first_rejection(w);
            match rejected {
                None => text.push_str(&format!("{}: normal\n", w.to_indexed())),
                Some(k) => text.push_str(&format!(
                    "{}: not normal, rejected at letter {k}\n",
                    w.to_indexed()
                )),
            }
            rows.push(json!({ "word": w.to_indexed(), "normal": rejected.is_none(), "rejected_at": rejected }));
        } else {
            let n = normal_form(&p, w);
            text.push_str(&format!("{} -> {}\n", w.to_indexed(), n.to_indexed()));
            rows.push(json!({ "word": w.to_indexed(), "normal_form": n.to_indexed() }));
        }
    }
    Ok(Output::new(json!({ "words": rows }), text))
}

fn surface_verb(common: &Common, genus: usize, nonorientable: bool) -> Result<Output, Error> {
    let kind = if nonorientable {
        SurfaceKind::Nonorientable
    } else {
        SurfaceKind::Orientable
    };
    let sp = SurfacePresentation::new(kind, genus)?;
    let gens = generator_texts(common)?
        .iter()
        .map(|t| sp.parse_word(t))
        .collect::<Result<Vec<_>, _>>()?;
    let words = common
        .words
        .iter()
        .map(|t| sp.parse_word(t))
        .collect::<Result<Vec<_>, _>>()?;
    let b = surface::build(&sp, &gens, common.budget)?;
    let report = surface::analyse(&b.delta2, &sp, &words);
    let text = format!(
        "relator {}\nphase I: {} steps, gamma {:?}\n{report}",
        sp.format_word(sp.relator()),
        b.phase1.steps,
        b.phase1.gamma_history
    );
    Ok(Output::new(
        json!({
            "relator": sp.format_word(sp.relator()),
            "phase1": b.phase1,
            "completion": b.completion,
            "report": report,
        }),
        text,
    ))
}

fn bench_verb(common: &Common, max: usize, step: usize) -> Result<Output, Error> {
    let p = load_presentation(common, Some(CoxeterPresentation::uniform(3, 6)?))?;
    let sizes: Vec<usize> = (1..).map(|k| k * step.max(1)).take_while(|&s| s <= max).collect();
    let report = bench(&p, &sizes, common.seed)?;
    let mut text = String::from("  s_H  gens  Delta1 edges  Delta2 vertices  seconds\n");
    for r in &report.rows {
        text.push_str(&format!(
            "{:>5} {:>5} {:>13} {:>16} {:>8.3}\n",
            r.s_h, r.generators, r.delta1_edges, r.delta2_vertices, r.seconds
        ));
    }
    match report.exponent {
        Some(e) => text.push_str(&format!("fitted exponent {e:.2}\n")),
        None => text.push_str("fitted exponent unavailable\n"),
    }
    Ok(Output::new(serde_json::to_value(&report)?, text))
}

fn dispatch(cli: &Cli) -> Result<Output, Error> {
    let common = &cli.common;
    match &cli.verb {
        Verb::Check => check(common),
        Verb::Build => build_verb(common),
        Verb::Member => member(common),
        Verb::Index => index(common),
        Verb::Qc => qc(common),
        Verb::Witness => witness(common),
        Verb::Intersect { other } => intersect(common, other),
        Verb::Separate => separate_verb(common),
        Verb::Rf => rf(common),
        Verb::Nf => nf(common, false),
        Verb::Isnf => nf(common, true),
        Verb::Surface { genus, nonorientable } => surface_verb(common, *genus, *nonorientable),
        Verb::Bench { max, step } => bench_verb(common, *max, *step),
    }
}

fn verb_name(verb: &Verb) -> &'static str {
    match verb {
        Verb::Check => "check",
        Verb::Build => "build",
        Verb::Member => "member",
        Verb::Index => "index",
        Verb::Qc => "qc",
        Verb::Witness => "witness",
        Verb::Intersect { .. } => "intersect",
        Verb::Separate => "separate",
        Verb::Rf => "rf",
        Verb::Nf => "nf",
        Verb::Isnf => "isnf",
        Verb::Surface { .. } => "surface",
        Verb::Bench { .. } => "bench",
    }
}

fn is_hypothesis_error(e: &Error) -> bool {
    matches!(
        e,
        Error::ReductionHypothesis { .. } | Error::SeparabilityCondition(_) | Error::Presentation(_)
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verb = verb_name(&cli.verb);
    match dispatch(&cli) {
        Ok(out) => {
            if cli.common.json {
                let doc = json!({ "schema": SCHEMA_VERSION, "verb": verb, "result": out.value });
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                print!("{}", out.text);
            }
            if out.hypothesis_failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            if cli.common.json {
                let doc = json!({ "schema": SCHEMA_VERSION, "verb": verb, "error": e.to_string() });
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            }
            eprintln!("error: {e}");
            ExitCode::from(if is_hypothesis_error(&e) { 2 } else { 1 })
        }
    }
}
