//! Perimeter reduction.
//!
//! Folding alternates with closing alternating paths that spell all but at
//! most three letters of a relator. Each step strictly lowers the count
//! `gamma = 4 * missing + edges`, where `missing` counts pairs of an edge
//! labelled from the cover `C` and a relator `(a_i a_j)^m` whose cycle through
//! that edge is not present. The output has the relator path property.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::graph::{
    all_alternating_walks, alternating_walk, AlternatingWalk, EdgeId, Journal, Provenance, SubgroupGraph,
    VertexId,
};
use crate::presentation::CoxeterPresentation;
use crate::rewriting::alternating;
use crate::{Error, Gen};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PerimeterCount {
    pub missing_total: usize,
    pub edge_count: usize,
    pub gamma: usize,
}

fn in_cover_mask(n: usize, cover: &[Gen]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &c in cover {
        mask[c] = true;
    }
    mask
}

fn partner(label: Gen, pair: (Gen, Gen)) -> Gen {
    if label == pair.0 {
        pair.1
    } else {
        pair.0
    }
}

/// Exact count over a trim graph.
pub fn count_gamma(g: &SubgroupGraph, p: &CoxeterPresentation, cover: &[Gen]) -> PerimeterCount {
    let mask = in_cover_mask(p.generator_count(), cover);
    let mut missing_total = 0;
    for walk in all_alternating_walks(g, p) {
        let m = p.related(walk.pair.0, walk.pair.1).expect("related pair");
        if walk.on_relator_cycle(m) {
            continue;
        }
        let edges: HashSet<EdgeId> = walk.steps.iter().map(|t| t.edge).collect();
        missing_total += edges.iter().filter(|&&e| mask[g.edge(e).label]).count();
    }
    let edge_count = g.edge_count();
    PerimeterCount {
        missing_total,
        edge_count,
        gamma: 4 * missing_total + edge_count,
    }
}

/// How a near-relator walk is closed up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Repair {
    /// New edges spelling `labels` from `from` to `to`.
    Chain {
        from: VertexId,
        to: VertexId,
        labels: Vec<Gen>,
    },
    /// The relator forces `a` and `b` to coincide.
    Identify { a: VertexId, b: VertexId },
}

#[derive(Clone, Debug)]
pub struct NearRelator {
    pub pair: (Gen, Gen),
    pub m: u32,
    pub walk: AlternatingWalk,
    /// Letters of the relator not yet present; 0 for identifications.
    pub missing: usize,
    pub repair: Repair,
}

impl fmt::Display for NearRelator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = (self.pair.0 + 1, self.pair.1 + 1);
        let shape = if self.walk.closed { "closed" } else { "open" };
        match &self.repair {
            Repair::Chain { from, to, labels } => write!(
                f,
                "({i},{j})^{}: {shape} walk of {} letters, add {} edges {from}->{to}",
                self.m,
                self.walk.len(),
                labels.len()
            ),
            Repair::Identify { a, b } => write!(
                f,
                "({i},{j})^{}: {shape} walk of {} letters, identify {a} and {b}",
                self.m,
                self.walk.len()
            ),
        }
    }
}

/// Classifies the maximal `pair`-walk `walk` against its relator.
fn classify(g: &SubgroupGraph, walk: AlternatingWalk, m: u32) -> Option<NearRelator> {
    let m_us = m as usize;
    let len = walk.len();
    let pair = walk.pair;
    let first = g.edge(walk.steps[0].edge).label;
    let second = partner(first, pair);
    let (missing, repair) = if walk.closed {
        if walk.on_relator_cycle(m) {
            return None;
        }
        let offset = (2 * m_us) % len;
        (
            0,
            Repair::Identify {
                a: walk.steps[0].from,
                b: walk.steps[offset].from,
            },
        )
    } else if len >= 2 * m_us {
        (
            0,
            Repair::Identify {
                a: walk.steps[0].from,
                b: walk.steps[2 * m_us - 1].to,
            },
        )
    } else if len + 3 >= 2 * m_us {
        let full = alternating(first, second, 2 * m_us);
        (
            2 * m_us - len,
            Repair::Chain {
                from: walk.end(),
                to: walk.start(),
                labels: full[len..].to_vec(),
            },
        )
    } else {
        return None;
    };
    Some(NearRelator {
        pair,
        m,
        walk,
        missing,
        repair,
    })
}

/// Near-relator walk through `e`, trying the relators of its label in
/// ascending order of the partner generator.
pub fn near_relator_at(g: &SubgroupGraph, p: &CoxeterPresentation, e: EdgeId) -> Option<NearRelator> {
    let label = g.edge(e).label;
    p.neighbours(label).find_map(|(j, m)| {
        let pair = (label.min(j), label.max(j));
        classify(g, alternating_walk(g, e, pair.0, pair.1), m)
    })
}

/// First near-relator walk, scanning edges by ascending id.
pub fn find_near_relator_path(g: &SubgroupGraph, p: &CoxeterPresentation) -> Option<NearRelator> {
    g.edges().find_map(|(e, _)| near_relator_at(g, p, e))
}

/// Whether no near-relator walk remains.
pub fn has_relator_path_property(g: &SubgroupGraph, p: &CoxeterPresentation) -> bool {
    find_near_relator_path(g, p).is_none()
}

/// Applies the repair without folding. Returns the number of edges added.
fn apply_repair(g: &mut SubgroupGraph, near: &NearRelator) -> usize {
    match &near.repair {
        Repair::Chain { from, to, labels } => {
            g.add_chain(*from, Some(*to), labels, Provenance::Primary, Some(near.pair));
            labels.len()
        }
        Repair::Identify { a, b } => {
            g.merge(*a, *b);
            0
        }
    }
}

/// Closes a near-relator walk and folds the result.
pub fn complete_relator_cycle(g: &mut SubgroupGraph, near: &NearRelator) {
    apply_repair(g, near);
    g.fold();
}

#[derive(Clone, Debug, Default)]
pub struct PhaseOneOptions {
    /// Cover used for the count; the presentation's own or the first found
    /// when absent.
    pub cover: Option<Vec<Gen>>,
    /// Enforce the reduction hypothesis, the strict decrease of the count and
    /// the edge bound.
    pub checked: bool,
    pub budget: Option<usize>,
    pub edge_bound: Option<usize>,
    pub trace: bool,
    /// Recompute the count from scratch after every step and compare it with
    /// the incremental value.
    pub verify_gamma: bool,
}

impl PhaseOneOptions {
    pub fn checked() -> Self {
        Self {
            checked: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub action: String,
    pub gamma_before: usize,
    pub gamma_after: usize,
    pub vertices: usize,
    pub edges: usize,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {:>4}  gamma {:>6} -> {:<6}  |V| {:>6}  |E| {:>6}  {}",
            self.step, self.gamma_before, self.gamma_after, self.vertices, self.edges, self.action
        )
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PhaseOneReport {
    pub cover: Vec<Gen>,
    pub steps: usize,
    pub completions: usize,
    pub identifications: usize,
    /// Count after each step, starting with the folded input.
    pub gamma_history: Vec<usize>,
    pub max_edges: usize,
    pub trace: Vec<TraceEvent>,
}

/// Incrementally maintained set of missing `(edge, partner)` pairs.
struct GammaTracker {
    mask: Vec<bool>,
    missing: HashSet<(EdgeId, Gen)>,
}

impl GammaTracker {
    fn new(g: &SubgroupGraph, p: &CoxeterPresentation, cover: &[Gen]) -> Self {
        let mut t = Self {
            mask: in_cover_mask(p.generator_count(), cover),
            missing: HashSet::new(),
        };
        for walk in all_alternating_walks(g, p) {
            let m = p.related(walk.pair.0, walk.pair.1).expect("related pair");
            t.record(g, &walk, m);
        }
        t
    }

    fn record(&mut self, g: &SubgroupGraph, walk: &AlternatingWalk, m: u32) {
        let on = walk.on_relator_cycle(m);
        for t in &walk.steps {
            let label = g.edge(t.edge).label;
            if !self.mask[label] {
                continue;
            }
            let key = (t.edge, partner(label, walk.pair));
            if on {
                self.missing.remove(&key);
            } else {
                self.missing.insert(key);
            }
        }
    }

    fn update(&mut self, g: &SubgroupGraph, p: &CoxeterPresentation, journal: &Journal) {
        for &(e, label) in &journal.removed {
            for (j, _) in p.neighbours(label) {
                self.missing.remove(&(e, j));
            }
        }
        let mut done: HashSet<(EdgeId, Gen, Gen)> = HashSet::new();
        let mut seen_vertices: HashSet<VertexId> = HashSet::new();
        for &v in &journal.touched {
            let v = g.find(v);
            if !seen_vertices.insert(v) {
                continue;
            }
            for &e in g.incident(v) {
                let label = g.edge(e).label;
                for (j, m) in p.neighbours(label) {
                    let pair = (label.min(j), label.max(j));
                    if done.contains(&(e, pair.0, pair.1)) {
                        continue;
                    }
                    let walk = alternating_walk(g, e, pair.0, pair.1);
                    for t in &walk.steps {
                        done.insert((t.edge, pair.0, pair.1));
                    }
                    self.record(g, &walk, m);
                }
            }
        }
    }

    fn gamma(&self, g: &SubgroupGraph) -> usize {
        4 * self.missing.len() + g.edge_count()
    }
}

/// Resolves the cover used by the count.
pub fn resolve_cover(p: &CoxeterPresentation, cover: Option<&[Gen]>) -> Option<Vec<Gen>> {
    cover
        .map(<[Gen]>::to_vec)
        .or_else(|| p.cover().map(<[Gen]>::to_vec))
        .or_else(|| p.find_cover())
}

/// Folds and completes near-relator walks until neither applies.
pub fn phase1(
    g: &mut SubgroupGraph,
    p: &CoxeterPresentation,
    options: &PhaseOneOptions,
) -> Result<PhaseOneReport, Error> {
    let cover = match resolve_cover(p, options.cover.as_deref()) {
        Some(c) => c,
        None if options.checked => {
            return Err(Error::ReductionHypothesis {
                cover: Vec::new(),
                details: "no vertex cover satisfies the hypothesis".into(),
            })
        }
        None => (0..p.generator_count()).collect(),
    };
    if options.checked {
        let report = p.check_reduction_hypothesis(&cover);
        if !report.passed() {
            let details = report
                .violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::ReductionHypothesis {
                cover: cover.iter().map(|c| c + 1).collect(),
                details,
            });
        }
    }

    let mut report = PhaseOneReport {
        cover: cover.clone(),
        ..PhaseOneReport::default()
    };
    let check_bound = |edges: usize| -> Result<(), Error> {
        match options.edge_bound {
            Some(bound) if options.checked && edges > bound => Err(Error::EdgeBound { edges, bound }),
            _ => Ok(()),
        }
    };

    check_bound(g.edge_count())?;
    report.max_edges = g.edge_count();
    g.fold();
    g.open_journal();
    let mut tracker = GammaTracker::new(g, p, &cover);
    g.drain_journal();
    let mut gamma = tracker.gamma(g);
    report.gamma_history.push(gamma);

    let mut worklist: BTreeSet<EdgeId> = g.edges().map(|(e, _)| e).collect();
    while let Some(e) = worklist.pop_first() {
        if !g.edge_exists(e) {
            continue;
        }
        let Some(near) = near_relator_at(g, p, e) else { continue };
        if let Some(budget) = options.budget {
            if report.steps >= budget {
                g.close_journal();
                return Err(Error::BudgetExhausted(budget));
            }
        }
        report.steps += 1;
        match near.repair {
            Repair::Chain { .. } => report.completions += 1,
            Repair::Identify { .. } => report.identifications += 1,
        }
        apply_repair(g, &near);
        report.max_edges = report.max_edges.max(g.edge_count());
        check_bound(g.edge_count())?;
        g.fold();
        let journal = g.drain_journal();
        tracker.update(g, p, &journal);
        let after = tracker.gamma(g);
        if options.verify_gamma {
            let full = count_gamma(g, p, &cover).gamma;
            assert_eq!(after, full, "incremental count diverged at step {}", report.steps);
        }
        if options.trace {
            report.trace.push(TraceEvent {
                step: report.steps,
                action: near.to_string(),
                gamma_before: gamma,
                gamma_after: after,
                vertices: g.vertex_count(),
                edges: g.edge_count(),
            });
        }
        report.gamma_history.push(after);
        if options.checked && after >= gamma {
            g.close_journal();
            return Err(Error::GammaNotDecreasing {
                step: report.steps,
                before: gamma,
                after,
            });
        }
        gamma = after;
        // every walk that changed passes through a touched vertex
        for v in journal.touched {
            let v = g.find(v);
            worklist.extend(g.incident(v).iter().copied());
        }
        if g.edge_exists(e) {
            worklist.insert(e);
        }
    }
    g.close_journal();
    if options.checked && !has_relator_path_property(g, p) {
        return Err(Error::RelatorPathProperty(
            find_near_relator_path(g, p).map(|n| n.to_string()).unwrap_or_default(),
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Word;

    fn g4() -> CoxeterPresentation {
        CoxeterPresentation::uniform(3, 4).unwrap()
    }

    fn w(l: &[usize]) -> Word {
        Word::from_one_based(l)
    }

    fn folded(p: &CoxeterPresentation, gens: &[Word]) -> SubgroupGraph {
        let mut g = SubgroupGraph::bouquet(p, gens).unwrap();
        g.fold();
        g
    }

    #[test]
    fn gamma_examples() {
        let p = g4();
        let all = [0, 1, 2];
        let loop_graph = folded(&p, &[w(&[1])]);
        assert_eq!(count_gamma(&loop_graph, &p, &all).gamma, 9);
        let even = folded(&p, &[w(&[1, 2]), w(&[1, 3])]);
        let c = count_gamma(&even, &p, &all);
        assert_eq!((c.missing_total, c.gamma), (0, 3));
        let empty = folded(&p, &[]);
        assert_eq!(count_gamma(&empty, &p, &all).gamma, 0);
        // only cover-labelled edges count
        assert_eq!(count_gamma(&loop_graph, &p, &[1, 2]).gamma, 1);
    }

    #[test]
    fn five_letter_path_needs_three_edges() {
        let p = g4();
        let g = SubgroupGraph::path(&p, &w(&[1, 2, 1, 2, 1])).unwrap();
        assert!(!has_relator_path_property(&g, &p));
        let near = find_near_relator_path(&g, &p).unwrap();
        assert_eq!((near.pair, near.missing, near.walk.len()), ((0, 1), 3, 5));
        let mut g = g;
        complete_relator_cycle(&mut g, &near);
        assert_eq!((g.vertex_count(), g.edge_count()), (8, 8));
        let walk = alternating_walk(&g, 0, 0, 1);
        assert!(walk.closed && walk.on_relator_cycle(4));
        assert!(has_relator_path_property(&g, &p));
    }

    #[test]
    fn seven_letter_path_needs_one_edge() {
        let p = g4();
        let mut g = SubgroupGraph::path(&p, &w(&[1, 2, 1, 2, 1, 2, 1])).unwrap();
        let near = find_near_relator_path(&g, &p).unwrap();
        assert_eq!(near.missing, 1);
        let vertices = g.vertex_count();
        complete_relator_cycle(&mut g, &near);
        assert_eq!((g.vertex_count(), g.edge_count()), (vertices, 8));
    }

    #[test]
    fn full_open_relator_identifies_endpoints() {
        let p = g4();
        let mut g = SubgroupGraph::path(&p, &w(&[1, 2, 1, 2, 1, 2, 1, 2])).unwrap();
        let near = find_near_relator_path(&g, &p).unwrap();
        assert_eq!(near.missing, 0);
        assert!(matches!(near.repair, Repair::Identify { .. }));
        complete_relator_cycle(&mut g, &near);
        assert_eq!(g.terminal(), Some(g.basepoint()));
        assert!(has_relator_path_property(&g, &p));
    }

    #[test]
    fn closed_walk_of_wrong_period_collapses() {
        // (a1 a2)^3 closes up with period 3, which does not divide 4
        let p = g4();
        let mut g = folded(&p, &[w(&[1, 2, 1, 2, 1, 2])]);
        assert!(!has_relator_path_property(&g, &p));
        phase1(&mut g, &p, &PhaseOneOptions { verify_gamma: true, ..PhaseOneOptions::checked() }).unwrap();
        // (a1a2)^3 and (a1a2)^4 generate <a1a2>
        let two_cycle = folded(&p, &[w(&[1, 2])]);
        assert_eq!(g.canonical_form(), two_cycle.canonical_form());
    }

    #[test]
    fn even_subgroup_has_nothing_to_do() {
        let p = g4();
        let g = folded(&p, &[w(&[1, 2]), w(&[1, 3])]);
        assert!(find_near_relator_path(&g, &p).is_none());
    }

    #[test]
    fn phase1_examples() {
        let p = g4();
        let opts = PhaseOneOptions {
            verify_gamma: true,
            ..PhaseOneOptions::checked()
        };

        let mut g = SubgroupGraph::bouquet(&p, &[w(&[1])]).unwrap();
        let r = phase1(&mut g, &p, &opts).unwrap();
        assert_eq!((r.steps, g.vertex_count(), g.edge_count()), (0, 1, 1));

        let mut g = SubgroupGraph::bouquet(&p, &[w(&[1, 2])]).unwrap();
        let r = phase1(&mut g, &p, &opts).unwrap();
        assert_eq!((r.steps, g.vertex_count(), g.edge_count()), (0, 2, 2));

        // a1a2a1a2a1 folds to a palindrome through an a1-loop; one completion
        // closes it into a relator walk through two loops
        let mut g = SubgroupGraph::bouquet(&p, &[w(&[1, 2, 1, 2, 1])]).unwrap();
        let r = phase1(&mut g, &p, &opts).unwrap();
        assert_eq!((r.steps, r.completions), (1, 1));
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 5));
        let e = g.edge_at(g.basepoint(), 0).unwrap();
        let walk = alternating_walk(&g, e, 0, 1);
        assert_eq!(walk.period(), Some(4));
        assert!(r.gamma_history.windows(2).all(|x| x[1] < x[0]));
    }

    #[test]
    fn rejects_presentations_failing_the_hypothesis() {
        // every exponent 4 on four mutually related generators: rho = 3
        let p = CoxeterPresentation::uniform(4, 4).unwrap();
        let mut g = SubgroupGraph::bouquet(&p, &[w(&[1, 2])]).unwrap();
        assert!(matches!(
            phase1(&mut g, &p, &PhaseOneOptions::checked()),
            Err(Error::ReductionHypothesis { .. })
        ));
        let mut g = SubgroupGraph::bouquet(&p, &[w(&[1, 2])]).unwrap();
        assert!(phase1(&mut g, &p, &PhaseOneOptions { budget: Some(100), ..Default::default() }).is_ok());
    }

    #[test]
    fn budget_is_enforced() {
        let p = g4();
        let mut g = SubgroupGraph::bouquet(&p, &[w(&[1, 2, 1, 2, 1])]).unwrap();
        let opts = PhaseOneOptions {
            budget: Some(0),
            ..Default::default()
        };
        assert!(matches!(phase1(&mut g, &p, &opts), Err(Error::BudgetExhausted(0))));
    }

    #[test]
    fn trace_records_each_step() {
        let p = g4();
        let mut g = SubgroupGraph::bouquet(&p, &[w(&[1, 2, 1, 2, 1])]).unwrap();
        let opts = PhaseOneOptions {
            trace: true,
            ..PhaseOneOptions::checked()
        };
        let r = phase1(&mut g, &p, &opts).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert!(r.trace[0].to_string().contains("add 3 edges"));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::Word;
    use proptest::prelude::*;

    fn gens_strategy(n: usize) -> impl Strategy<Value = Vec<Word>> {
        proptest::collection::vec(proptest::collection::vec(0..n, 1..9).prop_map(Word::new), 1..4)
    }

    fn check(p: &CoxeterPresentation, gens: &[Word]) -> Result<(), TestCaseError> {
        let mut g = SubgroupGraph::bouquet(p, gens).unwrap();
        let s_h: usize = gens.iter().map(Word::len).sum();
        let opts = PhaseOneOptions {
            verify_gamma: true,
            edge_bound: Some(p.k_g() * s_h),
            ..PhaseOneOptions::checked()
        };
        let report = phase1(&mut g, p, &opts);
        prop_assert!(report.is_ok(), "{:?}", report.err());
        let report = report.unwrap();
        prop_assert!(report.gamma_history[0] <= 5 * p.k_g() * s_h);
        prop_assert!(g.is_trim());
        prop_assert!(has_relator_path_property(&g, p));
        let o = g.basepoint();
        for h in gens {
            prop_assert_eq!(g.trace(o, h.letters()), Some(o));
        }
        for walk in all_alternating_walks(&g, p) {
            if walk.closed {
                let m = p.related(walk.pair.0, walk.pair.1).unwrap();
                prop_assert!(walk.on_relator_cycle(m));
            }
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn phase1_invariants_g4(gens in gens_strategy(3)) {
            check(&CoxeterPresentation::uniform(3, 4).unwrap(), &gens)?;
        }

        #[test]
        fn phase1_invariants_g6(gens in gens_strategy(3)) {
            check(&CoxeterPresentation::uniform(3, 6).unwrap(), &gens)?;
        }

        #[test]
        fn phase1_invariants_relator_heavy(
            pieces in proptest::collection::vec((0usize..3, 0usize..3, 3usize..9), 1..4)
        ) {
            // generators made of long alternating runs exercise every repair
            let p = CoxeterPresentation::uniform(3, 4).unwrap();
            let gens: Vec<Word> = pieces
                .into_iter()
                .map(|(a, b, len)| {
                    let b = if a == b { (a + 1) % 3 } else { b };
                    Word::new(alternating(a, b, len))
                })
                .collect();
            check(&p, &gens)?;
        }
    }
}
