//! 2-completion.
//!
//! Starting from a graph with the relator path property, every maximal
//! alternating path is closed into a relator cycle by a chain of secondary
//! edges. Folding the new material at primary vertices leaves at most pairs of
//! edges meeting at primary vertices off any relator cycle; those are closed
//! up in turn. In the result every pair of related edges at a vertex lies on a
//! relator cycle, except at critical vertices in one specific configuration.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::graph::{
    all_alternating_walks, alternating_walk, AlternatingWalk, EdgeId, Provenance, SubgroupGraph, VertexClass,
    VertexId,
};
use crate::presentation::CoxeterPresentation;
use crate::rewriting::alternating;
use crate::{Error, Gen};

#[derive(Clone, Debug, Default, Serialize)]
pub struct CompletionReport {
    /// Chains added for maximal paths of the input.
    pub path_chains: usize,
    /// Chains added for leftover pairs at primary vertices.
    pub pair_chains: usize,
    pub shortest_chain: Option<usize>,
    pub secondary_edges: usize,
    pub critical: Vec<VertexId>,
}

impl CompletionReport {
    fn note_chain(&mut self, len: usize) {
        self.shortest_chain = Some(self.shortest_chain.map_or(len, |s| s.min(len)));
    }

    pub fn added_cycles(&self) -> bool {
        self.path_chains + self.pair_chains > 0
    }
}

/// Two edges at a vertex, both related and off their relator cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairViolation {
    pub vertex: VertexId,
    pub edges: (EdgeId, EdgeId),
    pub labels: (Gen, Gen),
}

impl fmt::Display for PairViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "edges {} (a{}) and {} (a{}) at vertex {} are not on a relator cycle",
            self.edges.0,
            self.labels.0 + 1,
            self.edges.1,
            self.labels.1 + 1,
            self.vertex
        )
    }
}

fn pair_walk(g: &SubgroupGraph, e: EdgeId, s: Gen, t: Gen) -> AlternatingWalk {
    alternating_walk(g, e, s.min(t), s.max(t))
}

/// Whether `e1` (label `s`) and the `t`-edge at the same vertex lie on an
/// `(s, t)`-relator cycle.
fn on_cycle(g: &SubgroupGraph, e1: EdgeId, s: Gen, t: Gen, m: u32) -> bool {
    pair_walk(g, e1, s, t).on_relator_cycle(m)
}

/// Relabels everything present as primary material.
pub fn mark_primary(g: &mut SubgroupGraph) {
    let vertices: Vec<VertexId> = g.vertices().collect();
    for v in vertices {
        g.set_class(v, VertexClass::Primary);
    }
    let edges: Vec<EdgeId> = g.edges().map(|(e, _)| e).collect();
    for e in edges {
        let edge = g.edge_mut(e);
        edge.provenance = Provenance::Primary;
        edge.origin = None;
    }
}

/// Secondary chain closing the open walk into a relator cycle.
fn close_walk(g: &mut SubgroupGraph, walk: &AlternatingWalk, m: u32) -> usize {
    let len = walk.len();
    let first = g.edge(walk.steps[0].edge).label;
    let second = if first == walk.pair.0 { walk.pair.1 } else { walk.pair.0 };
    let full = alternating(first, second, 2 * m as usize);
    let labels = &full[len..];
    g.add_chain(walk.end(), Some(walk.start()), labels, Provenance::Secondary, Some(walk.pair));
    labels.len()
}

/// Closes every maximal alternating path of length at least 2 with a
/// secondary chain. Chains are computed on the input before any is added.
pub fn complete_maximal_paths(
    g: &mut SubgroupGraph,
    p: &CoxeterPresentation,
    report: &mut CompletionReport,
) -> Result<(), Error> {
    let mut pending = Vec::new();
    for walk in all_alternating_walks(g, p) {
        let m = p.related(walk.pair.0, walk.pair.1).expect("related pair");
        if walk.closed {
            if !walk.on_relator_cycle(m) {
                return Err(Error::RelatorPathProperty(format!(
                    "closed ({},{})-walk of {} letters does not divide the relator",
                    walk.pair.0 + 1,
                    walk.pair.1 + 1,
                    walk.len()
                )));
            }
            continue;
        }
        if walk.len() < 2 {
            continue;
        }
        if walk.len() + 3 >= 2 * m as usize {
            return Err(Error::RelatorPathProperty(format!(
                "open ({},{})-walk of {} letters from vertex {} lacks at most three letters",
                walk.pair.0 + 1,
                walk.pair.1 + 1,
                walk.len(),
                walk.start()
            )));
        }
        pending.push((walk, m));
    }
    for (walk, m) in pending {
        let added = close_walk(g, &walk, m);
        report.path_chains += 1;
        report.note_chain(added);
    }
    Ok(())
}

fn primary_count(g: &SubgroupGraph) -> usize {
    g.vertices()
        .filter(|&v| g.class(v) == VertexClass::Primary)
        .count()
}

/// Folds, failing if two primary vertices were identified.
fn fold_keeping_primary(g: &mut SubgroupGraph) -> Result<(), Error> {
    let before = primary_count(g);
    g.fold();
    let after = primary_count(g);
    if after != before {
        return Err(Error::Completion(format!(
            "folding identified primary vertices ({before} -> {after})"
        )));
    }
    Ok(())
}

/// Identifies equally labelled secondary edges at primary vertices and folds
/// the consequences, then marks critical vertices.
pub fn fold_secondary_at_primary(g: &mut SubgroupGraph) -> Result<Vec<VertexId>, Error> {
    fold_keeping_primary(g)?;
    Ok(mark_critical(g))
}

/// Secondary vertices joined to a primary vertex by a secondary edge.
pub fn mark_critical(g: &mut SubgroupGraph) -> Vec<VertexId> {
    let mut critical = BTreeSet::new();
    for (_, e) in g.edges() {
        if e.provenance != Provenance::Secondary {
            continue;
        }
        let [u, v] = e.ends;
        for (a, b) in [(u, v), (v, u)] {
            if g.class(a) == VertexClass::Primary && g.class(b) != VertexClass::Primary {
                critical.insert(b);
            }
        }
    }
    for v in g.vertices().collect::<Vec<_>>() {
        match g.class(v) {
            VertexClass::Primary => {}
            _ if critical.contains(&v) => g.set_class(v, VertexClass::Critical),
            _ => g.set_class(v, VertexClass::Secondary),
        }
    }
    critical.into_iter().collect()
}

/// First related pair at `v` off its relator cycle.
fn open_pair_at(g: &SubgroupGraph, p: &CoxeterPresentation, v: VertexId) -> Option<(EdgeId, EdgeId, u32)> {
    let mut inc: Vec<EdgeId> = g.incident(v).to_vec();
    inc.sort_by_key(|&e| g.edge(e).label);
    for (a, &e1) in inc.iter().enumerate() {
        for &e2 in &inc[a + 1..] {
            let (s, t) = (g.edge(e1).label, g.edge(e2).label);
            let Some(m) = p.related(s, t) else { continue };
            if !on_cycle(g, e1, s, t, m) {
                return Some((e1, e2, m));
            }
        }
    }
    None
}

/// Closes the remaining related pairs at primary vertices, each by completing
/// the maximal alternating path through the pair.
pub fn complete_vertex_pairs(
    g: &mut SubgroupGraph,
    p: &CoxeterPresentation,
    report: &mut CompletionReport,
) -> Result<(), Error> {
    let mut worklist: BTreeSet<VertexId> = g
        .vertices()
        .filter(|&v| g.class(v) == VertexClass::Primary)
        .collect();
    let cap = 4 * (g.edge_count() + 1) * p.generator_count().max(1);
    let mut rounds = 0;
    g.open_journal();
    while let Some(v) = worklist.pop_first() {
        if !g.is_alive(v) {
            continue;
        }
        let Some((e1, e2, m)) = open_pair_at(g, p, v) else { continue };
        rounds += 1;
        if rounds > cap {
            g.close_journal();
            return Err(Error::Completion(format!("no fixpoint after {cap} pair completions")));
        }
        let (s, t) = (g.edge(e1).label, g.edge(e2).label);
        let walk = pair_walk(g, e1, s, t);
        if walk.closed || walk.len() >= 2 * m as usize {
            g.close_journal();
            return Err(Error::Completion(format!(
                "pair at vertex {v} lies on a ({},{})-walk of {} letters that cannot be closed",
                s + 1,
                t + 1,
                walk.len()
            )));
        }
        let added = close_walk(g, &walk, m);
        report.pair_chains += 1;
        report.note_chain(added);
        if let Err(e) = fold_keeping_primary(g) {
            g.close_journal();
            return Err(e);
        }
        worklist.insert(g.find(v));
        for u in g.drain_journal().touched {
            let u = g.find(u);
            if g.class(u) == VertexClass::Primary {
                worklist.insert(u);
            }
        }
    }
    g.close_journal();
    Ok(())
}

/// Runs the three stages on a graph with the relator path property.
pub fn two_complete(g: &mut SubgroupGraph, p: &CoxeterPresentation) -> Result<CompletionReport, Error> {
    let mut report = CompletionReport::default();
    mark_primary(g);
    let primary_edges = g.edge_count();
    complete_maximal_paths(g, p, &mut report)?;
    fold_secondary_at_primary(g)?;
    complete_vertex_pairs(g, p, &mut report)?;
    report.critical = mark_critical(g);
    report.secondary_edges = g.edge_count() - primary_edges;
    if let Some(v) = two_completeness_violation(g, p) {
        return Err(Error::Completion(v.to_string()));
    }
    Ok(report)
}

/// The exceptional configuration at `v`: both far ends have degree 2 and a
/// third edge at `v` lies on relator cycles with each of the two.
fn exceptional(g: &SubgroupGraph, p: &CoxeterPresentation, v: VertexId, e1: EdgeId, e2: EdgeId) -> bool {
    let (i, j) = (g.edge(e1).label, g.edge(e2).label);
    let (v1, v2) = (g.edge(e1).other(v), g.edge(e2).other(v));
    if g.degree(v1) != 2 || g.degree(v2) != 2 {
        return false;
    }
    g.incident(v).iter().any(|&e3| {
        let t = g.edge(e3).label;
        if t == i || t == j {
            return false;
        }
        let (Some(mi), Some(mj)) = (p.related(t, i), p.related(t, j)) else {
            return false;
        };
        on_cycle(g, e1, i, t, mi) && on_cycle(g, e2, j, t, mj)
    })
}

/// First pair violating 2-completeness, if any. A repeated label at a vertex
/// counts as a violation as well.
pub fn two_completeness_violation(g: &SubgroupGraph, p: &CoxeterPresentation) -> Option<PairViolation> {
    for v in g.vertices() {
        let mut inc: Vec<EdgeId> = g.incident(v).to_vec();
        inc.sort_by_key(|&e| g.edge(e).label);
        for (a, &e1) in inc.iter().enumerate() {
            for &e2 in &inc[a + 1..] {
                let (s, t) = (g.edge(e1).label, g.edge(e2).label);
                let violation = PairViolation {
                    vertex: v,
                    edges: (e1, e2),
                    labels: (s, t),
                };
                if s == t {
                    return Some(violation);
                }
                let Some(m) = p.related(s, t) else { continue };
                if !on_cycle(g, e1, s, t, m) && !exceptional(g, p, v, e1, e2) {
                    return Some(violation);
                }
            }
        }
    }
    None
}

pub fn is_two_complete(g: &SubgroupGraph, p: &CoxeterPresentation) -> bool {
    two_completeness_violation(g, p).is_none()
}

/// Pairs off their relator cycle occur only at critical vertices, in the
/// exceptional configuration, and form maximal alternating paths of length 2.
pub fn crucial_property_violation(g: &SubgroupGraph, p: &CoxeterPresentation) -> Option<String> {
    for v in g.vertices() {
        let inc = g.incident(v);
        for (a, &e1) in inc.iter().enumerate() {
            for &e2 in &inc[a + 1..] {
                let (s, t) = (g.edge(e1).label, g.edge(e2).label);
                let Some(m) = p.related(s, t) else { continue };
                if on_cycle(g, e1, s, t, m) {
                    continue;
                }
                if g.class(v) != VertexClass::Critical {
                    return Some(format!(
                        "{:?} vertex {v}: a{} and a{} off their relator cycle",
                        g.class(v),
                        s + 1,
                        t + 1
                    ));
                }
                if !exceptional(g, p, v, e1, e2) {
                    return Some(format!("critical vertex {v}: configuration is not exceptional"));
                }
                let len = pair_walk(g, e1, s, t).len();
                if len != 2 {
                    return Some(format!("critical vertex {v}: maximal path has {len} letters"));
                }
            }
        }
    }
    None
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::reduction::{has_relator_path_property, phase1, PhaseOneOptions};
    use crate::rewriting::dehn_reduce;
    use crate::Word;
    use proptest::prelude::*;

    fn gens_strategy() -> impl Strategy<Value = Vec<Word>> {
        proptest::collection::vec(proptest::collection::vec(0usize..3, 1..9).prop_map(Word::new), 0..4)
    }

    fn check(p: &CoxeterPresentation, gens: &[Word]) -> Result<(), TestCaseError> {
        let mut g = SubgroupGraph::bouquet(p, gens).unwrap();
        phase1(&mut g, p, &PhaseOneOptions::checked()).unwrap();
        prop_assert!(has_relator_path_property(&g, p));
        let primary = g.vertex_count();
        let report = two_complete(&mut g, p);
        prop_assert!(report.is_ok(), "{:?}", report.err());
        let report = report.unwrap();
        prop_assert!(g.is_trim());
        prop_assert!(is_two_complete(&g, p));
        prop_assert_eq!(crucial_property_violation(&g, p), None);
        prop_assert_eq!(primary_count(&g), primary);
        let s_h: usize = gens.iter().map(Word::len).sum();
        prop_assert!(g.edge_count() <= p.k_g() * s_h.max(1));
        if let Some(shortest) = report.shortest_chain {
            prop_assert!(shortest >= 4);
        }
        if report.added_cycles() {
            prop_assert!(!g.is_full());
        }
        let o = g.basepoint();
        for h in gens {
            prop_assert_eq!(g.trace(o, h.letters()), Some(o));
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn completion_invariants_g4(gens in gens_strategy()) {
            check(&CoxeterPresentation::uniform(3, 4).unwrap(), &gens)?;
        }

        #[test]
        fn completion_invariants_g6(gens in gens_strategy()) {
            check(&CoxeterPresentation::uniform(3, 6).unwrap(), &gens)?;
        }

        #[test]
        fn completion_invariants_mixed(gens in gens_strategy()) {
            let p = CoxeterPresentation::new(4, &[(0, 1, 6), (1, 2, 4), (2, 3, 6), (0, 3, 4)]).unwrap();
            let gens: Vec<Word> = gens
                .into_iter()
                .map(|h| Word::new(h.letters().iter().map(|&l| (l * 5 + h.len()) % 4).collect()))
                .collect();
            check(&p, &gens)?;
        }

        #[test]
        fn dehn_reduced_paths_complete(letters in proptest::collection::vec(0usize..3, 1..14)) {
            let p = CoxeterPresentation::uniform(3, 6).unwrap();
            let word = dehn_reduce(&p, &Word::new(letters)).unwrap();
            prop_assume!(!word.is_empty());
            let mut g = SubgroupGraph::path(&p, &word).unwrap();
            prop_assert!(two_complete(&mut g, &p).is_ok());
            prop_assert_ne!(g.terminal(), Some(g.basepoint()));
        }
    }
}
