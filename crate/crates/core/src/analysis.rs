//! Queries answered by a 2-complete graph.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::graph::{Provenance, SubgroupGraph, VertexClass, VertexId};
use crate::presentation::CoxeterPresentation;
use crate::recognizer::StreamingNormalFormChecker;
use crate::rewriting::dehn_reduce;
use crate::{Error, Gen, Word};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub word: Word,
    pub reduced: Word,
    pub member: bool,
    /// Vertices visited while reading the reduced word.
    pub trace: Vec<VertexId>,
}

/// Reads a Dehn-reduced form of `w` from the basepoint.
pub fn membership(g: &SubgroupGraph, p: &CoxeterPresentation, w: &Word) -> Result<Membership, Error> {
    let reduced = dehn_reduce(p, w)?;
    let trace = g.trace_path(g.basepoint(), reduced.letters());
    let member = trace.len() == reduced.len() + 1 && trace.last() == Some(&g.basepoint());
    Ok(Membership {
        word: w.clone(),
        reduced,
        member,
        trace,
    })
}

pub fn is_member(g: &SubgroupGraph, p: &CoxeterPresentation, w: &Word) -> Result<bool, Error> {
    Ok(membership(g, p, w)?.member)
}

/// Distance of every live vertex from the basepoint.
pub fn vertex_distances(g: &SubgroupGraph) -> Vec<(VertexId, usize)> {
    let dist = g.distances();
    g.vertices()
        .filter_map(|v| dist[v].map(|d| (v, d)))
        .collect()
}

/// Largest distance from the basepoint.
pub fn quasiconvexity_constant(g: &SubgroupGraph) -> usize {
    g.distances().into_iter().flatten().max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteIndex {
    pub full: bool,
    /// Vertex count of a full graph; an estimate of the number of cosets.
    pub coset_estimate: Option<usize>,
}

pub fn finite_index(g: &SubgroupGraph) -> FiniteIndex {
    let full = g.is_full();
    FiniteIndex {
        full,
        coset_estimate: full.then(|| g.vertex_count()),
    }
}

pub fn is_finite_index(g: &SubgroupGraph) -> bool {
    g.is_full()
}

/// Shortlex-least path label from the basepoint to every reachable vertex.
pub fn shortlex_path_labels(g: &SubgroupGraph) -> HashMap<VertexId, Word> {
    let o = g.basepoint();
    let mut labels: HashMap<VertexId, Word> = HashMap::from([(o, Word::empty())]);
    let mut queue = VecDeque::from([o]);
    while let Some(v) = queue.pop_front() {
        let mut inc: Vec<(Gen, VertexId)> = g
            .incident(v)
            .iter()
            .map(|&e| (g.edge(e).label, g.edge(e).other(v)))
            .collect();
        inc.sort_unstable();
        for (l, u) in inc {
            if !labels.contains_key(&u) {
                let mut word = labels[&v].clone();
                word.push(l);
                labels.insert(u, word);
                queue.push_back(u);
            }
        }
    }
    labels
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexWitness {
    pub vertex: VertexId,
    pub missing: Gen,
    pub path: Word,
    pub z: Word,
    /// Powers `z^n`, `n = 1..=powers`, were confirmed normal and outside `H`.
    pub powers: usize,
}

/// Powers checked by [`infinite_index_witness`].
pub const WITNESS_POWERS: usize = 5;

/// An element `z = w a_l a_r a_s` whose powers all lie outside `H`, built
/// from a vertex `v` missing the generator `a_l` and a normal-form path label
/// `w` to `v`. Ties are broken by smallest vertex, then smallest letters.
pub fn infinite_index_witness(g: &SubgroupGraph, p: &CoxeterPresentation) -> Result<IndexWitness, Error> {
    if g.is_full() {
        return Err(Error::FullGraph);
    }
    let n = p.generator_count();
    let checker = StreamingNormalFormChecker::new(p);
    let labels = shortlex_path_labels(g);
    let mut vertices: Vec<VertexId> = labels.keys().copied().collect();
    vertices.sort_unstable();
    for v in vertices {
        let w = &labels[&v];
        if !checker.is_normal(w) {
            continue;
        }
        for l in (0..n).filter(|&l| g.edge_at(v, l).is_none()) {
            let mut wl = w.clone();
            wl.push(l);
            let first = wl.first().expect("nonempty");
            for r in (0..n).filter(|&r| r != l && Some(r) != w.last()) {
                for s in (0..n).filter(|&s| s != r && s != first) {
                    let mut z = wl.clone();
                    z.push(r);
                    z.push(s);
                    if witness_holds(g, p, &checker, &z)? {
                        return Ok(IndexWitness {
                            vertex: v,
                            missing: l,
                            path: w.clone(),
                            z,
                            powers: WITNESS_POWERS,
                        });
                    }
                }
            }
        }
    }
    Err(Error::Completion("no admissible witness passed the power checks".into()))
}

fn witness_holds(
    g: &SubgroupGraph,
    p: &CoxeterPresentation,
    checker: &StreamingNormalFormChecker,
    z: &Word,
) -> Result<bool, Error> {
    for k in 1..=WITNESS_POWERS {
        let zk = z.pow(k);
        if !checker.is_normal(&zk) || is_member(g, p, &zk)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Component of `h x k` at the pair of basepoints. It reads exactly the
/// words readable in both graphs, so a Dehn-reduced word closes up at its
/// basepoint iff it lies in both subgroups.
pub fn intersection_acceptor(h: &SubgroupGraph, k: &SubgroupGraph) -> SubgroupGraph {
    let n = h.generator_count().min(k.generator_count());
    let mut out = SubgroupGraph::new(n);
    let start = (h.basepoint(), k.basepoint());
    let mut ids: HashMap<(VertexId, VertexId), VertexId> = HashMap::from([(start, out.basepoint())]);
    let mut seen_edges: HashSet<(VertexId, VertexId, Gen)> = HashSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some((a, b)) = queue.pop_front() {
        let x = ids[&(a, b)];
        for l in 0..n {
            let (Some(a2), Some(b2)) = (h.neighbour(a, l), k.neighbour(b, l)) else {
                continue;
            };
            let y = match ids.get(&(a2, b2)) {
                Some(&y) => y,
                None => {
                    let y = out.add_vertex(VertexClass::Primary);
                    ids.insert((a2, b2), y);
                    queue.push_back((a2, b2));
                    y
                }
            };
            if seen_edges.insert((x.min(y), x.max(y), l)) {
                out.add_edge(x, y, l, Provenance::Primary);
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub full: bool,
    pub coset_estimate: Option<usize>,
    pub diameter: usize,
    pub witness: Option<Word>,
    pub memberships: Vec<Membership>,
}

/// Every query at once; `words` are tested for membership.
pub fn analyse(g: &SubgroupGraph, p: &CoxeterPresentation, words: &[Word]) -> Result<AnalysisReport, Error> {
    let index = finite_index(g);
    let witness = if index.full {
        None
    } else {
        Some(infinite_index_witness(g, p)?.z)
    };
    let memberships = words
        .iter()
        .map(|w| membership(g, p, w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AnalysisReport {
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        full: index.full,
        coset_estimate: index.coset_estimate,
        diameter: quasiconvexity_constant(g),
        witness,
        memberships,
    })
}
