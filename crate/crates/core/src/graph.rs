//! Labeled graphs over a Coxeter group.
//!
//! Every generator is an involution, so edges are undirected and read the
//! same label in both directions. Folding identifies two equally labeled
//! edges at a vertex; a graph with no such pair is *trim*.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::presentation::CoxeterPresentation;
use crate::{Error, Gen, Word};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Primary,
    Secondary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexClass {
    Primary,
    Secondary,
    Critical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Delta0,
    Delta1,
    Delta2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub ends: [VertexId; 2],
    pub label: Gen,
    pub provenance: Provenance,
    /// Relator `(i, j)` a secondary edge was created to complete.
    pub origin: Option<(Gen, Gen)>,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }

    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }
}

/// A graph over `G` with a basepoint and an optional terminal vertex.
///
/// Vertex and edge ids are stable until [`SubgroupGraph::compact`]; merged
/// vertices forward to their representative through [`SubgroupGraph::find`].
#[derive(Clone, Debug)]
pub struct SubgroupGraph {
    n_gens: usize,
    classes: Vec<VertexClass>,
    alive: Vec<bool>,
    parent: Vec<VertexId>,
    edges: Vec<Option<Edge>>,
    incidence: Vec<Vec<EdgeId>>,
    basepoint: VertexId,
    terminal: Option<VertexId>,
    stage: Stage,
    edge_count: usize,
    vertex_count: usize,
    journal: Option<Journal>,
}

/// Changes recorded while a journal is open: vertices whose incident edges
/// changed, and removed edges with their labels.
#[derive(Clone, Debug, Default)]
pub struct Journal {
    pub touched: Vec<VertexId>,
    pub removed: Vec<(EdgeId, Gen)>,
}

impl SubgroupGraph {
    /// A single basepoint and no edges.
    pub fn new(n_gens: usize) -> Self {
        let mut g = Self {
            n_gens,
            classes: Vec::new(),
            alive: Vec::new(),
            parent: Vec::new(),
            edges: Vec::new(),
            incidence: Vec::new(),
            basepoint: 0,
            terminal: None,
            stage: Stage::Delta0,
            edge_count: 0,
            vertex_count: 0,
            journal: None,
        };
        g.basepoint = g.add_vertex(VertexClass::Primary);
        g
    }

    /// Bouquet of loops at the basepoint, the `i`-th spelling `gens[i]`.
    /// Empty words contribute nothing.
    pub fn bouquet(p: &CoxeterPresentation, gens: &[Word]) -> Result<Self, Error> {
        let mut g = Self::new(p.generator_count());
        for h in gens {
            h.check_alphabet(p.generator_count())?;
            let o = g.basepoint;
            g.add_path(o, Some(o), h.letters(), Provenance::Primary);
        }
        Ok(g)
    }

    /// A path spelling `w` from a fresh basepoint; its end becomes the
    /// terminal vertex.
    pub fn path(p: &CoxeterPresentation, w: &Word) -> Result<Self, Error> {
        w.check_alphabet(p.generator_count())?;
        let mut g = Self::new(p.generator_count());
        let o = g.basepoint;
        let t = g.add_path(o, None, w.letters(), Provenance::Primary);
        g.terminal = Some(t);
        Ok(g)
    }

    /// Adds edges spelling `letters` from `from`, ending at `to` when given
    /// (a fresh vertex otherwise). Returns the final vertex.
    pub fn add_path(
        &mut self,
        from: VertexId,
        to: Option<VertexId>,
        letters: &[Gen],
        provenance: Provenance,
    ) -> VertexId {
        self.add_chain(from, to, letters, provenance, None)
    }

    /// [`SubgroupGraph::add_path`] recording the relator each new edge
    /// completes.
    pub fn add_chain(
        &mut self,
        from: VertexId,
        to: Option<VertexId>,
        letters: &[Gen],
        provenance: Provenance,
        origin: Option<(Gen, Gen)>,
    ) -> VertexId {
        let class = match provenance {
            Provenance::Primary => VertexClass::Primary,
            Provenance::Secondary => VertexClass::Secondary,
        };
        if letters.is_empty() {
            if let Some(t) = to {
                if t != from {
                    return self.merge(from, t);
                }
            }
            return from;
        }
        let mut cur = from;
        for (k, &l) in letters.iter().enumerate() {
            let next = if k + 1 == letters.len() {
                to.unwrap_or_else(|| self.add_vertex(class))
            } else {
                self.add_vertex(class)
            };
            self.add_edge_with_origin(cur, next, l, provenance, origin);
            cur = next;
        }
        cur
    }

    pub fn generator_count(&self) -> usize {
        self.n_gens
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn set_stage(&mut self, stage: Stage) {
        self.stage = stage;
    }

    pub fn basepoint(&self) -> VertexId {
        self.find(self.basepoint)
    }

    pub fn terminal(&self) -> Option<VertexId> {
        self.terminal.map(|t| self.find(t))
    }

    pub fn set_terminal(&mut self, t: Option<VertexId>) {
        self.terminal = t;
    }

    pub fn add_vertex(&mut self, class: VertexClass) -> VertexId {
        let id = self.classes.len();
        self.classes.push(class);
        self.alive.push(true);
        self.parent.push(id);
        self.incidence.push(Vec::new());
        self.vertex_count += 1;
        id
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, label: Gen, provenance: Provenance) -> EdgeId {
        self.add_edge_with_origin(u, v, label, provenance, None)
    }

    pub fn add_edge_with_origin(
        &mut self,
        u: VertexId,
        v: VertexId,
        label: Gen,
        provenance: Provenance,
        origin: Option<(Gen, Gen)>,
    ) -> EdgeId {
        let (u, v) = (self.find(u), self.find(v));
        let id = self.edges.len();
        self.edges.push(Some(Edge {
            ends: [u, v],
            label,
            provenance,
            origin,
        }));
        self.incidence[u].push(id);
        if u != v {
            self.incidence[v].push(id);
        }
        self.edge_count += 1;
        if let Some(j) = &mut self.journal {
            j.touched.extend([u, v]);
        }
        id
    }

    pub fn remove_edge(&mut self, e: EdgeId) {
        if let Some(edge) = self.edges[e].take() {
            for v in edge.ends {
                if let Some(pos) = self.incidence[v].iter().position(|&x| x == e) {
                    self.incidence[v].swap_remove(pos);
                }
            }
            self.edge_count -= 1;
            if let Some(j) = &mut self.journal {
                j.touched.extend(edge.ends);
                j.removed.push((e, edge.label));
            }
        }
    }

    /// Starts recording changes, discarding any open journal.
    pub fn open_journal(&mut self) {
        self.journal = Some(Journal::default());
    }

    /// Changes since the journal was opened; recording continues afresh.
    pub fn drain_journal(&mut self) -> Journal {
        self.journal
            .as_mut()
            .map(std::mem::take)
            .unwrap_or_default()
    }

    pub fn close_journal(&mut self) {
        self.journal = None;
    }

    /// Representative of a possibly merged vertex.
    pub fn find(&self, mut v: VertexId) -> VertexId {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    pub fn is_alive(&self, v: VertexId) -> bool {
        self.alive.get(v).copied().unwrap_or(false)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.alive.len()).filter(move |&v| self.alive[v])
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(id, e)| e.as_ref().map(|e| (id, e)))
    }

    pub fn edge_exists(&self, e: EdgeId) -> bool {
        matches!(self.edges.get(e), Some(Some(_)))
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        self.edges[e].as_ref().expect("edge was removed")
    }

    pub fn edge_mut(&mut self, e: EdgeId) -> &mut Edge {
        self.edges[e].as_mut().expect("edge was removed")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn class(&self, v: VertexId) -> VertexClass {
        self.classes[v]
    }

    pub fn set_class(&mut self, v: VertexId, class: VertexClass) {
        self.classes[v] = class;
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v]
    }

    /// Incident edges; a loop counts once.
    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v].len()
    }

    pub fn edge_at(&self, v: VertexId, label: Gen) -> Option<EdgeId> {
        self.incidence[v]
            .iter()
            .copied()
            .find(|&e| self.edge(e).label == label)
    }

    pub fn neighbour(&self, v: VertexId, label: Gen) -> Option<VertexId> {
        self.edge_at(v, label).map(|e| self.edge(e).other(v))
    }

    pub fn is_trim(&self) -> bool {
        self.vertices().all(|v| {
            let mut seen = vec![false; self.n_gens];
            self.incidence[v].iter().all(|&e| {
                let l = self.edge(e).label;
                !std::mem::replace(&mut seen[l], true)
            })
        })
    }

    /// Identifies `b` with `a` without folding. Returns the survivor.
    pub fn merge(&mut self, a: VertexId, b: VertexId) -> VertexId {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        let (keep, gone) = if self.incidence[a].len() >= self.incidence[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        let moved = std::mem::take(&mut self.incidence[gone]);
        for e in moved {
            let edge = self.edges[e].as_mut().expect("live incidence");
            let was_between = edge.ends.contains(&keep);
            for end in edge.ends.iter_mut() {
                if *end == gone {
                    *end = keep;
                }
            }
            if !was_between {
                self.incidence[keep].push(e);
            }
        }
        self.classes[keep] = stronger(self.classes[keep], self.classes[gone]);
        self.alive[gone] = false;
        self.parent[gone] = keep;
        self.vertex_count -= 1;
        if let Some(j) = &mut self.journal {
            j.touched.push(keep);
        }
        keep
    }

    /// Folds until trim. Returns the number of edges removed.
    pub fn fold(&mut self) -> usize {
        let stack: Vec<VertexId> = self.vertices().collect();
        self.fold_from(stack)
    }

    /// Identifies two vertices and folds the consequences.
    pub fn identify(&mut self, a: VertexId, b: VertexId) -> VertexId {
        let keep = self.merge(a, b);
        self.fold_from(vec![keep]);
        self.find(keep)
    }

    fn fold_from(&mut self, mut stack: Vec<VertexId>) -> usize {
        let mut removed = 0;
        let mut slot: Vec<Option<EdgeId>> = vec![None; self.n_gens];
        while let Some(v) = stack.pop() {
            if !self.alive[v] {
                continue;
            }
            'scan: loop {
                slot.iter_mut().for_each(|s| *s = None);
                for idx in 0..self.incidence[v].len() {
                    let e2 = self.incidence[v][idx];
                    let label = self.edge(e2).label;
                    let Some(e1) = slot[label] else {
                        slot[label] = Some(e2);
                        continue;
                    };
                    let (u1, u2) = (self.edge(e1).other(v), self.edge(e2).other(v));
                    // keep the primary copy when provenances differ
                    let drop_e = if self.edge(e2).provenance == Provenance::Primary
                        && self.edge(e1).provenance != Provenance::Primary
                    {
                        e1
                    } else {
                        e2
                    };
                    self.remove_edge(drop_e);
                    removed += 1;
                    if u1 != u2 {
                        let keep = self.merge(u1, u2);
                        stack.push(keep);
                    }
                    let v_now = self.find(v);
                    if v_now != v {
                        stack.push(v_now);
                        break 'scan;
                    }
                    continue 'scan;
                }
                break;
            }
        }
        removed
    }

    /// Endpoint of the path spelling `w` from `v`; `None` as soon as a
    /// letter cannot be read.
    pub fn trace(&self, v: VertexId, w: &[Gen]) -> Option<VertexId> {
        let mut cur = self.find(v);
        for &l in w {
            cur = self.neighbour(cur, l)?;
        }
        Some(cur)
    }

    /// Vertex sequence of the path spelling `w` from `v`, as far as it can
    /// be read.
    pub fn trace_path(&self, v: VertexId, w: &[Gen]) -> Vec<VertexId> {
        let mut cur = self.find(v);
        let mut out = vec![cur];
        for &l in w {
            match self.neighbour(cur, l) {
                Some(next) => {
                    cur = next;
                    out.push(cur);
                }
                None => break,
            }
        }
        out
    }

    /// Every generator labels an edge at every vertex.
    pub fn is_full(&self) -> bool {
        self.vertices()
            .all(|v| (0..self.n_gens).all(|l| self.edge_at(v, l).is_some()))
    }

    /// Breadth-first distances from the basepoint (unit edge lengths).
    pub fn distances(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.alive.len()];
        let o = self.basepoint();
        dist[o] = Some(0);
        let mut queue = VecDeque::from([o]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &e in &self.incidence[v] {
                let u = self.edge(e).other(v);
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Renumbers live vertices and edges contiguously. Returns the old-to-new
    /// vertex map.
    pub fn compact(&mut self) -> Vec<Option<VertexId>> {
        let basepoint = self.basepoint();
        let terminal = self.terminal();
        let mut map = vec![None; self.alive.len()];
        let mut next = 0;
        for v in 0..self.alive.len() {
            if self.alive[v] {
                map[v] = Some(next);
                next += 1;
            }
        }
        for v in 0..self.alive.len() {
            if !self.alive[v] {
                map[v] = map[self.find(v)];
            }
        }
        let mut out = SubgroupGraph {
            n_gens: self.n_gens,
            classes: Vec::with_capacity(next),
            alive: vec![true; next],
            parent: (0..next).collect(),
            edges: Vec::with_capacity(self.edge_count),
            incidence: vec![Vec::new(); next],
            basepoint: map[basepoint].expect("basepoint alive"),
            terminal: terminal.and_then(|t| map[t]),
            stage: self.stage,
            edge_count: 0,
            vertex_count: next,
            journal: None,
        };
        for v in 0..self.alive.len() {
            if self.alive[v] {
                out.classes.push(self.classes[v]);
            }
        }
        for (_, e) in self.edges() {
            let [u, v] = e.ends;
            out.add_edge_with_origin(
                map[u].expect("live end"),
                map[v].expect("live end"),
                e.label,
                e.provenance,
                e.origin,
            );
        }
        *self = out;
        map
    }

    /// Canonical form for equality tests: vertices renumbered in
    /// breadth-first order from the basepoint with edges visited by
    /// ascending label; the sorted edge list of the result. Meaningful for
    /// connected trim graphs.
    pub fn canonical_form(&self) -> CanonicalGraph {
        let mut order = vec![usize::MAX; self.alive.len()];
        let o = self.basepoint();
        order[o] = 0;
        let mut next = 1;
        let mut queue = VecDeque::from([o]);
        while let Some(v) = queue.pop_front() {
            let mut inc: Vec<EdgeId> = self.incidence[v].clone();
            inc.sort_by_key(|&e| self.edge(e).label);
            for e in inc {
                let u = self.edge(e).other(v);
                if order[u] == usize::MAX {
                    order[u] = next;
                    next += 1;
                    queue.push_back(u);
                }
            }
        }
        let mut edges: Vec<(usize, usize, Gen)> = self
            .edges()
            .filter(|(_, e)| order[e.ends[0]] != usize::MAX)
            .map(|(_, e)| {
                let (a, b) = (order[e.ends[0]], order[e.ends[1]]);
                (a.min(b), a.max(b), e.label)
            })
            .collect();
        edges.sort_unstable();
        CanonicalGraph {
            vertices: next,
            edges,
            terminal: self.terminal().map(|t| order[t]),
        }
    }

    pub fn is_connected(&self) -> bool {
        let dist = self.distances();
        self.vertices().all(|v| dist[v].is_some())
    }
}

fn stronger(a: VertexClass, b: VertexClass) -> VertexClass {
    use VertexClass::*;
    match (a, b) {
        (Primary, _) | (_, Primary) => Primary,
        (Critical, _) | (_, Critical) => Critical,
        _ => Secondary,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, Gen)>,
    pub terminal: Option<usize>,
}

/// One directed traversal of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Traversal {
    pub edge: EdgeId,
    pub from: VertexId,
    pub to: VertexId,
}

/// Maximal walk whose labels alternate between two generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternatingWalk {
    pub pair: (Gen, Gen),
    pub steps: Vec<Traversal>,
    pub closed: bool,
}

impl AlternatingWalk {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `k` when the walk is a closed loop spelling `(a_i a_j)^k`.
    pub fn period(&self) -> Option<usize> {
        self.closed.then_some(self.steps.len() / 2)
    }

    pub fn start(&self) -> VertexId {
        self.steps[0].from
    }

    pub fn end(&self) -> VertexId {
        self.steps[self.steps.len() - 1].to
    }

    pub fn labels<'a>(&'a self, g: &'a SubgroupGraph) -> impl Iterator<Item = Gen> + 'a {
        self.steps.iter().map(move |t| g.edge(t.edge).label)
    }

    /// Lies on a relator cycle of `(a_i a_j)^m`.
    pub fn on_relator_cycle(&self, m: u32) -> bool {
        self.period().is_some_and(|k| k > 0 && m as usize % k == 0)
    }
}

fn partner(label: Gen, pair: (Gen, Gen)) -> Gen {
    if label == pair.0 {
        pair.1
    } else {
        pair.0
    }
}

/// Maximal `(i, j)`-alternating walk through `e` in a trim graph.
///
/// Successive traversals are forced by trimness, so the walk is either a
/// closed cycle of traversals or an open sequence; it may pass an edge once
/// in each direction when it turns around at a loop.
pub fn alternating_walk(g: &SubgroupGraph, e: EdgeId, i: Gen, j: Gen) -> AlternatingWalk {
    let pair = (i, j);
    let edge = g.edge(e);
    debug_assert!(edge.label == i || edge.label == j);
    let first = Traversal {
        edge: e,
        from: edge.ends[0],
        to: edge.ends[1],
    };
    let mut forward = vec![first];
    let mut closed = false;
    loop {
        let cur = *forward.last().expect("nonempty");
        let want = partner(g.edge(cur.edge).label, pair);
        let Some(f) = g.edge_at(cur.to, want) else { break };
        let next = Traversal {
            edge: f,
            from: cur.to,
            to: g.edge(f).other(cur.to),
        };
        if next.edge == first.edge && next.from == first.from {
            closed = true;
            break;
        }
        forward.push(next);
    }
    if closed {
        return AlternatingWalk {
            pair,
            steps: forward,
            closed,
        };
    }
    let mut backward = Vec::new();
    let mut cur = first;
    loop {
        let want = partner(g.edge(cur.edge).label, pair);
        let Some(f) = g.edge_at(cur.from, want) else { break };
        let prev = Traversal {
            edge: f,
            from: g.edge(f).other(cur.from),
            to: cur.from,
        };
        backward.push(prev);
        cur = prev;
    }
    backward.reverse();
    backward.extend(forward);
    AlternatingWalk {
        pair,
        steps: backward,
        closed: false,
    }
}

/// Whether `e` lies on an `(i, j)`-relator cycle.
pub fn on_relator_cycle(
    g: &SubgroupGraph,
    p: &CoxeterPresentation,
    e: EdgeId,
    i: Gen,
    j: Gen,
) -> Result<bool, Error> {
    let m = p.related(i, j).ok_or(Error::Unrelated)?;
    Ok(alternating_walk(g, e, i, j).on_relator_cycle(m))
}

/// Every maximal `(i, j)`-walk of a trim graph exactly once, for each
/// related pair in ascending order and edges by ascending id.
pub fn all_alternating_walks(g: &SubgroupGraph, p: &CoxeterPresentation) -> Vec<AlternatingWalk> {
    let mut out = Vec::new();
    let cap = g.edges.len();
    for (i, j, _) in p.related_pairs() {
        let mut seen = vec![false; cap];
        for (id, e) in g.edges() {
            if seen[id] || (e.label != i && e.label != j) {
                continue;
            }
            let walk = alternating_walk(g, id, i, j);
            for t in &walk.steps {
                seen[t.edge] = true;
            }
            out.push(walk);
        }
    }
    out
}
