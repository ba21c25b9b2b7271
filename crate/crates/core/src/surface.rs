//! Subgroup graphs over surface groups.
//!
//! Generators have infinite order, so edges are directed: a letter `x` reads
//! an `x`-edge forwards and `x^-1` reads it backwards. Relator cycles are
//! closed paths spelling a cyclic conjugate of the standard relator `r` or of
//! its inverse; two consecutive letters fix the position inside `r`. Phase I
//! completes paths reading more than half of `r`; 2-completion then proceeds
//! as for Coxeter groups.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::graph::{Provenance, VertexClass, VertexId};
use crate::Error;

pub type EdgeId = usize;

/// `2 * generator + 1` for inverses.
pub type Letter = usize;

pub fn inverse(l: Letter) -> Letter {
    l ^ 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Orientable,
    Nonorientable,
}

#[derive(Clone, Debug)]
pub struct SurfacePresentation {
    pub kind: SurfaceKind,
    pub genus: usize,
    generators: usize,
    relator: Vec<Letter>,
    /// Position of each ordered pair of consecutive letters in cyclic `r`.
    pair_position: HashMap<(Letter, Letter), usize>,
}

impl SurfacePresentation {
    /// Orientable genus at least 2 or nonorientable genus at least 4, so that
    /// the relator has length at least 8.
    pub fn new(kind: SurfaceKind, genus: usize) -> Result<Self, Error> {
        let (generators, relator) = match kind {
            SurfaceKind::Orientable => {
                if genus < 2 {
                    return Err(Error::Surface(format!("orientable genus {genus} is below 2")));
                }
                let mut r = Vec::with_capacity(4 * genus);
                for i in 0..genus {
                    let (a, b) = (2 * (2 * i), 2 * (2 * i + 1));
                    r.extend([a, b, inverse(a), inverse(b)]);
                }
                (2 * genus, r)
            }
            SurfaceKind::Nonorientable => {
                if genus < 4 {
                    return Err(Error::Surface(format!("nonorientable genus {genus} is below 4")));
                }
                let r = (0..genus).flat_map(|i| [2 * i, 2 * i]).collect();
                (genus, r)
            }
        };
        let len = relator.len();
        let pair_position = (0..len)
            .map(|k| ((relator[k], relator[(k + 1) % len]), k))
            .collect();
        Ok(Self {
            kind,
            genus,
            generators,
            relator,
            pair_position,
        })
    }

    pub fn generator_count(&self) -> usize {
        self.generators
    }

    pub fn letter_count(&self) -> usize {
        2 * self.generators
    }

    pub fn relator(&self) -> &[Letter] {
        &self.relator
    }

    pub fn relator_length(&self) -> usize {
        self.relator.len()
    }

    /// `h`, half the relator length.
    pub fn half_length(&self) -> usize {
        self.relator.len() / 2
    }

    /// Letter at cyclic position `k` of `r`.
    pub fn at(&self, k: usize) -> Letter {
        self.relator[k % self.relator.len()]
    }

    /// Position `k` with `r[k] r[k+1] = x y`.
    pub fn pair_position(&self, x: Letter, y: Letter) -> Option<usize> {
        self.pair_position.get(&(x, y)).copied()
    }

    /// Every cyclic conjugate of `r` and `r^-1`.
    pub fn symmetrized(&self) -> Vec<Vec<Letter>> {
        let len = self.relator.len();
        let inv: Vec<Letter> = self.relator.iter().rev().map(|&l| inverse(l)).collect();
        let mut out = Vec::with_capacity(2 * len);
        for word in [&self.relator, &inv] {
            for k in 0..len {
                out.push((0..len).map(|i| word[(k + i) % len]).collect());
            }
        }
        out
    }

    fn generator_name(&self, g: usize) -> String {
        match self.kind {
            SurfaceKind::Orientable => {
                let letter = if g % 2 == 0 { 'a' } else { 'b' };
                format!("{letter}{}", g / 2 + 1)
            }
            SurfaceKind::Nonorientable => format!("a{}", g + 1),
        }
    }

    pub fn letter_name(&self, l: Letter) -> String {
        let base = self.generator_name(l / 2);
        if l % 2 == 1 {
            format!("{base}'")
        } else {
            base
        }
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "ε".into();
        }
        w.iter().map(|&l| self.letter_name(l)).collect()
    }

    /// Parses `a1 b1 a1' b1'` or `a1b1a1-b1-`; `ε` or empty input is the
    /// identity.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Letter>, Error> {
        let compact: String = text.split_whitespace().collect();
        if compact.is_empty() || compact == "ε" {
            return Ok(Vec::new());
        }
        let chars: Vec<char> = compact.chars().collect();
        let mut out = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            let is_b = match (c, self.kind) {
                ('a', _) => false,
                ('b', SurfaceKind::Orientable) => true,
                _ => return Err(Error::Word(format!("unexpected `{c}` in `{text}`"))),
            };
            k += 1;
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let index: usize = chars[start..k]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::Word(format!("missing index in `{text}`")))?;
            if index == 0 || index > self.genus {
                return Err(Error::Word(format!("index {index} out of range in `{text}`")));
            }
            let g = match self.kind {
                SurfaceKind::Orientable => 2 * (index - 1) + usize::from(is_b),
                SurfaceKind::Nonorientable => index - 1,
            };
            let inverted = k < chars.len() && matches!(chars[k], '\'' | '-');
            if inverted {
                k += 1;
            }
            out.push(2 * g + usize::from(inverted));
        }
        Ok(out)
    }
}

pub fn invert_word(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|&l| inverse(l)).collect()
}

pub fn free_reduce(w: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&inverse(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Longest suffix of `w` spelling consecutive letters of cyclic `r` or
/// `r^-1`: `(length, start position in r, reads r forwards)`.
fn relator_suffix(sp: &SurfacePresentation, w: &[Letter]) -> Option<(usize, usize, bool)> {
    let n = w.len();
    if n < 2 {
        return None;
    }
    let len = sp.relator_length();
    let (x, y) = (w[n - 2], w[n - 1]);
    if let Some(k) = sp.pair_position(x, y) {
        // w[n-1] = r[k+1], extending backwards through r
        let mut matched = 2;
        while matched < n.min(len) && w[n - 1 - matched] == sp.at(k + len * 2 + 1 - matched) {
            matched += 1;
        }
        let start = (k + 2 * len + 2 - matched) % len;
        return Some((matched, start, true));
    }
    // x y in r^-1 means y^-1 x^-1 in r
    if let Some(k) = sp.pair_position(inverse(y), inverse(x)) {
        let mut matched = 2;
        while matched < n.min(len) && inverse(w[n - 1 - matched]) == sp.at(k + matched) {
            matched += 1;
        }
        return Some((matched, k, false));
    }
    None
}

/// Free reduction together with replacing any factor of more than half of a
/// relator by the inverse of the complementary factor.
pub fn dehn_reduce(sp: &SurfacePresentation, w: &[Letter]) -> Vec<Letter> {
    let len = sp.relator_length();
    let h = sp.half_length();
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    let mut pending: Vec<Letter> = w.iter().rev().copied().collect();
    while let Some(l) = pending.pop() {
        if out.last() == Some(&inverse(l)) {
            out.pop();
            continue;
        }
        out.push(l);
        let Some((matched, start, forwards)) = relator_suffix(sp, &out) else { continue };
        if matched <= h {
            continue;
        }
        out.truncate(out.len() - matched);
        // the factor u and the rest c of the relator satisfy u = c^-1
        let rest: Vec<Letter> = (matched..len).map(|i| sp.at(start + i)).collect();
        let replacement = if forwards { invert_word(&rest) } else { rest };
        pending.extend(replacement.into_iter().rev());
    }
    out
}

pub fn is_dehn_reduced(sp: &SurfacePresentation, w: &[Letter]) -> bool {
    dehn_reduce(sp, w) == w
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedEdge {
    pub tail: VertexId,
    pub head: VertexId,
    pub generator: usize,
    pub provenance: Provenance,
}

impl DirectedEdge {
    /// Letter read leaving `v` along this edge, with the far end.
    fn ends_at(&self, v: VertexId) -> impl Iterator<Item = (Letter, VertexId)> {
        let forward = (self.tail == v).then_some((2 * self.generator, self.head));
        let backward = (self.head == v).then_some((2 * self.generator + 1, self.tail));
        forward.into_iter().chain(backward)
    }
}

/// A directed labeled graph with a basepoint; same conventions as
/// [`crate::graph::SubgroupGraph`].
#[derive(Clone, Debug)]
pub struct SurfaceGraph {
    letters: usize,
    classes: Vec<VertexClass>,
    alive: Vec<bool>,
    parent: Vec<VertexId>,
    edges: Vec<Option<DirectedEdge>>,
    incidence: Vec<Vec<EdgeId>>,
    basepoint: VertexId,
    edge_count: usize,
    vertex_count: usize,
    touched: Option<Vec<VertexId>>,
}

impl SurfaceGraph {
    pub fn new(sp: &SurfacePresentation) -> Self {
        let mut g = Self {
            letters: sp.letter_count(),
            classes: Vec::new(),
            alive: Vec::new(),
            parent: Vec::new(),
            edges: Vec::new(),
            incidence: Vec::new(),
            basepoint: 0,
            edge_count: 0,
            vertex_count: 0,
            touched: None,
        };
        g.basepoint = g.add_vertex(VertexClass::Primary);
        g
    }

    pub fn bouquet(sp: &SurfacePresentation, gens: &[Vec<Letter>]) -> Result<Self, Error> {
        let mut g = Self::new(sp);
        for h in gens {
            if let Some(&bad) = h.iter().find(|&&l| l >= sp.letter_count()) {
                return Err(Error::Surface(format!("letter {bad} out of range")));
            }
            let o = g.basepoint;
            g.add_path(o, Some(o), h, Provenance::Primary);
        }
        Ok(g)
    }

    pub fn basepoint(&self) -> VertexId {
        self.find(self.basepoint)
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

    fn touch(&mut self, v: VertexId) {
        if let Some(t) = &mut self.touched {
            t.push(v);
        }
    }

    /// Adds an edge reading `l` from `from` to `to`.
    pub fn add_letter_edge(&mut self, from: VertexId, to: VertexId, l: Letter, provenance: Provenance) -> EdgeId {
        let (from, to) = (self.find(from), self.find(to));
        let (tail, head) = if l % 2 == 0 { (from, to) } else { (to, from) };
        let id = self.edges.len();
        self.edges.push(Some(DirectedEdge {
            tail,
            head,
            generator: l / 2,
            provenance,
        }));
        self.incidence[tail].push(id);
        if head != tail {
            self.incidence[head].push(id);
        }
        self.edge_count += 1;
        self.touch(tail);
        self.touch(head);
        id
    }

    /// Adds a path reading `letters`; see [`crate::graph::SubgroupGraph::add_path`].
    pub fn add_path(
        &mut self,
        from: VertexId,
        to: Option<VertexId>,
        letters: &[Letter],
        provenance: Provenance,
    ) -> VertexId {
        let class = match provenance {
            Provenance::Primary => VertexClass::Primary,
            Provenance::Secondary => VertexClass::Secondary,
        };
        if letters.is_empty() {
            return match to {
                Some(t) => self.merge(from, t),
                None => from,
            };
        }
        let mut cur = from;
        for (k, &l) in letters.iter().enumerate() {
            let next = if k + 1 == letters.len() {
                to.unwrap_or_else(|| self.add_vertex(class))
            } else {
                self.add_vertex(class)
            };
            self.add_letter_edge(cur, next, l, provenance);
            cur = next;
        }
        cur
    }

    fn remove_edge(&mut self, e: EdgeId) {
        if let Some(edge) = self.edges[e].take() {
            for v in [edge.tail, edge.head] {
                if let Some(pos) = self.incidence[v].iter().position(|&x| x == e) {
                    self.incidence[v].swap_remove(pos);
                }
                self.touch(v);
            }
            self.edge_count -= 1;
        }
    }

    pub fn find(&self, mut v: VertexId) -> VertexId {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.alive.len()).filter(move |&v| self.alive[v])
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &DirectedEdge)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(id, e)| e.as_ref().map(|e| (id, e)))
    }

    pub fn edge(&self, e: EdgeId) -> &DirectedEdge {
        self.edges[e].as_ref().expect("edge was removed")
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

    /// `(letter, edge, far end)` for every edge end at `v`; a loop gives two.
    pub fn ends(&self, v: VertexId) -> Vec<(Letter, EdgeId, VertexId)> {
        let mut out = Vec::with_capacity(self.incidence[v].len() + 1);
        for &e in &self.incidence[v] {
            for (l, u) in self.edge(e).ends_at(v) {
                out.push((l, e, u));
            }
        }
        out
    }

    /// Number of edge ends at `v`.
    pub fn degree(&self, v: VertexId) -> usize {
        self.ends(v).len()
    }

    pub fn read(&self, v: VertexId, l: Letter) -> Option<VertexId> {
        self.incidence[v].iter().find_map(|&e| {
            self.edge(e)
                .ends_at(v)
                .find(|&(x, _)| x == l)
                .map(|(_, u)| u)
        })
    }

    fn read_edge(&self, v: VertexId, l: Letter) -> Option<(EdgeId, VertexId)> {
        self.incidence[v].iter().find_map(|&e| {
            self.edge(e)
                .ends_at(v)
                .find(|&(x, _)| x == l)
                .map(|(_, u)| (e, u))
        })
    }

    pub fn trace(&self, v: VertexId, w: &[Letter]) -> Option<VertexId> {
        let mut cur = self.find(v);
        for &l in w {
            cur = self.read(cur, l)?;
        }
        Some(cur)
    }

    pub fn is_trim(&self) -> bool {
        self.vertices().all(|v| {
            let mut seen = vec![false; self.letters];
            self.ends(v).iter().all(|&(l, _, _)| !std::mem::replace(&mut seen[l], true))
        })
    }

    /// Every letter can be read at every vertex.
    pub fn is_full(&self) -> bool {
        self.vertices().all(|v| {
            let mut seen = vec![false; self.letters];
            for (l, _, _) in self.ends(v) {
                seen[l] = true;
            }
            seen.into_iter().all(|s| s)
        })
    }

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
        for e in std::mem::take(&mut self.incidence[gone]) {
            let edge = self.edges[e].as_mut().expect("live incidence");
            let was_between = edge.tail == keep || edge.head == keep;
            if edge.tail == gone {
                edge.tail = keep;
            }
            if edge.head == gone {
                edge.head = keep;
            }
            if !was_between {
                self.incidence[keep].push(e);
            }
        }
        if self.classes[gone] == VertexClass::Primary {
            self.classes[keep] = VertexClass::Primary;
        }
        self.alive[gone] = false;
        self.parent[gone] = keep;
        self.vertex_count -= 1;
        self.touch(keep);
        keep
    }

    /// Folds until trim.
    pub fn fold(&mut self) {
        let mut stack: Vec<VertexId> = self.vertices().collect();
        while let Some(v) = stack.pop() {
            if !self.alive[v] {
                continue;
            }
            'scan: loop {
                let mut slot: HashMap<Letter, (EdgeId, VertexId)> = HashMap::new();
                for (l, e, u) in self.ends(v) {
                    let Some(&(e1, u1)) = slot.get(&l) else {
                        slot.insert(l, (e, u));
                        continue;
                    };
                    if e1 == e {
                        continue;
                    }
                    let drop = if self.edge(e).provenance == Provenance::Primary
                        && self.edge(e1).provenance != Provenance::Primary
                    {
                        e1
                    } else {
                        e
                    };
                    self.remove_edge(drop);
                    if u1 != u {
                        let keep = self.merge(u1, u);
                        stack.push(keep);
                    }
                    let now = self.find(v);
                    if now != v {
                        stack.push(now);
                        break 'scan;
                    }
                    continue 'scan;
                }
                break;
            }
        }
    }

    /// Breadth-first distances from the basepoint, ignoring orientation.
    pub fn distances(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.alive.len()];
        let o = self.basepoint();
        dist[o] = Some(0);
        let mut queue = VecDeque::from([o]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for (_, _, u) in self.ends(v) {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    fn primary_count(&self) -> usize {
        self.vertices()
            .filter(|&v| self.classes[v] == VertexClass::Primary)
            .count()
    }
}

/// One step of a relator walk: from `from`, about to read `r[pos]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RelatorStep {
    pub from: VertexId,
    pub pos: usize,
    pub edge: EdgeId,
    pub to: VertexId,
}

/// Maximal path reading consecutive letters of cyclic `r`.
#[derive(Clone, Debug)]
pub struct RelatorWalk {
    pub steps: Vec<RelatorStep>,
    pub closed: bool,
}

impl RelatorWalk {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Closed after exactly one copy of `r`.
    pub fn is_relator_cycle(&self, sp: &SurfacePresentation) -> bool {
        self.closed && self.steps.len() == sp.relator_length()
    }
}

fn step_from(g: &SurfaceGraph, sp: &SurfacePresentation, v: VertexId, pos: usize) -> Option<RelatorStep> {
    let (edge, to) = g.read_edge(v, sp.at(pos))?;
    Some(RelatorStep { from: v, pos, edge, to })
}

/// The maximal relator walk through the step reading `r[pos]` from `v`.
pub fn relator_walk(g: &SurfaceGraph, sp: &SurfacePresentation, v: VertexId, pos: usize) -> Option<RelatorWalk> {
    let len = sp.relator_length();
    let first = step_from(g, sp, v, pos)?;
    let mut forward = vec![first];
    loop {
        let cur = *forward.last().expect("nonempty");
        let Some(next) = step_from(g, sp, cur.to, (cur.pos + 1) % len) else { break };
        if next.from == first.from && next.pos == first.pos {
            return Some(RelatorWalk {
                steps: forward,
                closed: true,
            });
        }
        forward.push(next);
    }
    let mut backward = Vec::new();
    let mut cur = first;
    loop {
        let pos = (cur.pos + len - 1) % len;
        let Some((edge, prev)) = g.read_edge(cur.from, inverse(sp.at(pos))) else { break };
        let step = RelatorStep {
            from: prev,
            pos,
            edge,
            to: cur.from,
        };
        backward.push(step);
        cur = step;
    }
    backward.reverse();
    backward.extend(forward);
    Some(RelatorWalk {
        steps: backward,
        closed: false,
    })
}

/// Both positions of `r` at which edge `e` can be read, as walk starts.
fn edge_slots(g: &SurfaceGraph, sp: &SurfacePresentation, e: EdgeId) -> Vec<(VertexId, usize)> {
    let edge = g.edge(e);
    let x = 2 * edge.generator;
    (0..sp.relator_length())
        .filter_map(|k| {
            let l = sp.at(k);
            if l == x {
                Some((edge.tail, k))
            } else if l == inverse(x) {
                Some((edge.head, k))
            } else {
                None
            }
        })
        .collect()
}

/// Every maximal relator walk once.
pub fn all_relator_walks(g: &SurfaceGraph, sp: &SurfacePresentation) -> Vec<RelatorWalk> {
    let mut seen: HashSet<(EdgeId, usize)> = HashSet::new();
    let mut out = Vec::new();
    for (e, _) in g.edges() {
        for (v, k) in edge_slots(g, sp, e) {
            if seen.contains(&(e, k)) {
                continue;
            }
            let walk = relator_walk(g, sp, v, k).expect("slot is readable");
            for s in &walk.steps {
                seen.insert((s.edge, s.pos));
            }
            out.push(walk);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SurfaceCount {
    pub missing_total: usize,
    pub edge_count: usize,
    pub gamma: usize,
}

/// `gamma_s = h * missing + edges`, counting for every edge the relator
/// cycles through it that are absent.
pub fn count_gamma(g: &SurfaceGraph, sp: &SurfacePresentation) -> SurfaceCount {
    let mut missing_total = 0;
    for walk in all_relator_walks(g, sp) {
        if !walk.is_relator_cycle(sp) {
            let slots: HashSet<(EdgeId, usize)> = walk.steps.iter().map(|s| (s.edge, s.pos)).collect();
            missing_total += slots.len();
        }
    }
    SurfaceCount {
        missing_total,
        edge_count: g.edge_count(),
        gamma: sp.half_length() * missing_total + g.edge_count(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repair {
    Chain {
        from: VertexId,
        to: VertexId,
        letters: Vec<Letter>,
    },
    Identify(VertexId, VertexId),
}

fn classify(sp: &SurfacePresentation, walk: &RelatorWalk) -> Option<Repair> {
    let len = sp.relator_length();
    let first = walk.steps[0];
    if walk.closed {
        if walk.steps.len() == len {
            return None;
        }
        return Some(Repair::Identify(first.from, walk.steps[len].from));
    }
    if walk.steps.len() >= len {
        return Some(Repair::Identify(first.from, walk.steps[len - 1].to));
    }
    if walk.steps.len() > sp.half_length() {
        let last = walk.steps[walk.steps.len() - 1];
        let letters = (walk.steps.len()..len).map(|i| sp.at(first.pos + i)).collect();
        return Some(Repair::Chain {
            from: last.to,
            to: first.from,
            letters,
        });
    }
    None
}

fn find_repair(g: &SurfaceGraph, sp: &SurfacePresentation) -> Option<Repair> {
    all_relator_walks(g, sp).iter().find_map(|w| classify(sp, w))
}

/// No path reads more than half of a relator unless it lies on a relator
/// cycle.
pub fn has_half_relator_property(g: &SurfaceGraph, sp: &SurfacePresentation) -> bool {
    find_repair(g, sp).is_none()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SurfacePhaseOneReport {
    pub steps: usize,
    pub gamma_history: Vec<usize>,
}

/// Folds and completes paths reading more than half of a relator until
/// neither applies, checking that `gamma_s` strictly decreases.
pub fn phase1(
    g: &mut SurfaceGraph,
    sp: &SurfacePresentation,
    budget: Option<usize>,
) -> Result<SurfacePhaseOneReport, Error> {
    let mut report = SurfacePhaseOneReport::default();
    g.fold();
    let mut gamma = count_gamma(g, sp).gamma;
    report.gamma_history.push(gamma);
    while let Some(repair) = find_repair(g, sp) {
        if budget.is_some_and(|b| report.steps >= b) {
            return Err(Error::BudgetExhausted(report.steps));
        }
        report.steps += 1;
        match repair {
            Repair::Chain { from, to, letters } => {
                g.add_path(from, Some(to), &letters, Provenance::Primary);
            }
            Repair::Identify(a, b) => {
                g.merge(a, b);
            }
        }
        g.fold();
        let after = count_gamma(g, sp).gamma;
        report.gamma_history.push(after);
        if after >= gamma {
            return Err(Error::GammaNotDecreasing {
                step: report.steps,
                before: gamma,
                after,
            });
        }
        gamma = after;
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SurfaceCompletionReport {
    pub path_chains: usize,
    pub pair_chains: usize,
    pub shortest_chain: Option<usize>,
    pub critical: Vec<VertexId>,
}

fn close_walk(g: &mut SurfaceGraph, sp: &SurfacePresentation, walk: &RelatorWalk) -> usize {
    let first = walk.steps[0];
    let last = walk.steps[walk.steps.len() - 1];
    let letters: Vec<Letter> = (walk.steps.len()..sp.relator_length())
        .map(|i| sp.at(first.pos + i))
        .collect();
    g.add_path(last.to, Some(first.from), &letters, Provenance::Secondary);
    letters.len()
}

fn fold_keeping_primary(g: &mut SurfaceGraph) -> Result<(), Error> {
    let before = g.primary_count();
    g.fold();
    if g.primary_count() != before {
        return Err(Error::Completion("folding identified primary vertices".into()));
    }
    Ok(())
}

/// Relator walk through the two-letter path `u -a-> v -b-> w` formed by two
/// ends at `v`, if those letters are consecutive in `r` or `r^-1`.
fn pair_walk(
    g: &SurfaceGraph,
    sp: &SurfacePresentation,
    a: (Letter, VertexId),
    b: (Letter, VertexId),
) -> Option<RelatorWalk> {
    let (la, ua) = a;
    let (lb, ub) = b;
    // u_a -> v reads la^-1, then v -> u_b reads lb
    if let Some(k) = sp.pair_position(inverse(la), lb) {
        return relator_walk(g, sp, ua, k);
    }
    // the same path backwards reads lb^-1 la
    if let Some(k) = sp.pair_position(inverse(lb), la) {
        return relator_walk(g, sp, ub, k);
    }
    None
}

fn pair_on_cycle(g: &SurfaceGraph, sp: &SurfacePresentation, a: (Letter, VertexId), b: (Letter, VertexId)) -> bool {
    pair_walk(g, sp, a, b).is_some_and(|w| w.is_relator_cycle(sp))
}

fn mark_critical(g: &mut SurfaceGraph) -> Vec<VertexId> {
    let mut critical = BTreeSet::new();
    for (_, e) in g.edges() {
        if e.provenance != Provenance::Secondary {
            continue;
        }
        for (a, b) in [(e.tail, e.head), (e.head, e.tail)] {
            if g.classes[a] == VertexClass::Primary && g.classes[b] != VertexClass::Primary {
                critical.insert(b);
            }
        }
    }
    for v in g.vertices().collect::<Vec<_>>() {
        if g.classes[v] != VertexClass::Primary {
            g.classes[v] = if critical.contains(&v) {
                VertexClass::Critical
            } else {
                VertexClass::Secondary
            };
        }
    }
    critical.into_iter().collect()
}

/// First pair of ends at `v` reading two consecutive relator letters off a
/// relator cycle.
fn open_pair_at(g: &SurfaceGraph, sp: &SurfacePresentation, v: VertexId) -> Option<RelatorWalk> {
    let ends = g.ends(v);
    for (i, &(la, ea, ua)) in ends.iter().enumerate() {
        for &(lb, eb, ub) in &ends[i + 1..] {
            if ea == eb && la == inverse(lb) && ua == ub && ua == v {
                continue;
            }
            if let Some(walk) = pair_walk(g, sp, (la, ua), (lb, ub)) {
                if !walk.is_relator_cycle(sp) {
                    return Some(walk);
                }
            }
        }
    }
    None
}

/// 2-completion of a graph with the half-relator property.
pub fn two_complete(g: &mut SurfaceGraph, sp: &SurfacePresentation) -> Result<SurfaceCompletionReport, Error> {
    let mut report = SurfaceCompletionReport::default();
    for v in g.vertices().collect::<Vec<_>>() {
        g.classes[v] = VertexClass::Primary;
    }
    for e in 0..g.edges.len() {
        if let Some(edge) = &mut g.edges[e] {
            edge.provenance = Provenance::Primary;
        }
    }

    let mut pending = Vec::new();
    for walk in all_relator_walks(g, sp) {
        if walk.closed {
            if !walk.is_relator_cycle(sp) {
                return Err(Error::RelatorPathProperty(format!(
                    "closed walk of {} letters is not a relator cycle",
                    walk.len()
                )));
            }
            continue;
        }
        if walk.len() < 2 {
            continue;
        }
        if walk.len() > sp.half_length() {
            return Err(Error::RelatorPathProperty(format!(
                "open walk reads {} letters of the relator",
                walk.len()
            )));
        }
        pending.push(walk);
    }
    for walk in pending {
        let added = close_walk(g, sp, &walk);
        report.path_chains += 1;
        report.shortest_chain = Some(report.shortest_chain.map_or(added, |s| s.min(added)));
    }
    fold_keeping_primary(g)?;
    mark_critical(g);

    let mut worklist: BTreeSet<VertexId> = g
        .vertices()
        .filter(|&v| g.classes[v] == VertexClass::Primary)
        .collect();
    let cap = 4 * (g.edge_count() + 1) * sp.letter_count();
    let mut rounds = 0;
    g.touched = Some(Vec::new());
    while let Some(v) = worklist.pop_first() {
        if !g.alive[v] {
            continue;
        }
        let Some(walk) = open_pair_at(g, sp, v) else { continue };
        rounds += 1;
        if walk.closed || walk.len() >= sp.relator_length() || rounds > cap {
            g.touched = None;
            return Err(Error::Completion(format!("pair at vertex {v} cannot be closed")));
        }
        let added = close_walk(g, sp, &walk);
        report.pair_chains += 1;
        report.shortest_chain = Some(report.shortest_chain.map_or(added, |s| s.min(added)));
        if let Err(e) = fold_keeping_primary(g) {
            g.touched = None;
            return Err(e);
        }
        worklist.insert(g.find(v));
        for u in g.touched.replace(Vec::new()).unwrap_or_default() {
            let u = g.find(u);
            if g.classes[u] == VertexClass::Primary {
                worklist.insert(u);
            }
        }
    }
    g.touched = None;
    report.critical = mark_critical(g);
    if let Some(v) = two_completeness_violation(g, sp) {
        return Err(Error::Completion(v));
    }
    Ok(report)
}

/// First violation of the 2-completeness condition with the exceptional
/// configuration allowed, or a repeated letter at a vertex.
pub fn two_completeness_violation(g: &SurfaceGraph, sp: &SurfacePresentation) -> Option<String> {
    for v in g.vertices() {
        let ends = g.ends(v);
        let mut seen = HashSet::new();
        for &(l, _, _) in &ends {
            if !seen.insert(l) {
                return Some(format!("letter {} read twice at vertex {v}", sp.letter_name(l)));
            }
        }
        for (i, &(la, _, ua)) in ends.iter().enumerate() {
            for (j, &(lb, _, _)) in ends.iter().enumerate() {
                if i == j {
                    continue;
                }
                // path u_a -> v -> u_b reading la^-1 lb
                let Some(k) = sp.pair_position(inverse(la), lb) else { continue };
                let on = relator_walk(g, sp, ua, k).is_some_and(|w| w.is_relator_cycle(sp));
                if on || exceptional(g, sp, &ends, i, j) {
                    continue;
                }
                return Some(format!(
                    "{}{} through vertex {v} is not on a relator cycle",
                    sp.letter_name(inverse(la)),
                    sp.letter_name(lb)
                ));
            }
        }
    }
    None
}

fn exceptional(
    g: &SurfaceGraph,
    sp: &SurfacePresentation,
    ends: &[(Letter, EdgeId, VertexId)],
    i: usize,
    j: usize,
) -> bool {
    let (la, _, ua) = ends[i];
    let (lb, _, ub) = ends[j];
    if g.degree(ua) != 2 || g.degree(ub) != 2 {
        return false;
    }
    ends.iter().enumerate().any(|(c, &(lc, _, uc))| {
        c != i
            && c != j
            && pair_on_cycle(g, sp, (lc, uc), (la, ua))
            && pair_on_cycle(g, sp, (lc, uc), (lb, ub))
    })
}

pub fn is_two_complete(g: &SurfaceGraph, sp: &SurfacePresentation) -> bool {
    two_completeness_violation(g, sp).is_none()
}

#[derive(Clone, Debug)]
pub struct SurfaceBuild {
    pub delta1: SurfaceGraph,
    pub delta2: SurfaceGraph,
    pub phase1: SurfacePhaseOneReport,
    pub completion: SurfaceCompletionReport,
}

pub fn build(sp: &SurfacePresentation, gens: &[Vec<Letter>], budget: Option<usize>) -> Result<SurfaceBuild, Error> {
    let mut g = SurfaceGraph::bouquet(sp, gens)?;
    let phase1 = phase1(&mut g, sp, budget)?;
    let delta1 = g.clone();
    let completion = two_complete(&mut g, sp)?;
    Ok(SurfaceBuild {
        delta1,
        delta2: g,
        phase1,
        completion,
    })
}

pub fn is_member(g: &SurfaceGraph, sp: &SurfacePresentation, w: &[Letter]) -> bool {
    let reduced = dehn_reduce(sp, w);
    g.trace(g.basepoint(), &reduced) == Some(g.basepoint())
}

pub fn diameter(g: &SurfaceGraph) -> usize {
    g.distances().into_iter().flatten().max().unwrap_or(0)
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceReport {
    pub kind: SurfaceKind,
    pub genus: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub full: bool,
    pub diameter: usize,
    pub memberships: Vec<(String, bool)>,
}

pub fn analyse(g: &SurfaceGraph, sp: &SurfacePresentation, words: &[Vec<Letter>]) -> SurfaceReport {
    SurfaceReport {
        kind: sp.kind,
        genus: sp.genus,
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        full: g.is_full(),
        diameter: diameter(g),
        memberships: words
            .iter()
            .map(|w| (sp.format_word(w), is_member(g, sp, w)))
            .collect(),
    }
}

impl fmt::Display for SurfaceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:?} surface group of genus {}: {} vertices, {} edges",
            self.kind, self.genus, self.vertex_count, self.edge_count
        )?;
        writeln!(f, "full: {}  diameter: {}", self.full, self.diameter)?;
        for (w, m) in &self.memberships {
            writeln!(f, "{w}: {}", if *m { "member" } else { "not a member" })?;
        }
        Ok(())
    }
}
