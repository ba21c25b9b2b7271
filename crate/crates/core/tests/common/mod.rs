//! Oracles written independently of the library algorithms.
//!
//! * `nf`: shortlex minimum of the closure under square deletion and braid
//!   swaps, by breadth-first search.
//! * `SubgroupElements`: normal forms of all products of at most `depth`
//!   generators and their inverses.
//! * `eccentricity`: breadth-first search over the raw edge list.
//!
//! Random subgroups come from `coxgraph::sampling` with fixed seeds: each
//! generator is a random walk without immediate repeats, Dehn-reduced.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};

use coxgraph::sampling::{random_subgroup, rng};
use coxgraph::{CoxeterPresentation, Gen, SubgroupGraph, Word};

pub fn g4() -> CoxeterPresentation {
    CoxeterPresentation::uniform(3, 4).unwrap()
}

pub fn g6() -> CoxeterPresentation {
    CoxeterPresentation::uniform(3, 6).unwrap()
}

pub fn w(letters: &[usize]) -> Word {
    Word::from_one_based(letters)
}

pub fn shortlex(a: &[Gen], b: &[Gen]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

fn moves(p: &CoxeterPresentation, u: &[Gen]) -> Vec<Vec<Gen>> {
    let mut out = Vec::new();
    for i in 0..u.len().saturating_sub(1) {
        let (x, y) = (u[i], u[i + 1]);
        if x == y {
            out.push([&u[..i], &u[i + 2..]].concat());
            continue;
        }
        let Some(m) = p.related(x, y) else { continue };
        let m = m as usize;
        if i + m <= u.len() && (0..m).all(|k| u[i + k] == if k % 2 == 0 { x } else { y }) {
            let mut v = u.to_vec();
            for k in 0..m {
                v[i + k] = if k % 2 == 0 { y } else { x };
            }
            out.push(v);
        }
    }
    out
}

/// Every word reachable by the moves; none is longer than `u`.
pub fn closure(p: &CoxeterPresentation, u: &[Gen]) -> HashSet<Vec<Gen>> {
    let mut seen = HashSet::from([u.to_vec()]);
    let mut queue = VecDeque::from([u.to_vec()]);
    while let Some(v) = queue.pop_front() {
        for x in moves(p, &v) {
            if seen.insert(x.clone()) {
                queue.push_back(x);
            }
        }
    }
    seen
}

pub fn nf(p: &CoxeterPresentation, u: &[Gen]) -> Vec<Gen> {
    closure(p, u)
        .into_iter()
        .min_by(|a, b| shortlex(a, b))
        .unwrap_or_default()
}

/// Normal form of `a x` for a normal form `a`, one letter at a time.
pub fn times_letter(p: &CoxeterPresentation, a: &[Gen], x: Gen) -> Vec<Gen> {
    let mut u = a.to_vec();
    u.push(x);
    nf(p, &u)
}

pub fn times(p: &CoxeterPresentation, a: &[Gen], h: &[Gen]) -> Vec<Gen> {
    h.iter().fold(a.to_vec(), |acc, &x| times_letter(p, &acc, x))
}

/// Elements of `H` reachable as products of at most `depth` generators.
pub struct SubgroupElements {
    pub elements: HashSet<Vec<Gen>>,
}

impl SubgroupElements {
    pub fn enumerate(p: &CoxeterPresentation, gens: &[Word], depth: usize) -> Self {
        let mut pool: Vec<Vec<Gen>> = gens.iter().map(|h| h.letters().to_vec()).collect();
        pool.extend(gens.iter().map(|h| h.letters().iter().rev().copied().collect::<Vec<_>>()));
        let mut elements: HashSet<Vec<Gen>> = HashSet::from([Vec::new()]);
        let mut frontier = vec![Vec::new()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for a in &frontier {
                for h in &pool {
                    let b = times(p, a, h);
                    if elements.insert(b.clone()) {
                        next.push(b);
                    }
                }
            }
            frontier = next;
        }
        SubgroupElements { elements }
    }

    pub fn contains_nf(&self, normal: &[Gen]) -> bool {
        self.elements.contains(normal)
    }
}

/// Normal forms of every word of length at most `max_len`, memoised.
pub struct NormalForms {
    pub table: HashMap<Vec<Gen>, Vec<Gen>>,
}

impl NormalForms {
    pub fn up_to(p: &CoxeterPresentation, max_len: usize) -> Self {
        let n = p.generator_count();
        let mut table = HashMap::from([(Vec::new(), Vec::new())]);
        let mut layer: Vec<Vec<Gen>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * n);
            for u in &layer {
                for x in 0..n {
                    let mut v = u.clone();
                    v.push(x);
                    let normal = times_letter(p, &table[u], x);
                    table.insert(v.clone(), normal);
                    next.push(v);
                }
            }
            layer = next;
        }
        NormalForms { table }
    }

    pub fn words(&self) -> impl Iterator<Item = &Vec<Gen>> {
        self.table.keys()
    }
}

/// Largest breadth-first distance from the basepoint over the edge list.
pub fn eccentricity(g: &SubgroupGraph) -> usize {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (_, e) in g.edges() {
        adj.entry(e.ends[0]).or_default().push(e.ends[1]);
        adj.entry(e.ends[1]).or_default().push(e.ends[0]);
    }
    let mut dist = HashMap::from([(g.basepoint(), 0usize)]);
    let mut queue = VecDeque::from([g.basepoint()]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        for &u in adj.get(&v).into_iter().flatten() {
            if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(u) {
                slot.insert(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist.values().copied().max().unwrap_or(0)
}

/// Seed of the random suite.
pub const SUITE_SEED: u64 = 20_240_601;

/// Number of random subgroups in the suite.
pub const SUITE_SIZE: usize = 20;

/// Subgroups of G6 with at most three generators of length at most six.
pub fn random_suite(p: &CoxeterPresentation) -> Vec<Vec<Word>> {
    let mut r = rng(SUITE_SEED);
    (0..SUITE_SIZE)
        .map(|_| random_subgroup(p, 3, 6, &mut r).unwrap())
        .collect()
}

/// Surface word problem by Dehn's algorithm, written from scratch: free
/// cancellation, then any factor of more than half of a cyclic conjugate of
/// `r` or `r^-1` is replaced by the inverse of the rest, until neither applies.
pub struct SurfaceOracle {
    relators: Vec<Vec<usize>>,
    half: usize,
}

pub fn inverse_letters(u: &[usize]) -> Vec<usize> {
    u.iter().rev().map(|&l| l ^ 1).collect()
}

impl SurfaceOracle {
    pub fn new(relator: &[usize]) -> Self {
        let len = relator.len();
        let mut relators = Vec::new();
        for r in [relator.to_vec(), inverse_letters(relator)] {
            for k in 0..len {
                relators.push((0..len).map(|i| r[(k + i) % len]).collect());
            }
        }
        SurfaceOracle { relators, half: len / 2 }
    }

    fn free(u: &mut Vec<usize>) -> bool {
        for i in 0..u.len().saturating_sub(1) {
            if u[i] == u[i + 1] ^ 1 {
                u.drain(i..i + 2);
                return true;
            }
        }
        false
    }

    fn shorten(&self, u: &mut Vec<usize>) -> bool {
        for r in &self.relators {
            let len = r.len();
            for i in 0..u.len() {
                let mut k = 0;
                while k < len && i + k < u.len() && u[i + k] == r[k] {
                    k += 1;
                }
                if k > self.half {
                    let rest = inverse_letters(&r[k..]);
                    u.splice(i..i + k, rest);
                    return true;
                }
            }
        }
        false
    }

    pub fn reduce(&self, u: &[usize]) -> Vec<usize> {
        let mut u = u.to_vec();
        while Self::free(&mut u) || self.shorten(&mut u) {}
        u
    }

    pub fn is_identity(&self, u: &[usize]) -> bool {
        self.reduce(u).is_empty()
    }

    /// Reduced forms of the inverses of all freely reduced products of at
    /// most `depth` generators.
    pub fn product_inverses(&self, gens: &[Vec<usize>], depth: usize) -> Vec<Vec<usize>> {
        let mut pool: Vec<Vec<usize>> = gens.to_vec();
        pool.extend(gens.iter().map(|h| inverse_letters(h)));
        let mut out = vec![Vec::new()];
        let mut frontier: Vec<(Vec<usize>, Option<usize>)> = vec![(Vec::new(), None)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (u, last) in &frontier {
                for (k, h) in pool.iter().enumerate() {
                    // skip h immediately after its inverse
                    if last.is_some_and(|l| (l + gens.len()) % pool.len() == k) {
                        continue;
                    }
                    let mut v = u.clone();
                    v.extend(h);
                    out.push(self.reduce(&inverse_letters(&v)));
                    next.push((v, Some(k)));
                }
            }
            frontier = next;
        }
        out
    }

    pub fn is_member(&self, w: &[usize], inverses: &[Vec<usize>]) -> bool {
        inverses.iter().any(|q| {
            let mut u = w.to_vec();
            u.extend(q);
            self.is_identity(&u)
        })
    }
}

impl SubgroupElements {
    /// Whether the element with normal form `normal` is a product `P Q` of
    /// two enumerated elements, reaching twice the enumeration depth.
    pub fn contains_product(&self, p: &CoxeterPresentation, normal: &[Gen]) -> bool {
        self.contains_nf(normal)
            || self.elements.iter().any(|q| {
                let inv: Vec<Gen> = q.iter().rev().copied().collect();
                self.contains_nf(&times(p, normal, &inv))
            })
    }
}
