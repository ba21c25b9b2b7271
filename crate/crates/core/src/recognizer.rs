//! A finite automaton for the language of shortlex normal forms.
//!
//! While a word `w` is read, every candidate shortlex-smaller word `z`
//! representing the same element is followed in lockstep. What has to be
//! remembered about a candidate is its *region picture*: the group element
//! `w(t)^-1 z(t)` joining the two prefixes (a short piece of a relator
//! boundary), whether `z` already compares lexicographically below or above
//! `w`, and whether `z` has ended (so it is one or more letters shorter).
//! Differences are drawn from a finite ball, which makes the candidate set a
//! finite-state object. The word is rejected as soon as some candidate closes
//! up (difference trivial) while being shortlex-smaller.
//!
//! [`StreamingNormalFormChecker`] tracks the candidate set on the fly;
//! [`NormalFormRecognizer`] is its determinized and minimized form.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::presentation::CoxeterPresentation;
use crate::rewriting::normal_form_fast;
use crate::{Gen, Word};

const OUT: u32 = u32::MAX;

const EQUAL: u32 = 0;
const LESS: u32 = 1;
const GREATER: u32 = 2;
const ENDED: u32 = 3;
const MODES: u32 = 4;

/// Multiplication table of the difference ball.
#[derive(Clone, Debug)]
struct DifferenceTable {
    n: usize,
    radius: usize,
    /// Normal forms; index 0 is the identity.
    elements: Vec<Vec<Gen>>,
    /// `a d b` at `(d * n + a) * (n + 1) + b`; `b == n` stands for `a d`.
    table: Vec<u32>,
}

impl DifferenceTable {
    fn build(p: &CoxeterPresentation, radius: usize) -> Self {
        let n = p.generator_count();
        let mut index: HashMap<Vec<Gen>, u32> = HashMap::new();
        let mut elements: Vec<Vec<Gen>> = vec![Vec::new()];
        index.insert(Vec::new(), 0);
        let mut queue = VecDeque::from([0u32]);
        while let Some(d) = queue.pop_front() {
            if elements[d as usize].len() >= radius {
                continue;
            }
            for g in 0..n {
                let mut word = elements[d as usize].clone();
                word.push(g);
                let nf = normal_form_fast(p, &Word::new(word)).into_letters();
                if nf.len() <= radius && !index.contains_key(&nf) {
                    let id = elements.len() as u32;
                    index.insert(nf.clone(), id);
                    elements.push(nf);
                    queue.push_back(id);
                }
            }
        }

        let mut table = vec![OUT; elements.len() * n * (n + 1)];
        for (d, elt) in elements.iter().enumerate() {
            for a in 0..n {
                for b in 0..=n {
                    let mut word = Vec::with_capacity(elt.len() + 2);
                    word.push(a);
                    word.extend_from_slice(elt);
                    if b < n {
                        word.push(b);
                    }
                    let nf = normal_form_fast(p, &Word::new(word)).into_letters();
                    if let Some(&id) = index.get(&nf) {
                        table[(d * n + a) * (n + 1) + b] = id;
                    }
                }
            }
        }
        Self {
            n,
            radius,
            elements,
            table,
        }
    }

    fn product(&self, d: u32, a: Gen, b: Option<Gen>) -> u32 {
        let b = b.unwrap_or(self.n);
        self.table[(d as usize * self.n + a) * (self.n + 1) + b]
    }

    /// Successor candidate states after the input letter `a`.
    fn step(&self, states: &BTreeSet<u32>, a: Gen) -> BTreeSet<u32> {
        let mut next = BTreeSet::new();
        for &s in states {
            let (d, mode) = (s / MODES, s % MODES);
            if mode != ENDED {
                for b in 0..self.n {
                    let d2 = self.product(d, a, Some(b));
                    if d2 == OUT {
                        continue;
                    }
                    let mode2 = if mode == EQUAL {
                        match b.cmp(&a) {
                            std::cmp::Ordering::Less => LESS,
                            std::cmp::Ordering::Equal => EQUAL,
                            std::cmp::Ordering::Greater => GREATER,
                        }
                    } else {
                        mode
                    };
                    next.insert(d2 * MODES + mode2);
                }
            }
            let d2 = self.product(d, a, None);
            if d2 != OUT {
                next.insert(d2 * MODES + ENDED);
            }
        }
        next
    }

    fn has_witness(states: &BTreeSet<u32>) -> bool {
        states
            .iter()
            .any(|&s| s / MODES == 0 && matches!(s % MODES, LESS | ENDED))
    }
}

fn initial_states() -> BTreeSet<u32> {
    BTreeSet::from([EQUAL])
}

/// Default radius of the difference ball: the largest finite exponent.
pub fn default_radius(p: &CoxeterPresentation) -> usize {
    p.related_pairs()
        .map(|(_, _, m)| m as usize)
        .max()
        .unwrap_or(2)
        .max(2)
}

/// Letter-by-letter normality check over explicit candidate sets.
#[derive(Clone, Debug)]
pub struct StreamingNormalFormChecker {
    table: DifferenceTable,
}

impl StreamingNormalFormChecker {
    pub fn new(p: &CoxeterPresentation) -> Self {
        Self::with_radius(p, default_radius(p))
    }

    pub fn with_radius(p: &CoxeterPresentation, radius: usize) -> Self {
        Self {
            table: DifferenceTable::build(p, radius),
        }
    }

    /// 1-based position of the letter after which the prefix stops being a
    /// normal form, if any.
    pub fn first_rejection(&self, w: &Word) -> Option<usize> {
        let mut states = initial_states();
        for (pos, &a) in w.letters().iter().enumerate() {
            states = self.table.step(&states, a);
            if DifferenceTable::has_witness(&states) {
                return Some(pos + 1);
            }
        }
        None
    }

    pub fn is_normal(&self, w: &Word) -> bool {
        self.first_rejection(w).is_none()
    }

    pub fn difference_count(&self) -> usize {
        self.table.elements.len()
    }
}

/// Deterministic complete automaton accepting exactly the shortlex normal
/// forms. State `reject` is an absorbing sink.
#[derive(Clone, Debug)]
pub struct NormalFormRecognizer {
    n: usize,
    radius: usize,
    start: usize,
    reject: usize,
    transitions: Vec<usize>,
}

impl NormalFormRecognizer {
    pub fn build(p: &CoxeterPresentation) -> Self {
        Self::build_with_radius(p, default_radius(p))
    }

    pub fn build_with_radius(p: &CoxeterPresentation, radius: usize) -> Self {
        let table = DifferenceTable::build(p, radius);
        let n = table.n;

        // Subset construction; state 0 is the sink.
        let mut ids: HashMap<BTreeSet<u32>, usize> = HashMap::new();
        let mut subsets: Vec<BTreeSet<u32>> = vec![BTreeSet::new()];
        let mut transitions: Vec<usize> = vec![0; n];
        let start_set = initial_states();
        ids.insert(start_set.clone(), 1);
        subsets.push(start_set);
        transitions.extend(std::iter::repeat(0).take(n));
        let mut queue = VecDeque::from([1usize]);
        while let Some(s) = queue.pop_front() {
            for a in 0..n {
                let next = table.step(&subsets[s], a);
                let target = if DifferenceTable::has_witness(&next) {
                    0
                } else if let Some(&id) = ids.get(&next) {
                    id
                } else {
                    let id = subsets.len();
                    ids.insert(next.clone(), id);
                    subsets.push(next);
                    transitions.extend(std::iter::repeat(0).take(n));
                    queue.push_back(id);
                    id
                };
                transitions[s * n + a] = target;
            }
        }

        let (transitions, start, reject) = minimize(n, &transitions, 1, 0);
        Self {
            n,
            radius: table.radius,
            start,
            reject,
            transitions,
        }
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len() / self.n
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn reject_state(&self) -> usize {
        self.reject
    }

    pub fn next(&self, state: usize, a: Gen) -> usize {
        self.transitions[state * self.n + a]
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        state != self.reject
    }

    pub fn accepts(&self, w: &Word) -> bool {
        self.first_rejection(w).is_none()
    }

    /// 1-based position of the letter that moves the automaton into the sink.
    pub fn first_rejection(&self, w: &Word) -> Option<usize> {
        let mut s = self.start;
        for (pos, &a) in w.letters().iter().enumerate() {
            s = self.next(s, a);
            if s == self.reject {
                return Some(pos + 1);
            }
        }
        None
    }
}

/// Moore partition refinement. Returns the quotient transitions with the
/// images of `start` and `sink`.
fn minimize(n: usize, transitions: &[usize], start: usize, sink: usize) -> (Vec<usize>, usize, usize) {
    let count = transitions.len() / n;
    let mut class: Vec<usize> = (0..count).map(|s| usize::from(s != sink)).collect();
    let mut classes = 2.min(count);
    loop {
        let mut signature_ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut next_class = vec![0; count];
        for s in 0..count {
            let mut sig = Vec::with_capacity(n + 1);
            sig.push(class[s]);
            sig.extend((0..n).map(|a| class[transitions[s * n + a]]));
            let fresh = signature_ids.len();
            next_class[s] = *signature_ids.entry(sig).or_insert(fresh);
        }
        let refined = signature_ids.len();
        class = next_class;
        if refined == classes {
            break;
        }
        classes = refined;
    }
    let mut out = vec![0; classes * n];
    for s in 0..count {
        for a in 0..n {
            out[class[s] * n + a] = class[transitions[s * n + a]];
        }
    }
    (out, class[start], class[sink])
}
