//! Dehn reduction and shortlex normal forms by Tits moves.
//!
//! Two moves generate all equalities between words in a Coxeter group:
//! cancelling a square `a a`, and swapping an alternating factor of exactly
//! `m_ij` letters for the alternating factor starting with the other
//! generator. The closure of a word under both moves, restricted to words no
//! longer than the input, contains the shortlex normal form.

use std::collections::{HashSet, VecDeque};

use crate::presentation::CoxeterPresentation;
use crate::word::shortlex_cmp;
use crate::{Error, Gen, Word};

/// Length of the alternating run of `w` ending at the last letter, assuming
/// `w` has no square at its end.
fn trailing_run(w: &[Gen]) -> usize {
    let n = w.len();
    match n {
        0 => 0,
        1 => 1,
        _ => {
            let mut len = 2;
            while len < n && w[n - 1 - len] == w[n - 1 - len + 2] {
                len += 1;
            }
            len
        }
    }
}

/// Alternating word of `len` letters beginning with `first`, the other
/// letter being `second`.
pub fn alternating(first: Gen, second: Gen, len: usize) -> Vec<Gen> {
    (0..len).map(|k| if k % 2 == 0 { first } else { second }).collect()
}

/// A Dehn-reduced form: no square and no alternating `(i, j)`-factor of more
/// than `m_ij` letters.
///
/// Letters are pushed onto an output stack that is kept reduced; a suffix
/// `x y x ...` of `m + 1` letters is replaced by the complementary `m - 1`
/// letters of `(x y)^m`, which are then pushed back one at a time.
pub fn dehn_reduce(p: &CoxeterPresentation, w: &Word) -> Result<Word, Error> {
    w.check_alphabet(p.generator_count())?;
    Ok(Word::new(dehn_reduce_letters(p, w.letters())))
}

pub(crate) fn dehn_reduce_letters(p: &CoxeterPresentation, w: &[Gen]) -> Vec<Gen> {
    let mut out: Vec<Gen> = Vec::with_capacity(w.len());
    let mut pending: Vec<Gen> = w.iter().rev().copied().collect();
    while let Some(g) = pending.pop() {
        if out.last() == Some(&g) {
            out.pop();
            continue;
        }
        out.push(g);
        let run = trailing_run(&out);
        if run < 2 {
            continue;
        }
        let n = out.len();
        let (x, y) = (out[n - 1], out[n - 2]);
        if let Some(m) = p.related(x, y) {
            let m = m as usize;
            if run > m {
                // The factor of m + 1 letters ends in x; the complementary
                // m - 1 letters end in y. Pushed reversed so the first
                // replacement letter is popped first.
                out.truncate(n - (m + 1));
                pending.extend(alternating(y, x, m - 1));
            }
        }
    }
    out
}

/// Every word reachable from `w` by one Tits move, none longer than `w`.
fn tits_neighbours(p: &CoxeterPresentation, w: &[Gen], out: &mut Vec<Vec<Gen>>) {
    for i in 0..w.len().saturating_sub(1) {
        if w[i] == w[i + 1] {
            let mut v = Vec::with_capacity(w.len() - 2);
            v.extend_from_slice(&w[..i]);
            v.extend_from_slice(&w[i + 2..]);
            out.push(v);
            continue;
        }
        let (x, y) = (w[i], w[i + 1]);
        let Some(m) = p.related(x, y) else { continue };
        let m = m as usize;
        if i + m > w.len() {
            continue;
        }
        if (i..i + m).all(|k| w[k] == if (k - i) % 2 == 0 { x } else { y }) {
            let mut v = w.to_vec();
            v[i..i + m].copy_from_slice(&alternating(y, x, m));
            out.push(v);
        }
    }
}

/// All words reachable from `w` by Tits moves.
pub fn tits_closure(p: &CoxeterPresentation, w: &Word) -> HashSet<Vec<Gen>> {
    let mut seen: HashSet<Vec<Gen>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(w.letters().to_vec());
    queue.push_back(w.letters().to_vec());
    let mut scratch = Vec::new();
    while let Some(u) = queue.pop_front() {
        scratch.clear();
        tits_neighbours(p, &u, &mut scratch);
        for v in scratch.drain(..) {
            if !seen.contains(&v) {
                seen.insert(v.clone());
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Shortlex normal form, as the shortlex minimum of the Tits closure.
pub fn normal_form(p: &CoxeterPresentation, w: &Word) -> Word {
    let closure = tits_closure(p, w);
    Word::new(
        closure
            .into_iter()
            .min_by(|a, b| shortlex_cmp(a, b))
            .unwrap_or_default(),
    )
}

/// Normal form of a possibly long word: Dehn-reduce first, then close.
/// Both steps stay inside the Tits closure of `w`, so the result equals
/// [`normal_form`].
pub fn normal_form_fast(p: &CoxeterPresentation, w: &Word) -> Word {
    let reduced = Word::new(dehn_reduce_letters(p, w.letters()));
    normal_form(p, &reduced)
}

/// Reference normality test through [`normal_form`].
pub fn is_shortlex_normal_reference(p: &CoxeterPresentation, w: &Word) -> bool {
    normal_form(p, w) == *w
}

/// Whether `w` contains a square or an over-long alternating factor.
pub fn is_dehn_reduced(p: &CoxeterPresentation, w: &[Gen]) -> bool {
    for k in 1..=w.len() {
        let prefix = &w[..k];
        if k >= 2 && prefix[k - 1] == prefix[k - 2] {
            return false;
        }
        let run = trailing_run(prefix);
        if run >= 2 {
            if let Some(m) = p.related(prefix[k - 1], prefix[k - 2]) {
                if run > m as usize {
                    return false;
                }
            }
        }
    }
    true
}

/// Every word of length `len` over `n` letters, in lexicographic order.
pub fn all_words(n: usize, len: usize) -> impl Iterator<Item = Vec<Gen>> {
    let total = n.checked_pow(len as u32).unwrap_or(0);
    (0..total).map(move |mut idx| {
        let mut w = vec![0; len];
        for slot in w.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        w
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g4() -> CoxeterPresentation {
        CoxeterPresentation::uniform(3, 4).unwrap()
    }

    fn w(l: &[usize]) -> Word {
        Word::from_one_based(l)
    }

    #[test]
    fn dehn_examples() {
        let p = g4();
        assert_eq!(dehn_reduce(&p, &w(&[1, 1])).unwrap(), Word::empty());
        assert_eq!(dehn_reduce(&p, &w(&[1, 2, 1, 2, 1])).unwrap(), w(&[2, 1, 2]));
        assert_eq!(dehn_reduce(&p, &w(&[1, 2, 1, 2])).unwrap(), w(&[1, 2, 1, 2]));
        assert_eq!(dehn_reduce(&p, &w(&[1, 2, 1, 2, 1, 2, 1, 2])).unwrap(), Word::empty());
        assert!(dehn_reduce(&p, &w(&[4])).is_err());
    }

    #[test]
    fn dehn_result_agrees_with_closure() {
        // a1a2a1a2a1 and a2a1a2 are in the same Tits closure.
        let p = g4();
        let closure = tits_closure(&p, &w(&[1, 2, 1, 2, 1]));
        assert!(closure.contains(&w(&[2, 1, 2]).into_letters()));
    }

    #[test]
    fn normal_form_examples() {
        let p = g4();
        assert_eq!(normal_form(&p, &w(&[2, 1, 2, 1])), w(&[1, 2, 1, 2]));
        assert_eq!(normal_form(&p, &w(&[1, 1])), Word::empty());
        let closure = tits_closure(&p, &w(&[1, 2, 1, 2]));
        assert_eq!(closure.len(), 2);
        assert!(is_shortlex_normal_reference(&p, &w(&[1, 2, 1, 2])));
        assert!(is_shortlex_normal_reference(&p, &Word::empty()));
    }

    #[test]
    fn long_word_is_not_normal() {
        let p = g4();
        let star = w(&[2, 1, 2, 1, 3, 2, 3, 1, 2, 1, 2, 3]);
        let nf = normal_form(&p, &star);
        assert!(nf < star);
        assert_eq!(nf, w(&[1, 2, 1, 3, 2, 3, 1, 2, 1, 3]));
        assert!(!is_shortlex_normal_reference(&p, &star));
    }

    #[test]
    fn all_words_enumerates_in_order() {
        let v: Vec<_> = all_words(2, 2).collect();
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(all_words(3, 0).count(), 1);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn word_strategy(n: usize, max: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(0..n, 0..=max).prop_map(Word::new)
    }

    proptest! {
        #[test]
        fn dehn_reduce_is_idempotent_and_reduced(u in word_strategy(3, 14), m in 4u32..7) {
            let p = CoxeterPresentation::uniform(3, m).unwrap();
            let r = dehn_reduce(&p, &u).unwrap();
            prop_assert!(r.len() <= u.len());
            prop_assert!(is_dehn_reduced(&p, r.letters()));
            prop_assert_eq!(dehn_reduce(&p, &r).unwrap(), r.clone());
            // same element: the normal forms agree
            prop_assert_eq!(normal_form(&p, &r), normal_form(&p, &u));
        }

        #[test]
        fn normal_form_is_idempotent_and_minimal(u in word_strategy(3, 9)) {
            let p = CoxeterPresentation::uniform(3, 4).unwrap();
            let nf = normal_form(&p, &u);
            prop_assert!(nf <= u);
            prop_assert_eq!(normal_form(&p, &nf), nf.clone());
            prop_assert!(tits_closure(&p, &u).contains(nf.letters()));
        }

        #[test]
        fn dehn_reduced_words_are_geodesic(u in word_strategy(3, 10), m in 4u32..7) {
            let p = CoxeterPresentation::uniform(3, m).unwrap();
            prop_assert_eq!(normal_form(&p, &u).len(), dehn_reduce(&p, &u).unwrap().len());
        }
    }
}
