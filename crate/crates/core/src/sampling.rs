//! Seeded random subgroups and the scaling sweep.
//!
//! A generator word is a random walk over the generators that never repeats
//! a letter, Dehn-reduced afterwards. Walks that reduce to the identity are
//! drawn again. The sweep uses a few long generators, which keeps the
//! subgroups far from finite index.

use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::pipeline::{build, subgroup_size, BuildOptions};
use crate::presentation::CoxeterPresentation;
use crate::rewriting::dehn_reduce;
use crate::{Error, Gen, Word};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A walk of `len` letters without immediate repeats.
pub fn random_walk<R: Rng>(p: &CoxeterPresentation, len: usize, rng: &mut R) -> Word {
    let n = p.generator_count();
    let mut letters: Vec<Gen> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = rng.gen_range(0..n);
        if letters.last() != Some(&l) {
            letters.push(l);
        }
    }
    Word::new(letters)
}

/// A nonempty Dehn-reduced word of length at most `max_len`.
pub fn random_reduced_word<R: Rng>(p: &CoxeterPresentation, max_len: usize, rng: &mut R) -> Result<Word, Error> {
    loop {
        let len = rng.gen_range(1..=max_len.max(1));
        let w = dehn_reduce(p, &random_walk(p, len, rng))?;
        if !w.is_empty() {
            return Ok(w);
        }
    }
}

/// Between one and `max_gens` generators of length at most `max_len`.
pub fn random_subgroup<R: Rng>(
    p: &CoxeterPresentation,
    max_gens: usize,
    max_len: usize,
    rng: &mut R,
) -> Result<Vec<Word>, Error> {
    let count = rng.gen_range(1..=max_gens.max(1));
    (0..count).map(|_| random_reduced_word(p, max_len, rng)).collect()
}

/// A Dehn-reduced word of exactly `len` letters, grown one random letter at
/// a time.
pub fn reduced_word_of_length<R: Rng>(p: &CoxeterPresentation, len: usize, rng: &mut R) -> Result<Word, Error> {
    let n = p.generator_count();
    let mut w = Word::empty();
    while w.len() < len {
        let l = rng.gen_range(0..n);
        if w.last() == Some(l) {
            continue;
        }
        let mut next = w.clone();
        next.push(l);
        w = dehn_reduce(p, &next)?;
    }
    Ok(w)
}

/// `count` Dehn-reduced generators whose lengths sum to `s_h`, as equal as
/// possible.
pub fn subgroup_of_size<R: Rng>(
    p: &CoxeterPresentation,
    s_h: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Word>, Error> {
    let count = count.max(1).min(s_h);
    (0..count)
        .map(|k| reduced_word_of_length(p, s_h / count + usize::from(k < s_h % count), rng))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub s_h: usize,
    pub generators: usize,
    pub delta1_edges: usize,
    pub delta2_vertices: usize,
    pub delta2_edges: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub generators: usize,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `log t` against `log s_H`.
    pub exponent: Option<f64>,
}

/// Number of generators in each subgroup of the sweep.
pub const BENCH_GENERATORS: usize = 3;

/// Builds one random subgroup per size.
pub fn bench(p: &CoxeterPresentation, sizes: &[usize], seed: u64) -> Result<BenchReport, Error> {
    let mut rng = rng(seed);
    let mut rows = Vec::with_capacity(sizes.len());
    for &s_h in sizes {
        let gens = subgroup_of_size(p, s_h, BENCH_GENERATORS, &mut rng)?;
        let start = Instant::now();
        let b = build(p, &gens, &BuildOptions::default())?;
        let elapsed = start.elapsed();
        rows.push(BenchRow {
            s_h: subgroup_size(&gens),
            generators: gens.len(),
            delta1_edges: b.delta1.edge_count(),
            delta2_vertices: b.delta2.vertex_count(),
            delta2_edges: b.delta2.edge_count(),
            seconds: elapsed.as_secs_f64(),
        });
    }
    let exponent = fit_exponent(&rows);
    Ok(BenchReport {
        seed,
        generators: BENCH_GENERATORS,
        rows,
        exponent,
    })
}

/// Slope of the log-log regression over rows with positive size and time.
pub fn fit_exponent(rows: &[BenchRow]) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.s_h > 0 && r.seconds > 0.0)
        .map(|r| ((r.s_h as f64).ln(), r.seconds.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewriting::is_dehn_reduced;

    #[test]
    fn sampled_words_are_reduced_and_seeded() {
        let p = CoxeterPresentation::uniform(3, 6).unwrap();
        let a = random_subgroup(&p, 3, 6, &mut rng(7)).unwrap();
        let b = random_subgroup(&p, 3, 6, &mut rng(7)).unwrap();
        assert_eq!(a, b);
        for w in &a {
            assert!(!w.is_empty() && w.len() <= 6);
            assert!(is_dehn_reduced(&p, w.letters()));
        }
        let gens = subgroup_of_size(&p, 50, 3, &mut rng(1)).unwrap();
        assert_eq!(gens.iter().map(Word::len).collect::<Vec<_>>(), vec![17, 17, 16]);
        assert!(gens.iter().all(|w| is_dehn_reduced(&p, w.letters())));
    }

    #[test]
    fn exponent_of_exact_power_law() {
        let rows: Vec<BenchRow> = [100, 200, 400]
            .iter()
            .map(|&s| BenchRow {
                s_h: s,
                generators: 1,
                delta1_edges: 0,
                delta2_vertices: 0,
                delta2_edges: 0,
                seconds: 1e-6 * (s as f64).powi(2),
            })
            .collect();
        assert!((fit_exponent(&rows).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_sweep_point_is_trivial() {
        let p = CoxeterPresentation::uniform(3, 6).unwrap();
        let r = bench(&p, &[0], 3).unwrap();
        assert_eq!((r.rows[0].generators, r.rows[0].delta2_vertices), (0, 1));
        assert!(r.exponent.is_none());
    }
}
