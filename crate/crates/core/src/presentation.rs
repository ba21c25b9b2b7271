//! Coxeter presentations, the modified Coxeter graph and the two hypotheses
//! (reduction and separability) that gate the pipelines.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Gen;

/// Exponent `m_ij` of a pair of generators. `Infinite` means the pair is
/// unrelated; it never takes part in arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exponent {
    Finite(u32),
    Infinite,
}

impl Exponent {
    pub fn finite(self) -> Option<u32> {
        match self {
            Exponent::Finite(m) => Some(m),
            Exponent::Infinite => None,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(m) => write!(f, "{m}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing `gens` line")]
    MissingGens,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("a presentation needs at least 3 generators, got {0}")]
    TooFewGenerators(usize),
    #[error("generator index {0} out of range")]
    GeneratorOutOfRange(usize),
    #[error("m_{i}{j} must be >= 2")]
    ExponentTooSmall { i: usize, j: usize },
    #[error("m_{i}{j} = {m} violates extra-large type (finite exponents must be >= 4)")]
    NotExtraLarge { i: usize, j: usize, m: u32 },
    #[error("matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("diagonal entry ({0}, {0}) must be 1")]
    Diagonal(usize),
}

/// A Coxeter presentation `<a_1..a_n ; a_i^2, (a_i a_j)^{m_ij}>`.
///
/// Generators are 0-based internally and 1-based in every text format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxeterPresentation {
    n: usize,
    /// Row-major `n*n`; the diagonal holds `Finite(1)`.
    matrix: Vec<Exponent>,
    cover: Option<Vec<Gen>>,
}

impl CoxeterPresentation {
    /// General constructor; accepts any exponent `>= 2`. `entries` uses
    /// 0-based indices and omitted pairs are unrelated.
    pub fn new(n: usize, entries: &[(Gen, Gen, u32)]) -> Result<Self, PresentationError> {
        if n < 3 {
            return Err(PresentationError::TooFewGenerators(n));
        }
        if n > u8::MAX as usize {
            return Err(PresentationError::GeneratorOutOfRange(n));
        }
        let mut matrix = vec![Exponent::Infinite; n * n];
        for i in 0..n {
            matrix[i * n + i] = Exponent::Finite(1);
        }
        for &(i, j, m) in entries {
            if i >= n || j >= n {
                return Err(PresentationError::GeneratorOutOfRange(i.max(j) + 1));
            }
            if i == j {
                return Err(PresentationError::Diagonal(i + 1));
            }
            if m < 2 {
                return Err(PresentationError::ExponentTooSmall { i: i + 1, j: j + 1 });
            }
            matrix[i * n + j] = Exponent::Finite(m);
            matrix[j * n + i] = Exponent::Finite(m);
        }
        Ok(Self {
            n,
            matrix,
            cover: None,
        })
    }

    /// Builds a presentation from a full matrix, checking symmetry and the
    /// diagonal.
    pub fn from_matrix(rows: &[Vec<Exponent>]) -> Result<Self, PresentationError> {
        let n = rows.len();
        if n < 3 {
            return Err(PresentationError::TooFewGenerators(n));
        }
        let mut matrix = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(PresentationError::GeneratorOutOfRange(row.len()));
            }
            for (j, &e) in row.iter().enumerate() {
                if i == j && e != Exponent::Finite(1) {
                    return Err(PresentationError::Diagonal(i + 1));
                }
                if i != j {
                    if rows[j][i] != e {
                        return Err(PresentationError::Asymmetric { i: i + 1, j: j + 1 });
                    }
                    if matches!(e, Exponent::Finite(m) if m < 2) {
                        return Err(PresentationError::ExponentTooSmall { i: i + 1, j: j + 1 });
                    }
                }
                matrix.push(e);
            }
        }
        Ok(Self {
            n,
            matrix,
            cover: None,
        })
    }

    /// The complete graph on `n` generators with every exponent equal to `m`.
    pub fn uniform(n: usize, m: u32) -> Result<Self, PresentationError> {
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                entries.push((i, j, m));
            }
        }
        Self::new(n, &entries)
    }

    pub fn generator_count(&self) -> usize {
        self.n
    }

    pub fn exponent(&self, i: Gen, j: Gen) -> Exponent {
        self.matrix[i * self.n + j]
    }

    /// `Some(m_ij)` when `i != j` are related.
    pub fn related(&self, i: Gen, j: Gen) -> Option<u32> {
        if i == j {
            return None;
        }
        self.exponent(i, j).finite()
    }

    pub fn cover(&self) -> Option<&[Gen]> {
        self.cover.as_deref()
    }

    pub fn with_cover(mut self, cover: Vec<Gen>) -> Result<Self, PresentationError> {
        if let Some(&bad) = cover.iter().find(|&&c| c >= self.n) {
            return Err(PresentationError::GeneratorOutOfRange(bad + 1));
        }
        let mut cover = cover;
        cover.sort_unstable();
        cover.dedup();
        self.cover = Some(cover);
        Ok(self)
    }

    /// Every finite off-diagonal exponent is at least 4.
    pub fn require_extra_large(&self) -> Result<(), PresentationError> {
        if self.n < 3 {
            return Err(PresentationError::TooFewGenerators(self.n));
        }
        for (i, j, m) in self.related_pairs() {
            if m < 4 {
                return Err(PresentationError::NotExtraLarge {
                    i: i + 1,
                    j: j + 1,
                    m,
                });
            }
        }
        Ok(())
    }

    /// Related pairs `(i, j, m_ij)` with `i < j`, in lexicographic order.
    pub fn related_pairs(&self) -> impl Iterator<Item = (Gen, Gen, u32)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| self.related(i, j).map(|m| (i, j, m)))
        })
    }

    /// Generators related to `i`, ascending.
    pub fn neighbours(&self, i: Gen) -> impl Iterator<Item = (Gen, u32)> + '_ {
        (0..self.n).filter_map(move |j| self.related(i, j).map(|m| (j, m)))
    }

    /// Longest defining relator `(a_i a_j)^{m_ij}`; 2 when no pair is related.
    pub fn max_relator_length(&self) -> usize {
        self.related_pairs()
            .map(|(_, _, m)| 2 * m as usize)
            .max()
            .unwrap_or(2)
    }

    /// `k_G`: longest relator times the largest `rho_i`.
    pub fn k_g(&self) -> usize {
        let graph = self.modified_graph();
        let rho = graph.degrees.iter().copied().max().unwrap_or(0).max(1);
        self.max_relator_length() * rho
    }

    pub fn modified_graph(&self) -> ModifiedCoxeterGraph {
        let edges: Vec<_> = self.related_pairs().collect();
        let mut degrees = vec![0; self.n];
        for &(i, j, _) in &edges {
            degrees[i] += 1;
            degrees[j] += 1;
        }
        ModifiedCoxeterGraph { degrees, edges }
    }

    /// Text form accepted by [`parse_presentation`].
    pub fn to_text(&self) -> String {
        let mut out = format!("gens {}\n", self.n);
        for (i, j, m) in self.related_pairs() {
            out.push_str(&format!("m {} {} {}\n", i + 1, j + 1, m));
        }
        if let Some(cover) = &self.cover {
            out.push_str("cover");
            for c in cover {
                out.push_str(&format!(" {}", c + 1));
            }
            out.push('\n');
        }
        out
    }

    pub fn check_reduction_hypothesis(&self, cover: &[Gen]) -> ReductionReport {
        let graph = self.modified_graph();
        let in_cover = membership(self.n, cover);
        let mut violations = Vec::new();
        for &(i, j, m) in &graph.edges {
            let rule = match (in_cover[i], in_cover[j]) {
                (false, false) => Some(ReductionViolation::Uncovered { i, j }),
                (true, true) => {
                    let rho = graph.edge_max(i, j);
                    // m > 3/2 rho  <=>  2m > 3 rho
                    (2 * m as usize <= 3 * rho).then_some(ReductionViolation::BothInCover {
                        i,
                        j,
                        m,
                        rho,
                    })
                }
                (ci, _) => {
                    let (inside, outside) = if ci { (i, j) } else { (j, i) };
                    let rho = graph.degrees[inside];
                    (m as usize <= 2 * rho).then_some(ReductionViolation::OneInCover {
                        inside,
                        outside,
                        m,
                        rho,
                    })
                }
            };
            violations.extend(rule);
        }
        let mut cover: Vec<Gen> = cover.to_vec();
        cover.sort_unstable();
        cover.dedup();
        ReductionReport {
            extra_large: self.require_extra_large().is_ok(),
            cover,
            violations,
        }
    }

    /// Smallest cover passing the reduction hypothesis; ties broken
    /// lexicographically.
    pub fn find_cover(&self) -> Option<Vec<Gen>> {
        if self.require_extra_large().is_err() {
            return None;
        }
        for size in 0..=self.n {
            let mut combo: Vec<Gen> = (0..size).collect();
            loop {
                if self.check_reduction_hypothesis(&combo).passed() {
                    return Some(combo);
                }
                if !next_combination(&mut combo, self.n) {
                    break;
                }
            }
        }
        None
    }

    pub fn check_separability_condition(&self) -> SeparabilityReport {
        let graph = self.modified_graph();
        let mut odd = Vec::new();
        let mut triangle = Vec::new();
        for &(i, j, m) in &graph.edges {
            if m % 2 != 0 {
                odd.push((i, j, m));
            }
            if m % 3 != 0 {
                if let Some(k) = (0..self.n).find(|&k| {
                    k != i && k != j && self.related(i, k).is_some() && self.related(j, k).is_some()
                }) {
                    triangle.push(TriangleViolation { i, j, k, m });
                }
            }
        }
        SeparabilityReport { odd, triangle }
    }
}

fn membership(n: usize, set: &[Gen]) -> Vec<bool> {
    let mut v = vec![false; n];
    for &c in set {
        if c < n {
            v[c] = true;
        }
    }
    v
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for pos in (0..k).rev() {
        if combo[pos] < n - k + pos {
            combo[pos] += 1;
            for q in pos + 1..k {
                combo[q] = combo[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The modified Coxeter graph: an edge for every finite exponent,
/// including 2, none for unrelated pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModifiedCoxeterGraph {
    /// `rho_i`.
    pub degrees: Vec<usize>,
    /// `(i, j, m_ij)` with `i < j`.
    pub edges: Vec<(Gen, Gen, u32)>,
}

impl ModifiedCoxeterGraph {
    /// `rho_ij = max(rho_i, rho_j)`.
    pub fn edge_max(&self, i: Gen, j: Gen) -> usize {
        self.degrees[i].max(self.degrees[j])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ReductionViolation {
    Uncovered { i: Gen, j: Gen },
    /// `m_ij > 3/2 rho_ij` failed.
    BothInCover { i: Gen, j: Gen, m: u32, rho: usize },
    /// `m_ij > 2 rho_i` failed, `inside` in the cover.
    OneInCover {
        inside: Gen,
        outside: Gen,
        m: u32,
        rho: usize,
    },
}

impl fmt::Display for ReductionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ReductionViolation::Uncovered { i, j } => {
                write!(f, "edge {{{}, {}}} has no endpoint in the cover", i + 1, j + 1)
            }
            ReductionViolation::BothInCover { i, j, m, rho } => write!(
                f,
                "edge {{{}, {}}}: m = {m} is not > 3/2 * rho_ij = {}",
                i + 1,
                j + 1,
                1.5 * rho as f64
            ),
            ReductionViolation::OneInCover {
                inside,
                outside,
                m,
                rho,
            } => write!(
                f,
                "edge {{{}, {}}}: m = {m} is not > 2 * rho_{} = {}",
                inside + 1,
                outside + 1,
                inside + 1,
                2 * rho
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub extra_large: bool,
    pub cover: Vec<Gen>,
    pub violations: Vec<ReductionViolation>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.extra_large && self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleViolation {
    pub i: Gen,
    pub j: Gen,
    /// Third vertex of a triangle through `{i, j}`.
    pub k: Gen,
    pub m: u32,
}

impl fmt::Display for TriangleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m_{}{} = {} lies on a triangle with a{} but is not divisible by 3",
            self.i + 1,
            self.j + 1,
            self.m,
            self.k + 1
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparabilityReport {
    pub odd: Vec<(Gen, Gen, u32)>,
    pub triangle: Vec<TriangleViolation>,
}

impl SeparabilityReport {
    pub fn passed(&self) -> bool {
        self.odd.is_empty() && self.triangle.is_empty()
    }
}

/// Parses the line-oriented presentation format:
///
/// ```text
/// gens 3
/// m 1 2 4
/// m 1 3 4
/// m 2 3 4
/// cover 1 2 3
/// ```
///
/// Absent pairs are unrelated. `#` starts a comment. Exponents below 4 are
/// rejected because every pipeline requires extra-large type.
pub fn parse_presentation(text: &str) -> Result<CoxeterPresentation, crate::Error> {
    let mut n: Option<usize> = None;
    let mut entries: Vec<(Gen, Gen, u32)> = Vec::new();
    let mut cover: Option<Vec<Gen>> = None;

    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(line);
        let Some(&(col, keyword)) = tokens.first() else {
            continue;
        };
        let err = |column: usize, message: String| ParseError::Syntax {
            line: line_no + 1,
            column,
            message,
        };
        let int = |idx: usize| -> Result<usize, ParseError> {
            let (c, tok) = tokens[idx];
            tok.parse::<usize>()
                .map_err(|_| err(c, format!("expected a non-negative integer, found `{tok}`")))
        };
        let index = |idx: usize, n: usize| -> Result<Gen, ParseError> {
            let v = int(idx)?;
            if v == 0 || v > n {
                Err(err(tokens[idx].0, format!("generator index {v} not in 1..={n}")))
            } else {
                Ok(v - 1)
            }
        };
        match keyword {
            "gens" => {
                if n.is_some() {
                    return Err(err(col, "duplicate `gens` line".into()).into());
                }
                if tokens.len() != 2 {
                    return Err(err(col, "expected `gens <n>`".into()).into());
                }
                let count = int(1)?;
                if count < 3 {
                    return Err(PresentationError::TooFewGenerators(count).into());
                }
                if count > u8::MAX as usize {
                    return Err(err(tokens[1].0, "too many generators".into()).into());
                }
                n = Some(count);
            }
            "m" => {
                let count = n.ok_or_else(|| err(col, "`m` before `gens`".into()))?;
                if tokens.len() != 4 {
                    return Err(err(col, "expected `m <i> <j> <k>`".into()).into());
                }
                let i = index(1, count)?;
                let j = index(2, count)?;
                if i == j {
                    return Err(err(tokens[2].0, "diagonal exponent must not be given".into()).into());
                }
                let k = int(3)?;
                if k < 2 {
                    return Err(err(tokens[3].0, format!("exponent {k} must be >= 2")).into());
                }
                if k < 4 {
                    return Err(PresentationError::NotExtraLarge {
                        i: i + 1,
                        j: j + 1,
                        m: k as u32,
                    }
                    .into());
                }
                let (a, b) = (i.min(j), i.max(j));
                if let Some(&(_, _, old)) = entries.iter().find(|&&(x, y, _)| (x, y) == (a, b)) {
                    let message = if old == k as u32 {
                        format!("duplicate exponent for pair ({}, {})", a + 1, b + 1)
                    } else {
                        format!("conflicting exponents {old} and {k} for pair ({}, {})", a + 1, b + 1)
                    };
                    return Err(err(col, message).into());
                }
                entries.push((a, b, k as u32));
            }
            "cover" => {
                let count = n.ok_or_else(|| err(col, "`cover` before `gens`".into()))?;
                if cover.is_some() {
                    return Err(err(col, "duplicate `cover` line".into()).into());
                }
                let mut c = Vec::new();
                for idx in 1..tokens.len() {
                    c.push(index(idx, count)?);
                }
                cover = Some(c);
            }
            other => {
                return Err(err(col, format!("unknown keyword `{other}`")).into());
            }
        }
    }

    let n = n.ok_or(ParseError::MissingGens)?;
    let p = CoxeterPresentation::new(n, &entries)?;
    match cover {
        Some(c) => Ok(p.with_cover(c)?),
        None => Ok(p),
    }
}

/// Whitespace tokens with their 1-based columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (idx, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..idx]));
                start = None;
            }
            (false, None) => start = Some(idx),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}
