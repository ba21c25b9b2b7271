//! Subgroup graphs over Coxeter groups of extra-large type and over surface
//! groups.
//!
//! The pipeline starts from the bouquet of subgroup generators, folds it and
//! completes near-relator paths while a perimeter count strictly decreases
//! ([`reduction`]), then closes every maximal alternating path into a relator
//! cycle ([`completion`]). The resulting 2-complete graph answers membership,
//! finite index, quasiconvexity and intersection queries ([`analysis`]) and,
//! under the separability condition, yields explicit permutation
//! representations separating elements from subgroups ([`separability`]).

pub mod analysis;
pub mod completion;
pub mod graph;
pub mod io;
pub mod perm;
pub mod pipeline;
pub mod presentation;
pub mod recognizer;
pub mod reduction;
pub mod rewriting;
pub mod sampling;
pub mod separability;
pub mod surface;
pub mod word;

use thiserror::Error;

/// 0-based generator index.
pub type Gen = usize;

pub use graph::{SubgroupGraph, VertexId};
pub use presentation::{parse_presentation, CoxeterPresentation, Exponent};
pub use word::Word;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] presentation::ParseError),
    #[error(transparent)]
    Presentation(#[from] presentation::PresentationError),
    #[error("invalid word: {0}")]
    Word(String),
    #[error("letter a{letter} out of range for {n} generators")]
    LetterOutOfRange { letter: usize, n: usize },
    #[error("reduction hypothesis fails for cover {cover:?}: {details}")]
    ReductionHypothesis { cover: Vec<usize>, details: String },
    #[error("separability condition fails: {0}")]
    SeparabilityCondition(String),
    #[error("perimeter count did not decrease at step {step}: {before} -> {after}")]
    GammaNotDecreasing {
        step: usize,
        before: usize,
        after: usize,
    },
    #[error("edge count {edges} exceeds the bound k_G * s_H = {bound}")]
    EdgeBound { edges: usize, bound: usize },
    #[error("step budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error("relator path property violated: {0}")]
    RelatorPathProperty(String),
    #[error("2-completion failed: {0}")]
    Completion(String),
    #[error("graph is full; no infinite-index witness exists")]
    FullGraph,
    #[error("word {0} already lies in the subgroup")]
    AlreadyMember(String),
    #[error("word represents the identity")]
    TrivialElement,
    #[error("terminal vertex collapsed onto the basepoint")]
    TerminalCollapsed,
    #[error("relator ({i} {j})^{m} acts nontrivially at vertex {vertex}")]
    RelatorViolation {
        i: usize,
        j: usize,
        m: u32,
        vertex: usize,
    },
    #[error("graph document: {0}")]
    Document(String),
    #[error("surface group: {0}")]
    Surface(String),
    #[error("pairs of unrelated generators have no relator cycle")]
    Unrelated,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
