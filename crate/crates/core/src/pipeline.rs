//! The full construction from subgroup generators to the 2-complete graph.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::completion::{two_complete, CompletionReport};
use crate::graph::{Stage, SubgroupGraph};
use crate::presentation::CoxeterPresentation;
use crate::reduction::{phase1, PhaseOneOptions, PhaseOneReport};
use crate::{Error, Gen, Word};

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub cover: Option<Vec<Gen>>,
    /// Require the reduction hypothesis and enforce every structural check.
    pub checked: bool,
    pub budget: Option<usize>,
    pub trace: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            cover: None,
            checked: true,
            budget: None,
            trace: false,
        }
    }
}

impl BuildOptions {
    /// Without the reduction hypothesis, stopping after `budget` steps.
    pub fn unchecked(budget: usize) -> Self {
        Self {
            checked: false,
            budget: Some(budget),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub fold_and_reduce: Duration,
    pub complete: Duration,
}

/// Graphs of each stage with the statistics of the run.
#[derive(Clone, Debug)]
pub struct Build {
    pub delta0: SubgroupGraph,
    pub delta1: SubgroupGraph,
    pub delta2: SubgroupGraph,
    pub s_h: usize,
    pub edge_bound: usize,
    pub phase1: PhaseOneReport,
    pub completion: CompletionReport,
    pub timings: Timings,
}

/// Sum of generator lengths, the size measure `s_H`.
pub fn subgroup_size(gens: &[Word]) -> usize {
    gens.iter().map(Word::len).sum()
}

/// Runs both phases on a prepared graph. `size` enters the edge bound
/// `k_G * size`.
pub fn build_graph(
    p: &CoxeterPresentation,
    delta0: SubgroupGraph,
    size: usize,
    options: &BuildOptions,
) -> Result<Build, Error> {
    if options.checked {
        p.require_extra_large()?;
    }
    let edge_bound = p.k_g() * size.max(1);
    let mut g = delta0.clone();

    let start = Instant::now();
    let phase_options = PhaseOneOptions {
        cover: options.cover.clone(),
        checked: options.checked,
        budget: options.budget,
        edge_bound: Some(edge_bound),
        trace: options.trace,
        verify_gamma: false,
    };
    let phase1_report = phase1(&mut g, p, &phase_options)?;
    g.set_stage(Stage::Delta1);
    let delta1 = g.clone();
    let fold_and_reduce = start.elapsed();

    let start = Instant::now();
    let completion = two_complete(&mut g, p)?;
    g.set_stage(Stage::Delta2);
    let complete = start.elapsed();
    if options.checked {
        if g.edge_count() > edge_bound {
            return Err(Error::EdgeBound {
                edges: g.edge_count(),
                bound: edge_bound,
            });
        }
        if completion.added_cycles() && g.is_full() {
            return Err(Error::Completion("graph with added relator cycles is full".into()));
        }
    }

    Ok(Build {
        delta0,
        delta1,
        delta2: g,
        s_h: size,
        edge_bound,
        phase1: phase1_report,
        completion,
        timings: Timings {
            fold_and_reduce,
            complete,
        },
    })
}

/// Builds the graphs of `H = <gens>`.
pub fn build(p: &CoxeterPresentation, gens: &[Word], options: &BuildOptions) -> Result<Build, Error> {
    let delta0 = SubgroupGraph::bouquet(p, gens)?;
    build_graph(p, delta0, subgroup_size(gens), options)
}
