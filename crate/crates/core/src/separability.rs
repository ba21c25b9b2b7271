//! Finite permutation quotients read off 2-complete graphs.
//!
//! Each generator swaps the two ends of every edge carrying its label and
//! fixes vertices without such an edge. Under the separability condition this
//! is an action of the Coxeter group; attaching a stem spelling `w` before
//! completing separates `w` from the subgroup.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::is_member;
use crate::graph::{SubgroupGraph, VertexId};
use crate::perm::Permutation;
use crate::pipeline::{build, build_graph, BuildOptions};
use crate::presentation::CoxeterPresentation;
use crate::rewriting::dehn_reduce;
use crate::{Error, Gen, Word};

/// A homomorphism from `G` to the symmetric group on the vertices of a graph.
#[derive(Clone, Debug, Serialize)]
pub struct FiniteQuotient {
    pub degree: usize,
    pub images: Vec<Permutation>,
    /// Graph vertex behind each point.
    pub vertices: Vec<VertexId>,
    pub basepoint: usize,
    pub terminal: Option<usize>,
}

impl FiniteQuotient {
    /// `x . w`, reading `w` left to right.
    pub fn act(&self, x: usize, w: &[Gen]) -> usize {
        w.iter().fold(x, |y, &g| self.images[g].image(y))
    }

    pub fn word_image(&self, w: &[Gen]) -> Permutation {
        w.iter()
            .fold(Permutation::identity(self.degree), |acc, &g| acc.then(&self.images[g]))
    }

    /// One line per generator, then the degree and distinguished points.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, img) in self.images.iter().enumerate() {
            let _ = writeln!(out, "a{} -> {}", i + 1, img.cycle_string(|x| x.to_string()));
        }
        let _ = writeln!(out, "degree {}", self.degree);
        let _ = writeln!(out, "O_H {}", self.basepoint);
        if let Some(t) = self.terminal {
            let _ = writeln!(out, "T_w {t}");
        }
        out
    }
}

fn point_index(g: &SubgroupGraph) -> (Vec<VertexId>, Vec<usize>) {
    let vertices: Vec<VertexId> = g.vertices().collect();
    let mut index = vec![usize::MAX; vertices.last().map_or(0, |&v| v + 1)];
    for (k, &v) in vertices.iter().enumerate() {
        index[v] = k;
    }
    (vertices, index)
}

/// The involution induced by `a_i`; loops fix their vertex.
pub fn generator_action(g: &SubgroupGraph, i: Gen) -> Permutation {
    let (vertices, index) = point_index(g);
    action_with(g, i, &vertices, &index)
}

fn action_with(g: &SubgroupGraph, i: Gen, vertices: &[VertexId], index: &[usize]) -> Permutation {
    let images = vertices
        .iter()
        .map(|&v| g.neighbour(v, i).map_or(index[v], |u| index[u]))
        .collect();
    Permutation::from_images(images).expect("a trim graph induces a bijection")
}

/// Generator images with every relation checked by composition.
pub fn homomorphism(g: &SubgroupGraph, p: &CoxeterPresentation) -> Result<FiniteQuotient, Error> {
    let (vertices, index) = point_index(g);
    let images: Vec<Permutation> = (0..p.generator_count())
        .map(|i| action_with(g, i, &vertices, &index))
        .collect();
    for (i, img) in images.iter().enumerate() {
        if !img.is_involution() {
            let x = img.then(img).moved_point().unwrap_or(0);
            return Err(Error::RelatorViolation {
                i: i + 1,
                j: i + 1,
                m: 1,
                vertex: vertices[x],
            });
        }
    }
    for (i, j, m) in p.related_pairs() {
        let relator = images[i].then(&images[j]).pow(m as usize);
        if let Some(x) = relator.moved_point() {
            return Err(Error::RelatorViolation {
                i: i + 1,
                j: j + 1,
                m,
                vertex: vertices[x],
            });
        }
    }
    Ok(FiniteQuotient {
        degree: vertices.len(),
        images,
        basepoint: index[g.basepoint()],
        terminal: g.terminal().map(|t| index[t]),
        vertices,
    })
}

/// Attaches a stem spelling the Dehn-reduced form of `w` at the basepoint of
/// `delta2` and runs both phases again. The stem end is tracked as the
/// terminal vertex.
pub fn build_stem_graph(
    p: &CoxeterPresentation,
    delta2: &SubgroupGraph,
    w: &Word,
    options: &BuildOptions,
) -> Result<SubgroupGraph, Error> {
    if is_member(delta2, p, w)? {
        return Err(Error::AlreadyMember(w.to_string()));
    }
    let stem = dehn_reduce(p, w)?;
    let mut g = delta2.clone();
    g.compact();
    let o = g.basepoint();
    let t = g.add_path(o, None, stem.letters(), crate::graph::Provenance::Primary);
    g.set_terminal(Some(t));
    let size = g.edge_count();
    let built = build_graph(p, g, size, options)?;
    let g = built.delta2;
    if g.terminal() == Some(g.basepoint()) {
        return Err(Error::TerminalCollapsed);
    }
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    /// `O_H . h_i` for each given generator; all equal to `O_H`.
    pub generator_images: Vec<usize>,
    /// `O_H . w`, different from `O_H`.
    pub word_image: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Separation {
    pub quotient: FiniteQuotient,
    pub certificate: Certificate,
}

impl Separation {
    pub fn to_text(&self) -> String {
        let mut out = self.quotient.to_text();
        let c = &self.certificate;
        let _ = writeln!(
            out,
            "certificate O_H.h = {:?} (all O_H = {}), O_H.w = {} != O_H",
            c.generator_images, self.quotient.basepoint, c.word_image
        );
        out
    }
}

fn require_separability(p: &CoxeterPresentation) -> Result<(), Error> {
    let report = p.check_separability_condition();
    if report.passed() {
        return Ok(());
    }
    let mut parts: Vec<String> = report
        .odd
        .iter()
        .map(|&(i, j, m)| format!("m_{}{} = {m} is odd", i + 1, j + 1))
        .collect();
    parts.extend(report.triangle.iter().map(ToString::to_string));
    Err(Error::SeparabilityCondition(parts.join("; ")))
}

/// A finite quotient in which `O_H` is fixed by `H` and moved by `w`.
pub fn separate(
    p: &CoxeterPresentation,
    gens: &[Word],
    w: &Word,
    options: &BuildOptions,
) -> Result<Separation, Error> {
    require_separability(p)?;
    let h = build(p, gens, options)?;
    let g = build_stem_graph(p, &h.delta2, w, options)?;
    let quotient = homomorphism(&g, p)?;
    let o = quotient.basepoint;
    let generator_images: Vec<usize> = gens.iter().map(|h| quotient.act(o, h.letters())).collect();
    let word_image = quotient.act(o, w.letters());
    if generator_images.iter().any(|&x| x != o) || word_image == o {
        return Err(Error::Completion("quotient fails to separate".into()));
    }
    Ok(Separation {
        quotient,
        certificate: Certificate {
            generator_images,
            word_image,
        },
    })
}

/// A finite quotient in which `w` acts nontrivially, from the completed path
/// graph of its Dehn-reduced form.
pub fn residual_witness(p: &CoxeterPresentation, w: &Word) -> Result<FiniteQuotient, Error> {
    p.require_extra_large()?;
    require_separability(p)?;
    let reduced = dehn_reduce(p, w)?;
    if reduced.is_empty() {
        return Err(Error::TrivialElement);
    }
    let mut g = SubgroupGraph::path(p, &reduced)?;
    crate::completion::two_complete(&mut g, p)?;
    let quotient = homomorphism(&g, p)?;
    let t = quotient.terminal.expect("path graphs carry a terminal");
    if quotient.act(quotient.basepoint, w.letters()) != t || t == quotient.basepoint {
        return Err(Error::TerminalCollapsed);
    }
    Ok(quotient)
}
