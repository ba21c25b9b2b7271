//! JSON documents and Graphviz output for subgroup graphs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{Provenance, Stage, SubgroupGraph, VertexClass};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub class: VertexClass,
}

/// Labels are 1-based, as in the text formats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub ends: [usize; 2],
    pub label: usize,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema: u32,
    pub generators: usize,
    pub stage: Stage,
    pub basepoint: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<usize>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl GraphDocument {
    /// Live vertices are numbered contiguously in id order.
    pub fn from_graph(g: &SubgroupGraph) -> Self {
        let mut g = g.clone();
        g.compact();
        GraphDocument {
            schema: SCHEMA_VERSION,
            generators: g.generator_count(),
            stage: g.stage(),
            basepoint: g.basepoint(),
            terminal: g.terminal(),
            vertices: g
                .vertices()
                .map(|v| VertexRecord { id: v, class: g.class(v) })
                .collect(),
            edges: g
                .edges()
                .map(|(_, e)| EdgeRecord {
                    ends: e.ends,
                    label: e.label + 1,
                    provenance: e.provenance,
                    origin: e.origin.map(|(i, j)| [i + 1, j + 1]),
                })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<SubgroupGraph, Error> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Document(format!(
                "schema {} is not supported (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let n = self.vertices.len();
        for (k, v) in self.vertices.iter().enumerate() {
            if v.id != k {
                return Err(Error::Document(format!("vertex ids must be 0..{n}, found {}", v.id)));
            }
        }
        let in_range = |v: usize| v < n;
        if !in_range(self.basepoint) || self.terminal.is_some_and(|t| !in_range(t)) {
            return Err(Error::Document("basepoint or terminal out of range".into()));
        }
        // a fresh graph has its basepoint at vertex 0
        let mut order: Vec<usize> = vec![self.basepoint];
        order.extend((0..n).filter(|&v| v != self.basepoint));
        let mut map = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            map[v] = k;
        }
        let mut g = SubgroupGraph::new(self.generators);
        g.set_class(0, self.vertices[self.basepoint].class);
        for &v in &order[1..] {
            g.add_vertex(self.vertices[v].class);
        }
        for e in &self.edges {
            if !e.ends.iter().all(|&v| in_range(v)) {
                return Err(Error::Document(format!("edge {:?} has an end out of range", e.ends)));
            }
            let label_ok = |l: usize| (1..=self.generators).contains(&l);
            if !label_ok(e.label) || e.origin.is_some_and(|[i, j]| !label_ok(i) || !label_ok(j)) {
                return Err(Error::Document(format!("label {} out of range", e.label)));
            }
            g.add_edge_with_origin(
                map[e.ends[0]],
                map[e.ends[1]],
                e.label - 1,
                e.provenance,
                e.origin.map(|[i, j]| (i - 1, j - 1)),
            );
        }
        g.set_terminal(self.terminal.map(|t| map[t]));
        g.set_stage(self.stage);
        Ok(g)
    }
}

pub fn to_json(g: &SubgroupGraph) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(&GraphDocument::from_graph(g))?)
}

pub fn from_json(text: &str) -> Result<SubgroupGraph, Error> {
    serde_json::from_str::<GraphDocument>(text)?.to_graph()
}

/// Graphviz source. Secondary edges are dashed, critical vertices are
/// drawn as diamonds and the basepoint is doubled.
pub fn to_dot(g: &SubgroupGraph) -> String {
    let mut out = String::from("graph subgroup {\n  node [shape=circle];\n");
    let o = g.basepoint();
    for v in g.vertices() {
        let shape = match g.class(v) {
            VertexClass::Critical => "diamond",
            _ if v == o => "doublecircle",
            _ => "circle",
        };
        let style = if g.class(v) == VertexClass::Primary { "solid" } else { "dashed" };
        let mut label = v.to_string();
        if v == o {
            label.push_str(" O");
        }
        if g.terminal() == Some(v) {
            label.push_str(" T");
        }
        let _ = writeln!(
            out,
            "  v{v} [label=\"{label}\", shape={shape}, style={style}, class={:?}];",
            format!("{:?}", g.class(v)).to_lowercase()
        );
    }
    for (_, e) in g.edges() {
        let style = match e.provenance {
            Provenance::Primary => "solid",
            Provenance::Secondary => "dashed",
        };
        let _ = writeln!(
            out,
            "  v{} -- v{} [label=\"a{}\", style={style}];",
            e.ends[0],
            e.ends[1],
            e.label + 1
        );
    }
    out.push_str("}\n");
    out
}
