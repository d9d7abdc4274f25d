//! Compact metric graphs with piecewise-constant potentials and δ-type
//! vertex conditions.
//!
//! Vertices and edges are addressed by their index in the graph. Each edge is
//! oriented from `from` to `to`; the local coordinate runs from `0` at `from`
//! to `length` at `to`. Loops (`from == to`) are allowed.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Condition imposed at a vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertexCondition {
    /// Continuity plus `Σ f'(v) = χ f(v)` with derivatives taken into the edges.
    Delta(f64),
    /// `f(v) = 0`; only allowed on leaves.
    Dirichlet,
}

impl VertexCondition {
    pub const NEUMANN: VertexCondition = VertexCondition::Delta(0.0);
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub condition: VertexCondition,
}

/// A piece of an edge on which the potential is constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialPiece {
    pub len: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub name: String,
    pub from: usize,
    pub to: usize,
    pub length: f64,
    /// Ordered from `from` to `to`; lengths sum to `length`.
    pub potential: Vec<PotentialPiece>,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }

    /// Interior breakpoints of the potential, in edge coordinates.
    pub fn potential_breaks(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::new();
        for piece in &self.potential[..self.potential.len().saturating_sub(1)] {
            acc += piece.len;
            out.push(acc);
        }
        out
    }

    /// Potential value at `t`; at a breakpoint the piece to the right wins.
    pub fn q_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for piece in &self.potential {
            acc += piece.len;
            if t < acc {
                return piece.q;
            }
        }
        self.potential.last().map_or(0.0, |p| p.q)
    }

    pub fn max_abs_q(&self) -> f64 {
        self.potential.iter().map(|p| p.q.abs()).fold(0.0, f64::max)
    }
}

/// A point on an edge, `t` measured from the edge's `from` vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgePoint {
    pub edge: usize,
    pub t: f64,
}

impl EdgePoint {
    pub fn new(edge: usize, t: f64) -> Self {
        Self { edge, t }
    }
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    Empty,
    NonpositiveLength { edge: usize },
    PotentialLengthMismatch { edge: usize },
    NonpositivePotentialPiece { edge: usize },
    NonfiniteValue { what: String },
    UnknownEndpoint { edge: usize },
    UnusedVertex { vertex: usize },
    DirichletOnInnerVertex { vertex: usize },
    DuplicateName { name: String },
    Disconnected,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl MetricGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Self {
        Self { vertices, edges }
    }

    pub fn add_vertex(&mut self, name: impl Into<String>, condition: VertexCondition) -> usize {
        self.vertices.push(Vertex {
            name: name.into(),
            condition,
        });
        self.vertices.len() - 1
    }

    /// Adds an edge with zero potential.
    pub fn add_edge(&mut self, from: usize, to: usize, length: f64) -> usize {
        self.add_edge_with_potential(
            from,
            to,
            length,
            vec![PotentialPiece {
                len: length,
                q: 0.0,
            }],
        )
    }

    pub fn add_edge_with_potential(
        &mut self,
        from: usize,
        to: usize,
        length: f64,
        potential: Vec<PotentialPiece>,
    ) -> usize {
        let name = format!("e{}", self.edges.len());
        self.edges.push(Edge {
            name,
            from,
            to,
            length,
            potential,
        });
        self.edges.len() - 1
    }

    pub fn set_edge_name(&mut self, edge: usize, name: impl Into<String>) {
        self.edges[edge].name = name.into();
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    /// Copy of the graph with the condition at `v` replaced.
    pub fn with_condition(&self, v: usize, condition: VertexCondition) -> Self {
        let mut g = self.clone();
        g.vertices[v].condition = condition;
        g
    }

    /// Number of edge ends at `v` (a loop counts twice).
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| usize::from(e.from == v) + usize::from(e.to == v))
            .sum()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_q(&self) -> f64 {
        self.edges.iter().map(Edge::max_abs_q).fold(0.0, f64::max)
    }

    pub fn min_q(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|e| e.potential.iter().map(|p| p.q))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let diagnostics = self.validate();
        if diagnostics.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(diagnostics))
        }
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }
}

pub fn validate(graph: &MetricGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if graph.vertices.is_empty() || graph.edges.is_empty() {
        out.push(Diagnostic::Empty);
        return out;
    }
    let nv = graph.vertices.len();

    let mut names = HashSet::new();
    for v in &graph.vertices {
        if !names.insert(format!("v:{}", v.name)) {
            out.push(Diagnostic::DuplicateName {
                name: v.name.clone(),
            });
        }
        if let VertexCondition::Delta(chi) = v.condition {
            if !chi.is_finite() {
                out.push(Diagnostic::NonfiniteValue {
                    what: format!("strength at vertex {}", v.name),
                });
            }
        }
    }
    for (i, e) in graph.edges.iter().enumerate() {
        if !names.insert(format!("e:{}", e.name)) {
            out.push(Diagnostic::DuplicateName {
                name: e.name.clone(),
            });
        }
        if e.from >= nv || e.to >= nv {
            out.push(Diagnostic::UnknownEndpoint { edge: i });
        }
        if !e.length.is_finite() {
            out.push(Diagnostic::NonfiniteValue {
                what: format!("length of edge {}", e.name),
            });
        } else if e.length <= 0.0 {
            out.push(Diagnostic::NonpositiveLength { edge: i });
        }
        if e.potential
            .iter()
            .any(|p| !p.len.is_finite() || !p.q.is_finite())
        {
            out.push(Diagnostic::NonfiniteValue {
                what: format!("potential on edge {}", e.name),
            });
        } else if e.potential.is_empty() || e.potential.iter().any(|p| p.len <= 0.0) {
            out.push(Diagnostic::NonpositivePotentialPiece { edge: i });
        } else if e.length.is_finite() && e.length > 0.0 {
            let sum: f64 = e.potential.iter().map(|p| p.len).sum();
            if (sum - e.length).abs() > 1e-12 * e.length {
                out.push(Diagnostic::PotentialLengthMismatch { edge: i });
            }
        }
    }
    if out
        .iter()
        .any(|d| matches!(d, Diagnostic::UnknownEndpoint { .. }))
    {
        return out;
    }

    for v in 0..nv {
        let degree = graph.degree(v);
        if degree == 0 {
            out.push(Diagnostic::UnusedVertex { vertex: v });
        } else if degree > 1 && graph.vertices[v].condition == VertexCondition::Dirichlet {
            out.push(Diagnostic::DirichletOnInnerVertex { vertex: v });
        }
    }

    let mut dsu = DisjointSets::new(nv);
    for e in &graph.edges {
        dsu.union(e.from, e.to);
    }
    let root = dsu.find(0);
    if (1..nv).any(|v| dsu.find(v) != root) {
        out.push(Diagnostic::Disconnected);
    }
    out
}

/// First Betti number `|E| - |V| + 1` of a valid (connected) graph.
pub fn betti(graph: &MetricGraph) -> Result<usize> {
    graph.ensure_valid()?;
    Ok(graph.edges.len() + 1 - graph.vertices.len())
}

/// Union-find over `0..n`.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `false` when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }

    pub fn count(&mut self) -> usize {
        (0..self.parent.len())
            .filter(|&x| self.find(x) == x)
            .count()
    }
}
