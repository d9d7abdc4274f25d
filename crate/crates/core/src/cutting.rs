//! Cut points, parameter families at the cuts, and the graph surgery built on
//! them: spanning-tree cutting, cutting along a nodal set, subdivision and
//! splitting into components.
//!
//! A cut at position `t` on edge `from → to` creates two leaves. The leaf
//! `c⁺` is the end of the piece attached to `from` (the limit `t⁻`), the leaf
//! `c⁻` is the start of the piece attached to `to` (the limit `t⁺`).
//! Derivatives at both leaves are taken into their pieces, so
//! `f'(c⁺) = -∂ₜf(t⁻)` and `f'(c⁻) = ∂ₜf(t⁺)`.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::{
    DisjointSets, Edge, EdgePoint, MetricGraph, PotentialPiece, Vertex, VertexCondition,
};

/// Minimum separation between marked points on an edge, relative to its length.
pub(crate) const POINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutPoint {
    pub edge: usize,
    pub t: f64,
    pub label: usize,
}

impl CutPoint {
    pub fn point(&self) -> EdgePoint {
        EdgePoint::new(self.edge, self.t)
    }
}

/// Conditions joining the two leaves of every cut.
#[derive(Clone, Debug, PartialEq)]
pub enum CutFamily {
    /// `f(c⁺) = f(c⁻)`, `f'(c⁺) = -f'(c⁻)`: the uncut graph.
    Glued,
    /// `f(c⁺) = e^{iα} f(c⁻)`, `f'(c⁺) = -e^{iα} f'(c⁻)`.
    Flux(Vec<f64>),
    /// `f(c⁺) = e^{α} f(c⁻)`, `f'(c⁺) = -e^{α} f'(c⁻)`.
    ImaginaryFlux(Vec<f64>),
    /// `f'(c⁺) = γ f(c⁺)`, `f'(c⁻) = -γ f(c⁻)`.
    Robin(Vec<f64>),
    /// `f(c⁺) = f(c⁻) = 0`, the `|γ| → ∞` limit of the Robin family.
    Dirichlet,
}

impl CutFamily {
    pub fn params(&self) -> Option<&[f64]> {
        match self {
            CutFamily::Flux(p) | CutFamily::ImaginaryFlux(p) | CutFamily::Robin(p) => Some(p),
            CutFamily::Glued | CutFamily::Dirichlet => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CutFamily::Glued => "glued",
            CutFamily::Flux(_) => "flux",
            CutFamily::ImaginaryFlux(_) => "imaginary-flux",
            CutFamily::Robin(_) => "robin",
            CutFamily::Dirichlet => "dirichlet",
        }
    }

    /// Whether the operator is self-adjoint, i.e. has a real, ordered spectrum.
    pub fn is_self_adjoint(&self) -> bool {
        !matches!(self, CutFamily::ImaginaryFlux(p) if p.iter().any(|&a| a != 0.0))
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutSet {
    pub cuts: Vec<CutPoint>,
    pub family: CutFamily,
}

impl CutSet {
    pub fn empty() -> Self {
        Self {
            cuts: Vec::new(),
            family: CutFamily::Glued,
        }
    }

    pub fn glued(points: &[EdgePoint]) -> Self {
        let cuts = points
            .iter()
            .enumerate()
            .map(|(label, p)| CutPoint {
                edge: p.edge,
                t: p.t,
                label,
            })
            .collect();
        Self {
            cuts,
            family: CutFamily::Glued,
        }
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Same cut points with a different family.
    pub fn with_family(&self, family: CutFamily) -> Result<Self> {
        if let Some(p) = family.params() {
            if p.len() != self.cuts.len() {
                return Err(Error::InvalidCutSet(format!(
                    "{} parameters for {} cuts",
                    p.len(),
                    self.cuts.len()
                )));
            }
        }
        let family = match family {
            CutFamily::Flux(p) => CutFamily::Flux(p.into_iter().map(wrap_angle).collect()),
            other => other,
        };
        Ok(Self {
            cuts: self.cuts.clone(),
            family,
        })
    }

    pub fn flux(&self, alpha: &[f64]) -> Result<Self> {
        self.with_family(CutFamily::Flux(alpha.to_vec()))
    }

    pub fn imaginary_flux(&self, alpha: &[f64]) -> Result<Self> {
        self.with_family(CutFamily::ImaginaryFlux(alpha.to_vec()))
    }

    pub fn robin(&self, gamma: &[f64]) -> Result<Self> {
        self.with_family(CutFamily::Robin(gamma.to_vec()))
    }

    pub fn as_glued(&self) -> Self {
        Self {
            cuts: self.cuts.clone(),
            family: CutFamily::Glued,
        }
    }

    pub fn points(&self) -> Vec<EdgePoint> {
        self.cuts.iter().map(CutPoint::point).collect()
    }

    /// Checks the cut points against `graph`.
    pub fn validate(&self, graph: &MetricGraph) -> Result<()> {
        if let Some(p) = self.family.params() {
            if p.len() != self.cuts.len() {
                return Err(Error::InvalidCutSet(format!(
                    "{} parameters for {} cuts",
                    p.len(),
                    self.cuts.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCutSet("non-finite parameter".into()));
            }
        }
        check_points(graph, &self.points())?;
        for c in &self.cuts {
            let edge = graph.edge(c.edge);
            if edge
                .potential_breaks()
                .iter()
                .any(|&b| (b - c.t).abs() <= POINT_TOL * edge.length)
            {
                return Err(Error::InvalidCutSet(format!(
                    "cut on edge {} sits on a potential breakpoint",
                    edge.name
                )));
            }
        }
        Ok(())
    }
}

/// Checks that points are on existing edges, strictly interior and distinct.
pub(crate) fn check_points(graph: &MetricGraph, points: &[EdgePoint]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if p.edge >= graph.edges().len() {
            return Err(Error::PointNotInterior {
                edge: p.edge,
                t: p.t,
            });
        }
        let len = graph.edge(p.edge).length;
        if !(p.t > POINT_TOL * len && p.t < len * (1.0 - POINT_TOL)) {
            return Err(Error::PointNotInterior {
                edge: p.edge,
                t: p.t,
            });
        }
        if points[..i]
            .iter()
            .any(|o| o.edge == p.edge && (o.t - p.t).abs() <= POINT_TOL * len)
        {
            return Err(Error::DuplicatePoint {
                edge: p.edge,
                t: p.t,
            });
        }
    }
    Ok(())
}

/// How the spanning tree is chosen.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum TreeSelection {
    /// Breadth-first search from vertex 0, edges visited in index order.
    #[default]
    Bfs,
    /// The given edges form the tree.
    Explicit(Vec<usize>),
}

/// Where the cut sits on each non-tree edge.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum PositionRule {
    #[default]
    Midpoint,
    /// One position per non-tree edge, in increasing edge order.
    Explicit(Vec<f64>),
}

/// Edges of the chosen spanning tree, flagged per edge.
pub fn spanning_tree(graph: &MetricGraph, selection: &TreeSelection) -> Result<Vec<bool>> {
    graph.ensure_valid()?;
    let nv = graph.vertices().len();
    let ne = graph.edges().len();
    let mut in_tree = vec![false; ne];
    match selection {
        TreeSelection::Bfs => {
            let mut seen = vec![false; nv];
            let mut queue = VecDeque::from([0]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for (i, e) in graph.edges().iter().enumerate() {
                    if e.is_loop() {
                        continue;
                    }
                    let other = if e.from == v {
                        e.to
                    } else if e.to == v {
                        e.from
                    } else {
                        continue;
                    };
                    if !seen[other] {
                        seen[other] = true;
                        in_tree[i] = true;
                        queue.push_back(other);
                    }
                }
            }
        }
        TreeSelection::Explicit(edges) => {
            let mut dsu = DisjointSets::new(nv);
            for &i in edges {
                let e = graph
                    .edges()
                    .get(i)
                    .ok_or_else(|| Error::InvalidCutSet(format!("no edge {i}")))?;
                if in_tree[i] || !dsu.union(e.from, e.to) {
                    return Err(Error::InvalidCutSet("tree edges contain a cycle".into()));
                }
                in_tree[i] = true;
            }
            if dsu.count() != 1 {
                return Err(Error::InvalidCutSet(
                    "tree edges do not span the graph".into(),
                ));
            }
        }
    }
    Ok(in_tree)
}

/// One cut per edge outside a spanning tree; the result is glued.
pub fn spanning_tree_cuts(
    graph: &MetricGraph,
    selection: &TreeSelection,
    positions: &PositionRule,
) -> Result<CutSet> {
    let in_tree = spanning_tree(graph, selection)?;
    let chords: Vec<usize> = (0..in_tree.len()).filter(|&i| !in_tree[i]).collect();
    let ts: Vec<f64> = match positions {
        PositionRule::Midpoint => chords
            .iter()
            .map(|&i| {
                let edge = graph.edge(i);
                let mid = 0.5 * edge.length;
                let on_break = edge
                    .potential_breaks()
                    .iter()
                    .any(|&b| (b - mid).abs() <= POINT_TOL * edge.length);
                if on_break {
                    mid + 1e-3 * edge.length
                } else {
                    mid
                }
            })
            .collect(),
        PositionRule::Explicit(ts) => {
            if ts.len() != chords.len() {
                return Err(Error::InvalidCutSet(format!(
                    "{} positions for {} non-tree edges",
                    ts.len(),
                    chords.len()
                )));
            }
            ts.clone()
        }
    };
    let points: Vec<EdgePoint> = chords
        .iter()
        .zip(&ts)
        .map(|(&e, &t)| EdgePoint::new(e, t))
        .collect();
    let set = CutSet::glued(&points);
    set.validate(graph)?;
    Ok(set)
}

/// Components of the graph with `removed` points deleted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpenComponents {
    /// Number of connected components.
    pub count: usize,
    /// Sum of the Betti numbers of the components.
    pub betti: usize,
}

/// Counts components of `Γ ∖ removed` and their total Betti number by
/// turning every removed point into two fresh leaves.
pub fn open_components(graph: &MetricGraph, removed: &[EdgePoint]) -> OpenComponents {
    let nv = graph.vertices().len();
    let mut per_edge: Vec<Vec<f64>> = vec![Vec::new(); graph.edges().len()];
    for p in removed {
        per_edge[p.edge].push(p.t);
    }
    let total_nodes = nv + 2 * removed.len();
    let mut dsu = DisjointSets::new(total_nodes);
    let mut next = nv;
    let mut pieces = 0usize;
    for (i, e) in graph.edges().iter().enumerate() {
        let ts = &per_edge[i];
        let mut start = e.from;
        for _ in ts {
            // piece ends at a fresh leaf; the next piece starts at another one
            let end = next;
            let restart = next + 1;
            next += 2;
            dsu.union(start, end);
            pieces += 1;
            start = restart;
        }
        dsu.union(start, e.to);
        pieces += 1;
    }
    let count = dsu.count();
    OpenComponents {
        count,
        betti: pieces + count - total_nodes,
    }
}

/// Offset rule for cuts placed next to zeros.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutOffset {
    /// Absolute distance from the zero.
    Absolute(f64),
    /// Distance as a fraction of the edge length.
    Relative(f64),
    /// Halfway to the next marked point (zero, cut or edge end).
    Midway,
}

impl Default for CutOffset {
    fn default() -> Self {
        CutOffset::Relative(1e-3)
    }
}

/// Cuts a graph next to those zeros whose removal keeps it connected,
/// processing `zeros` in input order.
///
/// The number of cuts `η` is checked against both `1 + φ - ν` and
/// `β(Γ) - β(Γ ∖ N)`.
pub fn cut_for_nodal_set(
    graph: &MetricGraph,
    zeros: &[EdgePoint],
    offset: CutOffset,
) -> Result<CutSet> {
    graph.ensure_valid()?;
    check_points(graph, zeros)?;
    let mut cuts: Vec<EdgePoint> = Vec::new();
    for z in zeros {
        let mut trial = cuts.clone();
        trial.push(*z);
        if open_components(graph, &trial).count > 1 {
            continue;
        }
        cuts.push(place_near(graph, *z, zeros, &cuts, offset)?);
    }

    let beta = graph.edges().len() + 1 - graph.vertices().len();
    let rest = open_components(graph, zeros);
    let eta = cuts.len();
    if eta + rest.count != 1 + zeros.len() {
        return Err(Error::CutCountMismatch(format!(
            "eta = {eta}, phi = {}, nu = {}",
            zeros.len(),
            rest.count
        )));
    }
    if eta + rest.betti != beta {
        return Err(Error::CutCountMismatch(format!(
            "eta = {eta}, beta = {beta}, beta of complement = {}",
            rest.betti
        )));
    }
    let set = CutSet::glued(&cuts);
    set.validate(graph)?;
    Ok(set)
}

fn place_near(
    graph: &MetricGraph,
    zero: EdgePoint,
    zeros: &[EdgePoint],
    cuts: &[EdgePoint],
    offset: CutOffset,
) -> Result<EdgePoint> {
    let edge = graph.edge(zero.edge);
    let len = edge.length;
    let mut marks: Vec<f64> = zeros
        .iter()
        .chain(cuts)
        .filter(|p| p.edge == zero.edge && (p.t - zero.t).abs() > POINT_TOL * len)
        .map(|p| p.t)
        .collect();
    marks.extend(edge.potential_breaks());
    let above = marks
        .iter()
        .copied()
        .filter(|&t| t > zero.t)
        .fold(len, f64::min);
    let below = marks
        .iter()
        .copied()
        .filter(|&t| t < zero.t)
        .fold(0.0, f64::max);

    let eps = match offset {
        CutOffset::Absolute(e) => e,
        CutOffset::Relative(r) => r * len,
        CutOffset::Midway => {
            return Ok(EdgePoint::new(zero.edge, 0.5 * (zero.t + above)));
        }
    };
    // a cut must stay strictly between the zero and the neighbouring mark
    let margin = POINT_TOL * len * 10.0;
    if eps > 0.0 && zero.t + eps < above - margin {
        return Ok(EdgePoint::new(zero.edge, zero.t + eps));
    }
    if eps > 0.0 && zero.t - eps > below + margin {
        return Ok(EdgePoint::new(zero.edge, zero.t - eps));
    }
    Err(Error::EpsilonTooLarge {
        edge: zero.edge,
        t: zero.t,
        epsilon: eps,
    })
}

/// Potential pieces covering `[a, b]` of `edge`.
fn potential_between(edge: &Edge, a: f64, b: f64) -> Vec<PotentialPiece> {
    let mut out = Vec::new();
    let mut start = 0.0;
    for piece in &edge.potential {
        let end = start + piece.len;
        let lo = start.max(a);
        let hi = end.min(b);
        if hi - lo > 0.0 {
            out.push(PotentialPiece {
                len: hi - lo,
                q: piece.q,
            });
        }
        start = end;
    }
    if out.is_empty() {
        out.push(PotentialPiece {
            len: b - a,
            q: edge.q_at(a),
        });
    }
    // absorb rounding so the pieces sum to the new edge length
    let sum: f64 = out.iter().map(|p| p.len).sum();
    if let Some(last) = out.last_mut() {
        last.len += (b - a) - sum;
    }
    out
}

/// Splits edges at `points`. `join` decides what happens at each point: `None`
/// inserts one transparent vertex, `Some(cond)` inserts two leaves with `cond`.
fn split_edges(
    graph: &MetricGraph,
    points: &[EdgePoint],
    join: Option<VertexCondition>,
) -> MetricGraph {
    let mut vertices: Vec<Vertex> = graph.vertices().to_vec();
    let mut edges: Vec<Edge> = Vec::new();
    for (i, e) in graph.edges().iter().enumerate() {
        let mut ts: Vec<f64> = points.iter().filter(|p| p.edge == i).map(|p| p.t).collect();
        ts.sort_by(f64::total_cmp);
        if ts.is_empty() {
            edges.push(e.clone());
            continue;
        }
        let mut start_vertex = e.from;
        let mut start_t = 0.0;
        for (k, &t) in ts.iter().enumerate() {
            let (end_vertex, next_start) = match join {
                None => {
                    vertices.push(Vertex {
                        name: format!("{}@{k}", e.name),
                        condition: VertexCondition::NEUMANN,
                    });
                    (vertices.len() - 1, vertices.len() - 1)
                }
                Some(cond) => {
                    vertices.push(Vertex {
                        name: format!("{}@{k}-", e.name),
                        condition: cond,
                    });
                    vertices.push(Vertex {
                        name: format!("{}@{k}+", e.name),
                        condition: cond,
                    });
                    (vertices.len() - 2, vertices.len() - 1)
                }
            };
            edges.push(Edge {
                name: format!("{}.{k}", e.name),
                from: start_vertex,
                to: end_vertex,
                length: t - start_t,
                potential: potential_between(e, start_t, t),
            });
            start_vertex = next_start;
            start_t = t;
        }
        edges.push(Edge {
            name: format!("{}.{}", e.name, ts.len()),
            from: start_vertex,
            to: e.to,
            length: e.length - start_t,
            potential: potential_between(e, start_t, e.length),
        });
    }
    MetricGraph::from_parts(vertices, edges)
}

/// Inserts a `Delta(0)` vertex at every point; metric and spectrum are unchanged.
pub fn subdivide_at(graph: &MetricGraph, points: &[EdgePoint]) -> Result<MetricGraph> {
    graph.ensure_valid()?;
    check_points(graph, points)?;
    Ok(split_edges(graph, points, None))
}

/// Replaces every point by two leaves carrying `condition`. The result is
/// usually disconnected; see [`components`].
pub fn split_at_points(
    graph: &MetricGraph,
    points: &[EdgePoint],
    condition: VertexCondition,
) -> Result<MetricGraph> {
    graph.ensure_valid()?;
    check_points(graph, points)?;
    Ok(split_edges(graph, points, Some(condition)))
}

/// Connected components as separate graphs, ordered by their smallest vertex.
pub fn components(graph: &MetricGraph) -> Vec<MetricGraph> {
    let nv = graph.vertices().len();
    let mut dsu = DisjointSets::new(nv);
    for e in graph.edges() {
        dsu.union(e.from, e.to);
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut comp_of = vec![0usize; nv];
    for (v, comp) in comp_of.iter_mut().enumerate() {
        let r = dsu.find(v);
        let idx = match roots.iter().position(|&x| x == r) {
            Some(i) => i,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        *comp = idx;
    }
    let mut out = Vec::with_capacity(roots.len());
    for c in 0..roots.len() {
        let mut map = vec![usize::MAX; nv];
        let mut vertices = Vec::new();
        for v in 0..nv {
            if comp_of[v] == c {
                map[v] = vertices.len();
                vertices.push(graph.vertex(v).clone());
            }
        }
        let edges = graph
            .edges()
            .iter()
            .filter(|e| comp_of[e.from] == c)
            .map(|e| Edge {
                from: map[e.from],
                to: map[e.to],
                ..e.clone()
            })
            .collect();
        out.push(MetricGraph::from_parts(vertices, edges));
    }
    out
}
