//! Segment layout of a graph with cuts, and the secular matrix whose
//! nullspace at `λ` is the eigenspace.
//!
//! Every segment (a maximal piece of an edge with constant potential and no
//! cut inside) carries two unknowns, normally the value and the scaled
//! derivative at its start, `(f, f'/k)` with `k = sqrt(max(1, |λ|))`. Rows are
//! normalised to unit length, so singular values are comparable across `λ`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cutting::{CutFamily, CutSet};
use crate::error::Result;
use crate::graph::{MetricGraph, VertexCondition};
use crate::spectral::transfer::segment_transfer_complex;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub edge: usize,
    /// Position of the segment start along its edge.
    pub offset: f64,
    pub len: f64,
    pub q: f64,
}

/// One end of a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct End {
    pub segment: usize,
    pub at_start: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Joint {
    /// Interior breakpoint of the potential: plain continuity of `f` and `f'`.
    Continue { left: usize, right: usize },
    /// Cut `cut`: `left` ends at `c⁺`, `right` starts at `c⁻`.
    Cut {
        cut: usize,
        left: usize,
        right: usize,
    },
    /// A vertex of the original graph.
    Vertex {
        vertex: usize,
        condition: VertexCondition,
        ends: Vec<End>,
    },
}

/// Where a Wronskian or a boundary value is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    Vertex(usize),
    /// `plus == true` is `c⁺`, the end of the piece attached to the edge's `from`.
    Cut {
        cut: usize,
        plus: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub segments: Vec<Segment>,
    pub joints: Vec<Joint>,
    pub family: CutFamily,
    /// Segment index range of every edge.
    pub edge_segments: Vec<std::ops::Range<usize>>,
    /// Joint index of every cut.
    pub cut_joints: Vec<usize>,
    pub total_length: f64,
}

impl Layout {
    fn build(graph: &MetricGraph, cutset: &CutSet) -> Self {
        let mut segments = Vec::new();
        let mut joints = Vec::new();
        let mut edge_segments = Vec::with_capacity(graph.edges().len());
        let mut cut_joints = vec![usize::MAX; cutset.len()];

        for (e, edge) in graph.edges().iter().enumerate() {
            let mut marks: Vec<(f64, Option<usize>)> = edge
                .potential_breaks()
                .into_iter()
                .map(|t| (t, None))
                .collect();
            marks.extend(
                cutset
                    .cuts
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.edge == e)
                    .map(|(j, c)| (c.t, Some(j))),
            );
            marks.sort_by(|a, b| a.0.total_cmp(&b.0));

            let first = segments.len();
            let mut start = 0.0;
            for &(t, cut) in &marks {
                segments.push(Segment {
                    edge: e,
                    offset: start,
                    len: t - start,
                    q: edge.q_at(0.5 * (start + t)),
                });
                let left = segments.len() - 1;
                let right = left + 1;
                match cut {
                    Some(j) => {
                        cut_joints[j] = joints.len();
                        joints.push(Joint::Cut {
                            cut: j,
                            left,
                            right,
                        });
                    }
                    None => joints.push(Joint::Continue { left, right }),
                }
                start = t;
            }
            segments.push(Segment {
                edge: e,
                offset: start,
                len: edge.length - start,
                q: edge.q_at(0.5 * (start + edge.length)),
            });
            edge_segments.push(first..segments.len());
        }

        for (v, vertex) in graph.vertices().iter().enumerate() {
            let mut ends = Vec::new();
            for (e, edge) in graph.edges().iter().enumerate() {
                if edge.from == v {
                    ends.push(End {
                        segment: edge_segments[e].start,
                        at_start: true,
                    });
                }
                if edge.to == v {
                    ends.push(End {
                        segment: edge_segments[e].end - 1,
                        at_start: false,
                    });
                }
            }
            joints.push(Joint::Vertex {
                vertex: v,
                condition: vertex.condition,
                ends,
            });
        }

        Layout {
            segments,
            joints,
            family: cutset.family.clone(),
            edge_segments,
            cut_joints,
            total_length: graph.total_length(),
        }
    }

    pub fn unknowns(&self) -> usize {
        2 * self.segments.len()
    }

    /// Same geometry and joints, ignoring the family.
    pub fn same_geometry(&self, other: &Layout) -> bool {
        self.segments == other.segments && self.joints == other.joints
    }

    pub fn vertex_joint(&self, v: usize) -> Option<usize> {
        self.joints
            .iter()
            .position(|j| matches!(j, Joint::Vertex { vertex, .. } if *vertex == v))
    }

    /// The segment end sitting at a degree-one site.
    pub fn leaf_end(&self, site: Site) -> Option<End> {
        match site {
            Site::Vertex(v) => match &self.joints[self.vertex_joint(v)?] {
                Joint::Vertex { ends, .. } if ends.len() == 1 => Some(ends[0]),
                _ => None,
            },
            Site::Cut { cut, plus } => match self.joints.get(*self.cut_joints.get(cut)?)? {
                Joint::Cut { left, right, .. } => Some(if plus {
                    End {
                        segment: *left,
                        at_start: false,
                    }
                } else {
                    End {
                        segment: *right,
                        at_start: true,
                    }
                }),
                _ => None,
            },
        }
    }

    /// All segment ends at a site.
    pub fn site_ends(&self, site: Site) -> Option<Vec<End>> {
        match site {
            Site::Vertex(v) => match &self.joints[self.vertex_joint(v)?] {
                Joint::Vertex { ends, .. } => Some(ends.clone()),
                _ => None,
            },
            Site::Cut { .. } => self.leaf_end(site).map(|e| vec![e]),
        }
    }

    /// Joints whose conditions involve `site`.
    pub fn joint_of(&self, site: Site) -> Option<usize> {
        match site {
            Site::Vertex(v) => self.vertex_joint(v),
            Site::Cut { cut, .. } => self.cut_joints.get(cut).copied(),
        }
    }
}

/// Derivative scale used for the unknowns at `λ`.
pub(crate) fn slope_scale(lambda: Complex64) -> f64 {
    lambda.norm().max(1.0).sqrt()
}

/// Unknowns of a segment.
///
/// Usually the value and scaled slope at the start. A segment deep in the
/// classically forbidden region (`λ < q`, `κ·len > 1`) instead carries the
/// amplitudes of `e^{-κs}` and `e^{-κ(len-s)}`, which keeps both ends of
/// the segment well conditioned.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Basis {
    Start,
    Decaying { kappa: f64, e: f64 },
}

pub(crate) fn basis(seg: &Segment, lambda: Complex64) -> Basis {
    if lambda.im == 0.0 && lambda.re < seg.q {
        let kappa = (seg.q - lambda.re).sqrt();
        if kappa * seg.len > 1.0 {
            return Basis::Decaying {
                kappa,
                e: (-kappa * seg.len).exp(),
            };
        }
    }
    Basis::Start
}

/// Linear forms `(value, along-edge slope / k)` of a segment end, as
/// coefficients on that segment's two unknowns.
#[derive(Clone, Copy)]
pub(crate) struct EndForms {
    pub value: [Complex64; 2],
    pub slope: [Complex64; 2],
}

pub(crate) fn end_forms(seg: &Segment, at_start: bool, lambda: Complex64, k: f64) -> EndForms {
    let c = |x: f64| Complex64::from(x);
    match basis(seg, lambda) {
        Basis::Decaying { kappa, e } => {
            let r = kappa / k;
            if at_start {
                EndForms {
                    value: [c(1.0), c(e)],
                    slope: [c(-r), c(r * e)],
                }
            } else {
                EndForms {
                    value: [c(e), c(1.0)],
                    slope: [c(-r * e), c(r)],
                }
            }
        }
        Basis::Start if at_start => EndForms {
            value: [c(1.0), c(0.0)],
            slope: [c(0.0), c(1.0)],
        },
        Basis::Start => {
            let t = segment_transfer_complex(lambda, seg.q, seg.len);
            EndForms {
                value: [t[0][0], t[0][1] * k],
                slope: [t[1][0] / k, t[1][1]],
            }
        }
    }
}

/// Value and slope per segment end.
pub(crate) type EndValues = Vec<(f64, f64)>;

/// Value and slope at both ends of every segment from a real unknown vector.
pub(crate) fn unknowns_to_ends(layout: &Layout, lambda: f64, x: &[f64]) -> (EndValues, EndValues) {
    let z = Complex64::from(lambda);
    let k = slope_scale(z);
    let mut starts = Vec::with_capacity(layout.segments.len());
    let mut ends = Vec::with_capacity(layout.segments.len());
    for (i, seg) in layout.segments.iter().enumerate() {
        let (u, v) = (x[2 * i], x[2 * i + 1]);
        for (at_start, out) in [(true, &mut starts), (false, &mut ends)] {
            let f = end_forms(seg, at_start, z, k);
            out.push((
                f.value[0].re * u + f.value[1].re * v,
                (f.slope[0].re * u + f.slope[1].re * v) * k,
            ));
        }
    }
    (starts, ends)
}

/// Inverse of [`unknowns_to_ends`] given the end values of every segment.
pub(crate) fn ends_to_unknowns(
    layout: &Layout,
    lambda: f64,
    starts: &[(f64, f64)],
    ends: &[(f64, f64)],
) -> Vec<f64> {
    let k = slope_scale(Complex64::from(lambda));
    let mut x = Vec::with_capacity(layout.unknowns());
    for (i, seg) in layout.segments.iter().enumerate() {
        match basis(seg, Complex64::from(lambda)) {
            Basis::Start => x.extend([starts[i].0, starts[i].1 / k]),
            Basis::Decaying { e, .. } => {
                let (f0, fl) = (starts[i].0, ends[i].0);
                let d = 1.0 - e * e;
                x.extend([(f0 - e * fl) / d, (fl - e * f0) / d]);
            }
        }
    }
    x
}

/// Sparse row: `(column, coefficient)` pairs plus right-hand side.
#[derive(Clone, Debug, Default)]
pub(crate) struct Row {
    pub entries: Vec<(usize, Complex64)>,
    pub rhs: Complex64,
}

impl Row {
    fn add(&mut self, seg: usize, form: [Complex64; 2], factor: Complex64) {
        self.entries.push((2 * seg, form[0] * factor));
        self.entries.push((2 * seg + 1, form[1] * factor));
    }
}

/// Rows of every joint, in joint order.
pub(crate) fn joint_rows(layout: &Layout, joint: &Joint, lambda: Complex64, k: f64) -> Vec<Row> {
    let one = Complex64::new(1.0, 0.0);
    let forms = |seg: usize, at_start: bool| end_forms(&layout.segments[seg], at_start, lambda, k);
    let mut rows = Vec::new();
    match joint {
        Joint::Continue { left, right } => {
            let (l, r) = (forms(*left, false), forms(*right, true));
            let mut a = Row::default();
            a.add(*left, l.value, one);
            a.add(*right, r.value, -one);
            let mut b = Row::default();
            b.add(*left, l.slope, one);
            b.add(*right, r.slope, -one);
            rows.extend([a, b]);
        }
        Joint::Cut { cut, left, right } => {
            let (l, r) = (forms(*left, false), forms(*right, true));
            let jump = |phase: Complex64| {
                let mut a = Row::default();
                a.add(*left, l.value, one);
                a.add(*right, r.value, -phase);
                let mut b = Row::default();
                b.add(*left, l.slope, one);
                b.add(*right, r.slope, -phase);
                [a, b]
            };
            match &layout.family {
                CutFamily::Glued => rows.extend(jump(one)),
                CutFamily::Flux(alpha) => {
                    rows.extend(jump(Complex64::from_polar(1.0, alpha[*cut])))
                }
                CutFamily::ImaginaryFlux(alpha) => {
                    rows.extend(jump(Complex64::from(alpha[*cut].exp())))
                }
                CutFamily::Robin(gamma) => {
                    // in edge coordinates both sides carry f'/f = -γ
                    let g = Complex64::from(gamma[*cut] / k);
                    let mut a = Row::default();
                    a.add(*left, l.slope, one);
                    a.add(*left, l.value, g);
                    let mut b = Row::default();
                    b.add(*right, r.slope, one);
                    b.add(*right, r.value, g);
                    rows.extend([a, b]);
                }
                CutFamily::Dirichlet => {
                    let mut a = Row::default();
                    a.add(*left, l.value, one);
                    let mut b = Row::default();
                    b.add(*right, r.value, one);
                    rows.extend([a, b]);
                }
            }
        }
        Joint::Vertex {
            condition, ends, ..
        } => {
            let f: Vec<EndForms> = ends.iter().map(|e| forms(e.segment, e.at_start)).collect();
            match condition {
                VertexCondition::Dirichlet => {
                    for (end, form) in ends.iter().zip(&f) {
                        let mut a = Row::default();
                        a.add(end.segment, form.value, one);
                        rows.push(a);
                    }
                }
                VertexCondition::Delta(chi) => {
                    for i in 1..ends.len() {
                        let mut a = Row::default();
                        a.add(ends[0].segment, f[0].value, one);
                        a.add(ends[i].segment, f[i].value, -one);
                        rows.push(a);
                    }
                    let mut s = Row::default();
                    for (end, form) in ends.iter().zip(&f) {
                        // derivative into the edge: along-edge at a start, reversed at an end
                        let sign = if end.at_start { one } else { -one };
                        s.add(end.segment, form.slope, sign);
                    }
                    s.add(ends[0].segment, f[0].value, Complex64::from(-chi / k));
                    rows.push(s);
                }
            }
        }
    }
    rows
}

pub(crate) fn assemble(layout: &Layout, rows: &[Row]) -> (DMatrix<Complex64>, Vec<Complex64>) {
    let n = layout.unknowns();
    let mut m = DMatrix::<Complex64>::zeros(rows.len(), n);
    let mut rhs = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        for &(c, v) in &row.entries {
            m[(i, c)] += v;
        }
        // scale by the terms before they cancel, so an identically satisfied
        // row stays small instead of amplifying rounding noise
        let norm = row
            .entries
            .iter()
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm > 0.0 {
            m.row_mut(i).unscale_mut(norm);
            rhs.push(row.rhs / norm);
        } else {
            rhs.push(row.rhs);
        }
    }
    (m, rhs)
}

/// A graph with cut points and a condition family at the cuts.
#[derive(Clone, Debug)]
pub struct SpectralProblem {
    graph: MetricGraph,
    cutset: CutSet,
    layout: Arc<Layout>,
}

impl SpectralProblem {
    pub fn new(graph: &MetricGraph, cutset: &CutSet) -> Result<Self> {
        graph.ensure_valid()?;
        cutset.validate(graph)?;
        let layout = Arc::new(Layout::build(graph, cutset));
        Ok(Self {
            graph: graph.clone(),
            cutset: cutset.clone(),
            layout,
        })
    }

    /// The operator on `graph` with no cuts.
    pub fn uncut(graph: &MetricGraph) -> Result<Self> {
        Self::new(graph, &CutSet::empty())
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn cutset(&self) -> &CutSet {
        &self.cutset
    }

    pub fn family(&self) -> &CutFamily {
        &self.cutset.family
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// The same graph and cut points with another family.
    pub fn with_family(&self, family: CutFamily) -> Result<Self> {
        Self::new(&self.graph, &self.cutset.with_family(family)?)
    }

    /// Whether the secular matrix is real for real `λ`.
    pub fn is_real(&self) -> bool {
        match &self.cutset.family {
            CutFamily::Flux(alpha) => alpha
                .iter()
                .all(|&a| a == 0.0 || a.abs() == std::f64::consts::PI),
            _ => true,
        }
    }

    /// The row-normalised secular matrix at `λ`.
    pub fn secular_matrix(&self, lambda: Complex64) -> DMatrix<Complex64> {
        let k = slope_scale(lambda);
        let rows: Vec<Row> = self
            .layout
            .joints
            .iter()
            .flat_map(|j| joint_rows(&self.layout, j, lambda, k))
            .collect();
        assemble(&self.layout, &rows).0
    }

    /// Real part of the secular matrix at real `λ`; exact when [`is_real`](Self::is_real).
    pub fn secular_matrix_real(&self, lambda: f64) -> DMatrix<f64> {
        self.secular_matrix(Complex64::from(lambda)).map(|z| z.re)
    }

    /// Singular values at `λ`, ascending.
    pub fn singular_values(&self, lambda: Complex64) -> Vec<f64> {
        let mut sv: Vec<f64> = if lambda.im == 0.0 && self.is_real() {
            self.secular_matrix_real(lambda.re)
                .singular_values()
                .iter()
                .copied()
                .collect()
        } else {
            self.secular_matrix(lambda)
                .singular_values()
                .iter()
                .copied()
                .collect()
        };
        sv.sort_by(f64::total_cmp);
        sv
    }

    /// Smallest singular value relative to the largest.
    pub fn sigma_min(&self, lambda: Complex64) -> f64 {
        let sv = self.singular_values(lambda);
        // a nonzero unit row forces σ_max ≥ 1; only the zero matrix falls below
        sv[0] / sv[sv.len() - 1].max(1.0)
    }

    /// Lower bound for the spectrum of a self-adjoint family.
    ///
    /// The quadratic form is `∫|f'|² + ∫q|f|² + Σ χ|f|²` over vertices and
    /// Robin leaves. With `S` the total attractive strength and `ℓ` the
    /// shortest segment, `‖f‖∞² ≤ ε‖f'‖² + (1/ε + 1/ℓ)‖f‖²` at `ε = 1/S` gives
    /// `λ ≥ min q − S(S + 1/ℓ)`. The cruder `(χ·deg)²` estimate is also
    /// applied and the lower of the two is used.
    pub fn spectrum_lower_bound(&self) -> f64 {
        let g = &self.graph;
        let mut wells: Vec<(f64, usize)> = g
            .vertices()
            .iter()
            .enumerate()
            .filter_map(|(v, vx)| match vx.condition {
                VertexCondition::Delta(chi) if chi < 0.0 => Some((-chi, g.degree(v))),
                _ => None,
            })
            .collect();
        if let CutFamily::Robin(gamma) = &self.cutset.family {
            // one leaf of every Robin cut carries strength -|γ|
            wells.extend(gamma.iter().filter(|x| **x != 0.0).map(|x| (x.abs(), 1)));
        }
        let floor = g.min_q().min(0.0);
        if wells.is_empty() {
            return floor;
        }
        let total: f64 = wells.iter().map(|w| w.0).sum();
        let shortest = self
            .layout
            .segments
            .iter()
            .map(|s| s.len)
            .fold(f64::INFINITY, f64::min);
        let trace = total * (total + 1.0 / shortest);
        let naive = wells
            .iter()
            .map(|&(x, d)| (x * d as f64).powi(2))
            .fold(0.0, f64::max);
        floor - trace.max(naive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::cutting::{spanning_tree_cuts, PositionRule, TreeSelection};
    use crate::graph::EdgePoint;
    use std::f64::consts::PI;

    #[test]
    fn matrix_is_square() {
        for g in [
            catalog::lasso(3.0, 1.0),
            catalog::figure_eight(1.0, 1.4),
            catalog::star(&[1.0, 2.0, 3.0], 1.0),
        ] {
            let cuts =
                spanning_tree_cuts(&g, &TreeSelection::Bfs, &PositionRule::Midpoint).unwrap();
            let p = SpectralProblem::new(&g, &cuts).unwrap();
            let m = p.secular_matrix(Complex64::from(2.0));
            assert_eq!(m.nrows(), m.ncols());
            assert_eq!(m.ncols(), p.layout().unknowns());
        }
    }

    #[test]
    fn glued_circle_eigenvalue() {
        let p = SpectralProblem::uncut(&catalog::circle(2.0 * PI)).unwrap();
        assert!(p.sigma_min(Complex64::from(1.0)) < 1e-14);
        assert!(p.sigma_min(Complex64::from(1.3)) > 1e-3);
    }

    #[test]
    fn antiperiodic_circle_has_a_gap_at_one() {
        let g = catalog::circle(2.0 * PI);
        let cuts = crate::cutting::CutSet::glued(&[EdgePoint::new(0, PI)])
            .flux(&[PI])
            .unwrap();
        let p = SpectralProblem::new(&g, &cuts).unwrap();
        // brute-force scan: σ_min vanishes only near (m + 1/2)², not at 1
        assert!(p.sigma_min(Complex64::from(1.0)) > 1e-2);
        for lambda in [0.25, 2.25] {
            assert!(p.sigma_min(Complex64::from(lambda)) < 1e-12);
        }
        let gap = (0..=100)
            .map(|i| 0.8 + 0.4 * i as f64 / 100.0)
            .map(|l| p.sigma_min(Complex64::from(l)))
            .fold(f64::INFINITY, f64::min);
        assert!(gap > 1e-2);
    }

    #[test]
    fn robin_lower_bound_includes_wells() {
        let g = catalog::circle(1.0);
        let cuts = crate::cutting::CutSet::glued(&[EdgePoint::new(0, 0.5)])
            .robin(&[3.0])
            .unwrap();
        let p = SpectralProblem::new(&g, &cuts).unwrap();
        assert!(p.spectrum_lower_bound() <= -9.0);
        assert_eq!(
            SpectralProblem::uncut(&g).unwrap().spectrum_lower_bound(),
            0.0
        );
    }
}
