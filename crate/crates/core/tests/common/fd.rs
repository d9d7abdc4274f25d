//! Finite-difference oracle: lumped-mass linear elements on a uniform mesh
//! per edge. Eigenvalues are found by bisection on the inertia of
//! `K − μM`, computed by eliminating the edge interiors (tridiagonal
//! chains) and then the dense vertex Schur complement.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use qgraph_core::{MetricGraph, VertexCondition};

type C64 = Complex<f64>;

#[derive(Clone, Debug)]
struct Chain {
    edge: usize,
    from: Option<usize>,
    to: Option<usize>,
    cells: usize,
    h: f64,
    /// Potential on every cell, sampled at its midpoint.
    q: Vec<f64>,
    /// Phase `e^{iθ}` on the link between the last interior node and `to`.
    phase: f64,
}

#[derive(Clone, Debug)]
pub struct Fd {
    /// Schur index of every vertex, `None` for Dirichlet.
    slot: Vec<Option<usize>>,
    chi: Vec<f64>,
    chains: Vec<Chain>,
    unknown_vertices: usize,
}

/// Node values of an eigenvector, endpoints included, per edge.
#[derive(Clone, Debug)]
pub struct FdVector {
    pub lambda: f64,
    pub edges: Vec<Vec<f64>>,
    pub lengths: Vec<f64>,
}

impl FdVector {
    /// Linear interpolation at `t` on `edge`.
    pub fn at(&self, edge: usize, t: f64) -> f64 {
        let v = &self.edges[edge];
        let cells = v.len() - 1;
        let x = (t / self.lengths[edge] * cells as f64).clamp(0.0, cells as f64);
        let i = (x.floor() as usize).min(cells - 1);
        let w = x - i as f64;
        v[i] * (1.0 - w) + v[i + 1] * w
    }
}

/// Every edge is split at this fraction into two chains whose junction node
/// stays in the Schur block, so that a Dirichlet eigenvalue of a whole edge
/// interior never coincides with an eigenvalue of the graph.
const JUNCTION: f64 = 0.381966;

impl Fd {
    /// At least `per_unit` cells per unit length on every edge.
    pub fn new(graph: &MetricGraph, per_unit: f64) -> Self {
        let mut slot = Vec::new();
        let mut chi = Vec::new();
        let mut count = 0;
        for v in graph.vertices() {
            match v.condition {
                VertexCondition::Dirichlet => slot.push(None),
                VertexCondition::Delta(c) => {
                    slot.push(Some(count));
                    chi.push(c);
                    count += 1;
                }
            }
        }
        let mut chains = Vec::new();
        for (i, e) in graph.edges().iter().enumerate() {
            let cells = ((e.length * per_unit).ceil() as usize).max(8);
            let h = e.length / cells as f64;
            let q: Vec<f64> = (0..cells).map(|c| e.q_at((c as f64 + 0.5) * h)).collect();
            let first = ((cells as f64 * JUNCTION).round() as usize).clamp(2, cells - 2);
            let junction = Some(count);
            chi.push(0.0);
            count += 1;
            chains.push(Chain {
                edge: i,
                from: slot[e.from],
                to: junction,
                cells: first,
                h,
                q: q[..first].to_vec(),
                phase: 0.0,
            });
            chains.push(Chain {
                edge: i,
                from: junction,
                to: slot[e.to],
                cells: cells - first,
                h,
                q: q[first..].to_vec(),
                phase: 0.0,
            });
        }
        Self {
            slot,
            chi,
            chains,
            unknown_vertices: count,
        }
    }

    /// Magnetic phases on the given edges; the spectrum only depends on the
    /// total phase around each cycle.
    pub fn with_phases(mut self, phases: &[(usize, f64)]) -> Self {
        for &(edge, theta) in phases {
            self.chains[2 * edge + 1].phase = theta;
        }
        self
    }

    /// Same graph with every cell halved.
    pub fn refined(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.chains {
            c.cells *= 2;
            c.h /= 2.0;
            c.q = c.q.iter().flat_map(|&q| [q, q]).collect();
        }
        out
    }

    fn interior_diagonal(c: &Chain, mu: f64) -> Vec<f64> {
        (1..c.cells)
            .map(|i| 2.0 / c.h + 0.5 * c.h * (c.q[i - 1] + c.q[i]) - mu * c.h)
            .collect()
    }

    /// Number of eigenvalues strictly below `mu`.
    pub fn count_below(&self, mu: f64) -> usize {
        let nv = self.unknown_vertices;
        let mut schur = DMatrix::<C64>::zeros(nv, nv);
        for (v, &c) in self.chi.iter().enumerate() {
            schur[(v, v)] += C64::new(c, 0.0);
        }
        let mut negatives = 0;
        for c in &self.chains {
            let k = 1.0 / c.h;
            let ends = [(c.from, 0usize), (c.to, c.cells - 1)];
            for (vertex, cell) in ends {
                if let Some(v) = vertex {
                    schur[(v, v)] += C64::new(k + 0.5 * c.h * c.q[cell] - 0.5 * mu * c.h, 0.0);
                }
            }
            let d = Self::interior_diagonal(c, mu);
            let m = d.len();
            let mut forward = vec![0.0; m];
            for i in 0..m {
                forward[i] = d[i] - if i > 0 { k * k / forward[i - 1] } else { 0.0 };
                if forward[i] < 0.0 {
                    negatives += 1;
                }
            }
            let mut backward = vec![0.0; m];
            for i in (0..m).rev() {
                backward[i] = d[i]
                    - if i + 1 < m {
                        k * k / backward[i + 1]
                    } else {
                        0.0
                    };
            }
            let t_first = 1.0 / backward[0];
            let t_last = 1.0 / forward[m - 1];
            let mut t_cross = t_last;
            for p in &forward[..m - 1] {
                t_cross *= k / p;
            }
            let w = C64::from_polar(1.0, c.phase);
            match (c.from, c.to) {
                (Some(a), Some(b)) if a == b => {
                    schur[(a, a)] -=
                        C64::new(k * k * (t_first + t_last + 2.0 * w.re * t_cross), 0.0);
                }
                (a, b) => {
                    if let Some(a) = a {
                        schur[(a, a)] -= C64::new(k * k * t_first, 0.0);
                    }
                    if let Some(b) = b {
                        schur[(b, b)] -= C64::new(k * k * t_last, 0.0);
                    }
                    if let (Some(a), Some(b)) = (a, b) {
                        let coupling = -w * (k * k * t_cross);
                        schur[(a, b)] += coupling;
                        schur[(b, a)] += coupling.conj();
                    }
                }
            }
        }
        if nv > 0 {
            negatives += SymmetricEigen::new(schur)
                .eigenvalues
                .iter()
                .filter(|&&e| e < 0.0)
                .count();
        }
        negatives
    }

    /// `λ_k`, one-based, by bisection to relative width `1e-13`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.count_below(lo) >= k {
            lo *= 2.0;
        }
        while self.count_below(hi) < k {
            hi *= 2.0;
        }
        while hi - lo > 1e-13 * (1.0 + hi.abs()) {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        (1..=count).map(|k| self.eigenvalue(k)).collect()
    }

    /// Solves `(K − μM) x = r` for a real operator; `r` and `x` hold vertex
    /// values first, then the interior nodes of every chain in order.
    fn solve(&self, mu: f64, r: &[f64]) -> Vec<f64> {
        let nv = self.unknown_vertices;
        let mut schur = DMatrix::<f64>::zeros(nv, nv);
        let mut rhs = nalgebra::DVector::<f64>::from_column_slice(&r[..nv]);
        for (v, &c) in self.chi.iter().enumerate() {
            schur[(v, v)] += c;
        }
        let mut offset = nv;
        let mut interiors = Vec::new();
        for c in &self.chains {
            let k = 1.0 / c.h;
            for (vertex, cell) in [(c.from, 0usize), (c.to, c.cells - 1)] {
                if let Some(v) = vertex {
                    schur[(v, v)] += k + 0.5 * c.h * c.q[cell] - 0.5 * mu * c.h;
                }
            }
            let d = Self::interior_diagonal(c, mu);
            let m = d.len();
            let local = &r[offset..offset + m];
            // T⁻¹ applied to the local rhs and to both coupling vectors
            let z = thomas(&d, k, local);
            let mut e_first = vec![0.0; m];
            e_first[0] = 1.0;
            let mut e_last = vec![0.0; m];
            e_last[m - 1] = 1.0;
            let u = thomas(&d, k, &e_first);
            let w = thomas(&d, k, &e_last);
            // coupling of the first node to `from` and the last to `to` is −k
            for (vertex, col, node) in [(c.from, &u, 0usize), (c.to, &w, m - 1)] {
                if let Some(a) = vertex {
                    rhs[a] += k * z[node];
                    for (vertex_b, node_b) in [(c.from, 0usize), (c.to, m - 1)] {
                        if let Some(b) = vertex_b {
                            schur[(a, b)] -= k * k * col[node_b];
                        }
                    }
                }
            }
            interiors.push((offset, z, u, w));
            offset += m;
        }
        let xv = if nv > 0 {
            schur.lu().solve(&rhs).expect("vertex system is regular")
        } else {
            nalgebra::DVector::zeros(0)
        };
        let mut x = vec![0.0; r.len()];
        x[..nv].copy_from_slice(xv.as_slice());
        for (c, (offset, z, u, w)) in self.chains.iter().zip(interiors) {
            let k = 1.0 / c.h;
            let a = c.from.map_or(0.0, |v| xv[v]);
            let b = c.to.map_or(0.0, |v| xv[v]);
            for i in 0..z.len() {
                x[offset + i] = z[i] + k * (a * u[i] + b * w[i]);
            }
        }
        x
    }

    fn mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.unknown_vertices];
        for c in &self.chains {
            for v in [c.from, c.to].into_iter().flatten() {
                m[v] += 0.5 * c.h;
            }
        }
        for c in &self.chains {
            m.extend(std::iter::repeat_n(c.h, c.cells - 1));
        }
        m
    }

    /// Eigenvector of `λ_k` by shifted inverse iteration, normalized in the
    /// lumped `L²` norm. Requires a real operator and a simple eigenvalue.
    pub fn eigenvector(&self, k: usize) -> FdVector {
        let lambda = self.eigenvalue(k);
        let mass = self.mass();
        let shift = lambda * (1.0 + 1e-9) + 1e-9;
        let mut x: Vec<f64> = (0..mass.len())
            .map(|i| 1.0 + 0.3 * ((i as f64) * 0.7).sin())
            .collect();
        for _ in 0..6 {
            let r: Vec<f64> = x.iter().zip(&mass).map(|(a, m)| a * m).collect();
            x = self.solve(shift, &r);
            let norm = x
                .iter()
                .zip(&mass)
                .map(|(a, m)| a * a * m)
                .sum::<f64>()
                .sqrt();
            x.iter_mut().for_each(|a| *a /= norm);
        }
        let nv = self.unknown_vertices;
        let mut offset = nv;
        let mut edges: Vec<Vec<f64>> = Vec::new();
        let mut lengths = Vec::new();
        for c in &self.chains {
            let m = c.cells - 1;
            let from = c.from.map_or(0.0, |v| x[v]);
            let to = c.to.map_or(0.0, |v| x[v]);
            if edges.len() == c.edge {
                edges.push(vec![from]);
                lengths.push(0.0);
            }
            let values = &mut edges[c.edge];
            values.extend_from_slice(&x[offset..offset + m]);
            values.push(to);
            lengths[c.edge] += c.h * c.cells as f64;
            offset += m;
        }
        FdVector {
            lambda,
            edges,
            lengths,
        }
    }
}

/// Solves the tridiagonal system with diagonal `d` and off-diagonals `−k`.
fn thomas(d: &[f64], k: f64, r: &[f64]) -> Vec<f64> {
    let m = d.len();
    let mut c = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut p = d[0];
    c[0] = -k / p;
    y[0] = r[0] / p;
    for i in 1..m {
        p = d[i] + k * c[i - 1];
        c[i] = -k / p;
        y[i] = (r[i] + k * y[i - 1]) / p;
    }
    for i in (0..m - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

/// Richardson extrapolation `(4λ(h/2) − λ(h)) / 3` of the first `count`
/// eigenvalues.
pub fn richardson_eigenvalues(fd: &Fd, count: usize) -> Vec<f64> {
    let coarse = fd.eigenvalues(count);
    let fine = fd.refined().eigenvalues(count);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// Extrapolated eigenvalues at the default resolution of 4000 cells per unit.
pub fn oracle_eigenvalues(graph: &MetricGraph, count: usize) -> Vec<f64> {
    richardson_eigenvalues(&Fd::new(graph, 4000.0), count)
}
