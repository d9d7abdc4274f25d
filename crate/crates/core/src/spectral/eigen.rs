//! Eigenfunctions as nullspace vectors of the secular matrix.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::EdgePoint;
use crate::spectral::problem::{
    basis, ends_to_unknowns, joint_rows, slope_scale, unknowns_to_ends, Basis, End, Layout, Site,
    SpectralProblem,
};
use crate::spectral::solver::SolverConfig;
use crate::spectral::transfer::propagate;

/// Which one-sided limit to take at a segment boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Side {
    /// Limit from smaller `t`.
    Left,
    /// Limit from larger `t`.
    #[default]
    Right,
}

/// A real solution of `-f'' + q f = λ f` on every segment of a layout.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Value and along-edge derivative at the start of every segment.
    pub coefficients: Vec<(f64, f64)>,
    /// L² norm of the coefficients as returned by the nullspace, before scaling.
    pub norm: f64,
    /// Largest violation of a joint condition (rows of unit length, unknowns
    /// scaled to unit maximum).
    pub residual: f64,
    /// Value and derivative at the end of every segment.
    ends: Vec<(f64, f64)>,
    layout: Arc<Layout>,
}

impl Eigenpair {
    /// Wraps given start values without normalising them.
    pub fn from_coefficients(
        layout: Arc<Layout>,
        lambda: f64,
        coefficients: Vec<(f64, f64)>,
    ) -> Self {
        assert_eq!(coefficients.len(), layout.segments.len());
        let ends = coefficients
            .iter()
            .zip(&layout.segments)
            .map(|(&(a, b), seg)| propagate(lambda, seg.q, a, b, seg.len))
            .collect();
        Self::assemble(layout, lambda, coefficients, ends)
    }

    /// From a vector of secular-matrix unknowns.
    pub(crate) fn from_unknowns(layout: Arc<Layout>, lambda: f64, x: &[f64]) -> Self {
        let (starts, ends) = unknowns_to_ends(&layout, lambda, x);
        Self::assemble(layout, lambda, starts, ends)
    }

    fn assemble(
        layout: Arc<Layout>,
        lambda: f64,
        coefficients: Vec<(f64, f64)>,
        ends: Vec<(f64, f64)>,
    ) -> Self {
        let mut pair = Self {
            lambda,
            coefficients,
            norm: 1.0,
            residual: 0.0,
            ends,
            layout,
        };
        pair.norm = pair.l2_norm();
        pair.residual = pair.max_joint_residual(|_| true);
        pair
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Value and along-edge derivative at distance `s` into segment `seg`.
    pub fn segment_eval(&self, seg: usize, s: f64) -> (f64, f64) {
        let segment = &self.layout.segments[seg];
        if let Basis::Decaying { kappa, e } = basis(segment, Complex64::from(self.lambda)) {
            // interpolate between both ends; each term decays away from its end
            let len = segment.len;
            let denom = 1.0 - e * e;
            let sinh_ratio =
                |a: f64| (kappa * (a - len)).exp() * (1.0 - (-2.0 * kappa * a).exp()) / denom;
            let cosh_ratio =
                |a: f64| (kappa * (a - len)).exp() * (1.0 + (-2.0 * kappa * a).exp()) / denom;
            let (f0, fl) = (self.coefficients[seg].0, self.ends[seg].0);
            let s = s.clamp(0.0, len);
            return (
                f0 * sinh_ratio(len - s) + fl * sinh_ratio(s),
                kappa * (-f0 * cosh_ratio(len - s) + fl * cosh_ratio(s)),
            );
        }
        let (a, b) = self.coefficients[seg];
        propagate(self.lambda, segment.q, a, b, s)
    }

    /// Value and along-edge derivative at a segment end.
    pub fn end_eval(&self, end: End) -> (f64, f64) {
        if end.at_start {
            self.coefficients[end.segment]
        } else {
            self.ends[end.segment]
        }
    }

    /// Value and derivative into the segment at a segment end.
    pub fn end_eval_inward(&self, end: End) -> (f64, f64) {
        let (f, d) = self.end_eval(end);
        if end.at_start {
            (f, d)
        } else {
            (f, -d)
        }
    }

    /// Segment containing a point, and the local coordinate.
    pub fn locate(&self, point: EdgePoint, side: Side) -> (usize, f64) {
        let range = self.layout.edge_segments[point.edge].clone();
        let mut chosen = range.start;
        for seg in range {
            let s = &self.layout.segments[seg];
            let inside = match side {
                Side::Left => point.t > s.offset,
                Side::Right => point.t >= s.offset,
            };
            if inside {
                chosen = seg;
            }
        }
        (chosen, point.t - self.layout.segments[chosen].offset)
    }

    pub fn value(&self, point: EdgePoint, side: Side) -> f64 {
        let (seg, s) = self.locate(point, side);
        self.segment_eval(seg, s).0
    }

    /// Along-edge derivative.
    pub fn derivative(&self, point: EdgePoint, side: Side) -> f64 {
        let (seg, s) = self.locate(point, side);
        self.segment_eval(seg, s).1
    }

    /// Value at a vertex or at one side of a cut.
    pub fn site_value(&self, site: Site) -> Option<f64> {
        let ends = self.layout.site_ends(site)?;
        ends.first().map(|&e| self.end_eval(e).0)
    }

    /// Value and inward derivative at a degree-one site.
    pub fn leaf_data(&self, site: Site) -> Option<(f64, f64)> {
        self.layout.leaf_end(site).map(|e| self.end_eval_inward(e))
    }

    pub fn l2_norm(&self) -> f64 {
        let (nodes, weights) = gauss_legendre();
        let mut total = 0.0;
        for (i, seg) in self.layout.segments.iter().enumerate() {
            let omega = (self.lambda - seg.q).abs().sqrt();
            let pieces = ((omega * seg.len) / 2.0).ceil().max(1.0) as usize;
            let h = seg.len / pieces as f64;
            for p in 0..pieces {
                let mid = (p as f64 + 0.5) * h;
                for (x, w) in nodes.iter().zip(weights) {
                    let f = self.segment_eval(i, mid + 0.5 * h * x).0;
                    total += 0.5 * h * w * f * f;
                }
            }
        }
        total.sqrt()
    }

    /// Sampled estimate of `max |f|`.
    pub fn sup_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, seg) in self.layout.segments.iter().enumerate() {
            let omega = (self.lambda - seg.q).abs().sqrt();
            let samples = 16 * (((omega * seg.len) / 2.0).ceil() as usize + 1);
            for p in 0..=samples {
                let s = seg.len * p as f64 / samples as f64;
                best = best.max(self.segment_eval(i, s).0.abs());
            }
        }
        best
    }

    /// Residual of the joints selected by `keep`, at this eigenpair's own family.
    pub(crate) fn max_joint_residual(&self, keep: impl Fn(usize) -> bool) -> f64 {
        self.max_joint_residual_in(&self.layout, keep)
    }

    /// Residual of this function against the joint conditions of `layout`,
    /// which must share its geometry.
    pub(crate) fn max_joint_residual_in(
        &self,
        layout: &Layout,
        keep: impl Fn(usize) -> bool,
    ) -> f64 {
        let lambda = Complex64::from(self.lambda);
        let k = slope_scale(lambda);
        let x = ends_to_unknowns(layout, self.lambda, &self.coefficients, &self.ends);
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (j, joint) in layout.joints.iter().enumerate() {
            if !keep(j) {
                continue;
            }
            for row in joint_rows(layout, joint, lambda, k) {
                let mut dense = vec![Complex64::new(0.0, 0.0); x.len()];
                for &(c, v) in &row.entries {
                    dense[c] += v;
                }
                let norm = row
                    .entries
                    .iter()
                    .map(|(_, v)| v.norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if norm == 0.0 {
                    continue;
                }
                let dot: Complex64 = dense.iter().zip(&x).map(|(z, v)| z * v).sum();
                worst = worst.max((dot - row.rhs).norm() / (norm * scale));
            }
        }
        worst
    }

    /// Samples `(edge, segment, t, f, f')` with about `per_unit` points per unit length.
    pub fn sample(&self, per_unit: f64) -> Vec<(usize, usize, f64, f64, f64)> {
        let mut out = Vec::new();
        for (i, seg) in self.layout.segments.iter().enumerate() {
            let n = ((seg.len * per_unit).ceil() as usize).max(1);
            for p in 0..=n {
                let s = seg.len * p as f64 / n as f64;
                let (f, d) = self.segment_eval(i, s);
                out.push((seg.edge, i, seg.offset + s, f, d));
            }
        }
        out
    }

    /// Same function scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            coefficients: self
                .coefficients
                .iter()
                .map(|&(a, b)| (c * a, c * b))
                .collect(),
            ends: self.ends.iter().map(|&(a, b)| (c * a, c * b)).collect(),
            ..self.clone()
        }
    }
}

/// 16-point Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 16;
        let mut nodes = Vec::with_capacity(N);
        let mut weights = Vec::with_capacity(N);
        for i in 0..N {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        (nodes, weights)
    })
}

/// The normalised real eigenfunction at a simple eigenvalue.
pub fn eigenfunction(problem: &SpectralProblem, lambda: f64) -> Result<Eigenpair> {
    eigenfunction_with(problem, lambda, &SolverConfig::default())
}

pub fn eigenfunction_with(
    problem: &SpectralProblem,
    lambda: f64,
    config: &SolverConfig,
) -> Result<Eigenpair> {
    let z = Complex64::from(lambda);
    let (sv, vector) = if problem.is_real() {
        let svd = problem.secular_matrix_real(lambda).svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        let i = argmin(&sv);
        let v: Vec<Complex64> = v_t.row(i).iter().map(|&x| Complex64::from(x)).collect();
        (sv, v)
    } else {
        let m: DMatrix<Complex64> = problem.secular_matrix(z);
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        let i = argmin(&sv);
        let v: Vec<Complex64> = v_t.row(i).iter().map(|x| x.conj()).collect();
        (sv, v)
    };
    let top = sv.iter().cloned().fold(1.0, f64::max);
    let sigma = sv[argmin(&sv)] / top;
    if sigma >= config.eig_tol {
        return Err(Error::NotAnEigenvalue { lambda, sigma });
    }
    let multiplicity = sv.iter().filter(|&&s| s < config.mult_tol * top).count();
    if multiplicity > 1 {
        return Err(Error::DegenerateEigenvalue {
            lambda,
            multiplicity,
        });
    }

    // rotate the global phase so the largest component is real
    let pivot = vector
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("nonempty");
    let phase = pivot.conj() / pivot.norm();
    let rotated: Vec<Complex64> = vector.iter().map(|&x| x * phase).collect();
    let big = rotated.iter().map(|x| x.re.abs()).fold(0.0, f64::max);
    let imag = rotated.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
    if imag > 1e-8 * big {
        return Err(Error::ComplexEigenfunction);
    }
    let x: Vec<f64> = rotated.iter().map(|c| c.re).collect();
    let raw = Eigenpair::from_unknowns(problem.layout().clone(), lambda, &x);
    let norm = raw.norm;
    let (f0, d0) = raw.coefficients[0];
    let sign = if f0.abs() > 1e-12 * big {
        f0.signum()
    } else if d0 != 0.0 {
        d0.signum()
    } else {
        1.0
    };
    let mut pair = raw.scaled(sign / norm);
    pair.norm = norm;
    pair.residual = pair.max_joint_residual(|_| true);
    Ok(pair)
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len())
        .min_by(|&a, &b| v[a].total_cmp(&v[b]))
        .expect("nonempty")
}

#[cfg(test)]
fn end_value_from_forms(pair: &Eigenpair, end: End) -> f64 {
    let lambda = Complex64::from(pair.lambda);
    let k = slope_scale(lambda);
    let seg = &pair.layout.segments[end.segment];
    let forms = crate::spectral::problem::end_forms(seg, end.at_start, lambda, k);
    let (a, b) = pair.coefficients[end.segment];
    (forms.value[0] * a + forms.value[1] * (b / k)).re
}
