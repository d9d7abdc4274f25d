//! Interlacing of spectra under a change of the δ strength at one vertex.

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, VertexCondition};
use crate::spectral::{eigenfunction, find_eigenvalues, Site, SpectralProblem};

/// Relative size above which `f(v)` or `Σf'(v)` counts as nonzero.
const NONZERO: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct InterlacingRow {
    pub n: usize,
    /// `λ_n(Γ_χ)`.
    pub lower: f64,
    /// `λ_n(Γ_χ′)`.
    pub middle: f64,
    /// `λ_{n+1}(Γ_χ)`.
    pub upper: f64,
    pub simple: bool,
    /// `f(v)` and `Σf'(v)` of the normalized `Γ_χ′` eigenfunction, when simple.
    pub vertex_value: Option<f64>,
    pub derivative_sum: Option<f64>,
    pub strict_expected: bool,
    pub holds: bool,
    pub strict: bool,
}

impl InterlacingRow {
    pub fn pass(&self) -> bool {
        self.holds && (!self.strict_expected || self.strict)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterlacingReport {
    pub vertex: usize,
    pub chi: f64,
    pub chi_prime: VertexCondition,
    pub rows: Vec<InterlacingRow>,
}

impl InterlacingReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(InterlacingRow::pass)
    }
}

/// Compares the first `count` eigenvalues of the graph with `Delta(chi)` at
/// `vertex` against those with `chi_prime`, which must be a larger strength
/// or Dirichlet.
pub fn interlacing_check(
    graph: &MetricGraph,
    vertex: usize,
    chi: f64,
    chi_prime: VertexCondition,
    count: usize,
) -> Result<InterlacingReport> {
    if let VertexCondition::Delta(c) = chi_prime {
        if c <= chi {
            return Err(Error::ConditionMismatch(format!(
                "χ′ = {c} is not larger than χ = {chi}"
            )));
        }
    }
    let base = graph.with_condition(vertex, VertexCondition::Delta(chi));
    let moved = graph.with_condition(vertex, chi_prime);
    base.ensure_valid()?;
    moved.ensure_valid()?;
    let base_problem = SpectralProblem::uncut(&base)?;
    let moved_problem = SpectralProblem::uncut(&moved)?;
    let below = find_eigenvalues(&base_problem, count + 1, None)?;
    let above = find_eigenvalues(&moved_problem, count + 1, None)?;

    let mut rows = Vec::with_capacity(count);
    for n in 1..=count {
        let (lower, middle, upper) = (below.lambda(n), above.lambda(n), below.lambda(n + 1));
        let tol = 1e-9 * (1.0 + middle.abs());
        let simple = above.is_simple(n);
        let (mut vertex_value, mut derivative_sum) = (None, None);
        let mut strict_expected = false;
        if simple {
            let f = eigenfunction(&moved_problem, middle)?;
            let site = Site::Vertex(vertex);
            let value = f.site_value(site).unwrap_or(0.0);
            let ends = f.layout().site_ends(site).unwrap_or_default();
            let sum: f64 = ends.iter().map(|&e| f.end_eval_inward(e).1).sum();
            let sup = f.sup_norm();
            let k = middle.abs().max(1.0).sqrt();
            strict_expected = value.abs() > NONZERO * sup || sum.abs() > NONZERO * sup * k;
            vertex_value = Some(value);
            derivative_sum = Some(sum);
        }
        rows.push(InterlacingRow {
            n,
            lower,
            middle,
            upper,
            simple,
            vertex_value,
            derivative_sum,
            strict_expected,
            holds: lower <= middle + tol && middle <= upper + tol,
            strict: lower < middle - tol && middle < upper - tol,
        });
    }
    Ok(InterlacingReport {
        vertex,
        chi,
        chi_prime,
        rows,
    })
}
