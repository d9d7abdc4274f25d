//! Eigenvalue branches of the flux, imaginary-flux and Robin families.

use crate::cutting::CutSet;
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::spectral::eigen::{Eigenpair, Side};
use crate::spectral::nodal::VERTEX_ZERO_TOL;
use crate::spectral::solver::{find_eigenvalues_with, local_minima, SolverConfig};
use crate::spectral::SpectralProblem;

/// `λ_n` of the magnetic operator with fluxes `alpha` at the cuts.
pub fn lambda_n_alpha(
    graph: &MetricGraph,
    cutset: &CutSet,
    n: usize,
    alpha: &[f64],
) -> Result<f64> {
    nth(graph, &cutset.flux(alpha)?, n)
}

/// `λ_m` of the operator with Robin conditions `gamma` on both sides of each cut.
pub fn lambda_m_gamma(
    graph: &MetricGraph,
    cutset: &CutSet,
    m: usize,
    gamma: &[f64],
) -> Result<f64> {
    nth(graph, &cutset.robin(gamma)?, m)
}

fn nth(graph: &MetricGraph, cutset: &CutSet, n: usize) -> Result<f64> {
    let p = SpectralProblem::new(graph, cutset)?;
    let s = find_eigenvalues_with(&p, n, None, &SolverConfig::default())?;
    Ok(s.lambda(n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationConfig {
    pub path_steps: usize,
    /// Maximum number of times a step may be halved before giving up.
    pub max_halvings: usize,
    /// Grid nodes used to search the trust window.
    pub window_points: usize,
    pub solver: SolverConfig,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            path_steps: 4,
            max_halvings: 12,
            window_points: 33,
            solver: SolverConfig::default(),
        }
    }
}

/// The real branch of `λ_n(iα)` started at a simple eigenvalue of the uncut
/// operator.
#[derive(Clone, Debug)]
pub struct ImaginaryBranch {
    graph: MetricGraph,
    cutset: CutSet,
    pub n: usize,
    pub lambda0: f64,
    /// Distance from `λ_n` to its nearest neighbours at `α = 0`.
    pub gap: f64,
    config: ContinuationConfig,
}

impl ImaginaryBranch {
    pub fn new(
        graph: &MetricGraph,
        cutset: &CutSet,
        n: usize,
        config: ContinuationConfig,
    ) -> Result<Self> {
        let p = SpectralProblem::new(graph, &cutset.as_glued())?;
        let s = find_eigenvalues_with(&p, n + 1, None, &config.solver)?;
        if !s.is_simple(n) {
            return Err(Error::DegenerateAtZero { n });
        }
        let lambda0 = s.lambda(n);
        let above = s.lambda(n + 1) - lambda0;
        let below = if n > 1 {
            lambda0 - s.lambda(n - 1)
        } else {
            f64::INFINITY
        };
        Ok(Self {
            graph: graph.clone(),
            cutset: cutset.as_glued(),
            n,
            lambda0,
            gap: above.min(below),
            config,
        })
    }

    /// Follows the branch along `t ↦ tα`, `t ∈ [0, 1]`.
    pub fn at(&self, alpha: &[f64]) -> Result<f64> {
        if alpha.iter().all(|&a| a == 0.0) {
            return Ok(self.lambda0);
        }
        let base = 1.0 / self.config.path_steps.max(1) as f64;
        let min_step = base / 2f64.powi(self.config.max_halvings as i32);
        let mut t = 0.0;
        let mut lambda = self.lambda0;
        let mut last: Option<(f64, f64)> = None; // (Δλ, Δt) of the previous step
        let mut step = base;
        while t < 1.0 {
            let t_new = (t + step).min(1.0);
            let dt = t_new - t;
            let scaled: Vec<f64> = alpha.iter().map(|a| a * t_new).collect();
            let problem = SpectralProblem::new(&self.graph, &self.cutset.imaginary_flux(&scaled)?)?;
            let floor = 1e-6 * (1.0 + lambda.abs());
            let (predicted, window) = match last {
                None => (lambda, (0.25 * self.gap * dt / base).max(floor)),
                Some((dl, dtl)) => {
                    let rate = dl / dtl;
                    (lambda + rate * dt, (5.0 * (rate * dt).abs()).max(floor))
                }
            };
            let found = local_minima(
                &problem,
                predicted - window,
                predicted + window,
                self.config.window_points,
                &self.config.solver,
            )
            .into_iter()
            .min_by(|a, b| {
                (a.lambda - predicted)
                    .abs()
                    .total_cmp(&(b.lambda - predicted).abs())
            });
            match found {
                Some(e) if e.multiplicity == 1 => {
                    last = Some((e.lambda - lambda, dt));
                    lambda = e.lambda;
                    t = t_new;
                }
                _ => {
                    step *= 0.5;
                    if step < min_step {
                        return Err(Error::BranchLost { fraction: t });
                    }
                }
            }
        }
        Ok(lambda)
    }

    pub fn problem_at(&self, alpha: &[f64]) -> Result<SpectralProblem> {
        SpectralProblem::new(&self.graph, &self.cutset.imaginary_flux(alpha)?)
    }
}

/// `λ_n(iα)` continued from `α = 0` in `path_steps` straight-line steps.
pub fn lambda_n_ialpha_continued(
    graph: &MetricGraph,
    cutset: &CutSet,
    n: usize,
    alpha: &[f64],
    path_steps: usize,
) -> Result<f64> {
    let config = ContinuationConfig {
        path_steps,
        ..ContinuationConfig::default()
    };
    ImaginaryBranch::new(graph, cutset, n, config)?.at(alpha)
}

/// `γ̃_j = ψ'(c_j⁺)/ψ(c_j⁺)`, the Robin parameters for which `ψ` solves the
/// cut problem.
pub fn gamma_tilde(pair: &Eigenpair, cutset: &CutSet) -> Result<Vec<f64>> {
    let tol = VERTEX_ZERO_TOL * pair.sup_norm();
    let mut out = Vec::with_capacity(cutset.len());
    for (j, c) in cutset.cuts.iter().enumerate() {
        let p = c.point();
        let (fl, fr) = (pair.value(p, Side::Left), pair.value(p, Side::Right));
        if fl.abs() < tol || fr.abs() < tol {
            return Err(Error::ZeroAtCut { cut: j });
        }
        // derivatives into the pieces: -∂ₜ at c⁺, +∂ₜ at c⁻
        let plus = -pair.derivative(p, Side::Left) / fl;
        let minus = -pair.derivative(p, Side::Right) / fr;
        if (plus - minus).abs() > 1e-8 * (1.0 + plus.abs()) {
            return Err(Error::ConditionMismatch(format!(
                "one-sided ratios at cut {j} differ: {plus} and {minus}"
            )));
        }
        out.push(plus);
    }
    Ok(out)
}
