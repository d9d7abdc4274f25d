//! The map `R` from Robin parameters `γ` to imaginary fluxes `α`.
//!
//! An eigenfunction `g` of the Robin problem also solves the imaginary-flux
//! problem with `e^{α_j} = g(c_j⁺)/g(c_j⁻)`. Conversely an imaginary-flux
//! eigenfunction `φ` solves the Robin problem with `γ_j = φ'(c_j⁺)/φ(c_j⁺)`.

use crate::cutting::CutSet;
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::perturbation::branches::{ContinuationConfig, ImaginaryBranch};
use crate::spectral::nodal::VERTEX_ZERO_TOL;
use crate::spectral::{eigenfunction, find_eigenvalues, Eigenpair, Site, SpectralProblem};

#[derive(Clone, Debug, PartialEq)]
pub struct MapR {
    pub alpha: Vec<f64>,
    /// `λ_m` of the Robin problem.
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapRInverse {
    pub gamma: Vec<f64>,
    /// The continued imaginary-flux eigenvalue.
    pub lambda: f64,
}

fn leaf(pair: &Eigenpair, cut: usize, plus: bool) -> (f64, f64) {
    pair.leaf_data(Site::Cut { cut, plus })
        .expect("cut leaves exist")
}

pub fn map_r(graph: &MetricGraph, cutset: &CutSet, m: usize, gamma: &[f64]) -> Result<MapR> {
    let p = SpectralProblem::new(graph, &cutset.robin(gamma)?)?;
    let lambda = find_eigenvalues(&p, m, None)?.lambda(m);
    let g = eigenfunction(&p, lambda)?;
    let tol = VERTEX_ZERO_TOL * g.sup_norm();
    let mut alpha = Vec::with_capacity(cutset.len());
    for j in 0..cutset.len() {
        let (plus, minus) = (leaf(&g, j, true).0, leaf(&g, j, false).0);
        if plus.abs() < tol || minus.abs() < tol {
            return Err(Error::ZeroAtCut { cut: j });
        }
        let ratio = plus / minus;
        if ratio <= 0.0 {
            return Err(Error::SignFlipAtCut { cut: j });
        }
        alpha.push(ratio.ln());
    }
    Ok(MapR { alpha, lambda })
}

pub fn map_r_inverse(
    graph: &MetricGraph,
    cutset: &CutSet,
    n: usize,
    alpha: &[f64],
) -> Result<MapRInverse> {
    let branch = ImaginaryBranch::new(graph, cutset, n, ContinuationConfig::default())?;
    map_r_inverse_on(&branch, alpha)
}

/// [`map_r_inverse`] reusing an already located branch.
pub fn map_r_inverse_on(branch: &ImaginaryBranch, alpha: &[f64]) -> Result<MapRInverse> {
    let lambda = branch.at(alpha)?;
    let phi = eigenfunction(&branch.problem_at(alpha)?, lambda)?;
    let tol = VERTEX_ZERO_TOL * phi.sup_norm();
    let mut gamma = Vec::with_capacity(alpha.len());
    for j in 0..alpha.len() {
        let (f, d) = leaf(&phi, j, true);
        if f.abs() < tol {
            return Err(Error::ZeroAtCut { cut: j });
        }
        gamma.push(d / f);
    }
    Ok(MapRInverse { gamma, lambda })
}
