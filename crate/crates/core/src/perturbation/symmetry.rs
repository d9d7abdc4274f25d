use crate::cutting::CutSet;
use crate::error::Result;
use crate::graph::MetricGraph;
use crate::spectral::{find_eigenvalues, SpectralProblem};

/// The `2^β` flux vectors with entries in `{0, π}`.
pub fn symmetry_points(beta: usize) -> Vec<Vec<f64>> {
    (0..1usize << beta)
        .map(|bits| {
            (0..beta)
                .map(|j| {
                    if bits >> j & 1 == 1 {
                        std::f64::consts::PI
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Largest difference between the first `count` eigenvalues at fluxes
/// `ς − α` and `ς + α`.
pub fn symmetry_spectrum_check(
    graph: &MetricGraph,
    cutset: &CutSet,
    sigma: &[f64],
    alpha: &[f64],
    count: usize,
) -> Result<f64> {
    let spectrum = |sign: f64| -> Result<Vec<f64>> {
        let a: Vec<f64> = sigma.iter().zip(alpha).map(|(s, a)| s + sign * a).collect();
        let p = SpectralProblem::new(graph, &cutset.flux(&a)?)?;
        Ok(find_eigenvalues(&p, count, None)?.values())
    };
    let (minus, plus) = (spectrum(-1.0)?, spectrum(1.0)?);
    Ok(minus
        .iter()
        .zip(&plus)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
