//! Central finite-difference Hessians with one Richardson step.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct HessianReport {
    pub point: Vec<f64>,
    pub value: f64,
    /// Symmetric matrix of second partials.
    pub matrix: DMatrix<f64>,
    pub h: f64,
    pub richardson: bool,
    /// Eigenvalues of `matrix`, ascending.
    pub eigenvalues: Vec<f64>,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    pub degen_tol: f64,
    pub morse_index: usize,
    pub nondegenerate: bool,
}

impl HessianReport {
    pub fn dimension(&self) -> usize {
        self.point.len()
    }

    /// Eigenvalues above `degen_tol`.
    pub fn positive_count(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&e| e > self.degen_tol)
            .count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HessianOptions {
    /// Defaults to `1e-4·(1 + |f(x)|)`.
    pub degen_tol: Option<f64>,
    pub richardson: bool,
}

impl Default for HessianOptions {
    fn default() -> Self {
        Self {
            degen_tol: None,
            richardson: true,
        }
    }
}

/// Hessian of `f` at `point` with step `h`, refined by one Richardson halving.
pub fn hessian_fd<F>(f: F, point: &[f64], h: f64) -> Result<HessianReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    hessian_fd_with(f, point, h, HessianOptions::default())
}

pub fn hessian_fd_with<F>(
    f: F,
    point: &[f64],
    h: f64,
    options: HessianOptions,
) -> Result<HessianReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let d = point.len();
    let steps: Vec<f64> = if options.richardson {
        vec![h, 0.5 * h]
    } else {
        vec![h]
    };

    let mut stencil: Vec<Vec<f64>> = vec![point.to_vec()];
    for &s in &steps {
        for i in 0..d {
            for sign in [1.0, -1.0] {
                let mut x = point.to_vec();
                x[i] += sign * s;
                stencil.push(x);
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut x = point.to_vec();
                    x[i] += si * s;
                    x[j] += sj * s;
                    stencil.push(x);
                }
            }
        }
    }
    let values: Vec<f64> = stencil
        .par_iter()
        .map(|x| {
            f(x).map_err(|e| Error::EvaluationFailed {
                point: x.clone(),
                message: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;

    let f0 = values[0];
    let per_step = 2 * d + 2 * d * d.saturating_sub(1);
    let estimate = |k: usize| {
        let s = steps[k];
        let v = &values[1 + k * per_step..1 + (k + 1) * per_step];
        let mut hm = DMatrix::<f64>::zeros(d, d);
        let mut g = vec![0.0; d];
        for i in 0..d {
            let (p, m) = (v[2 * i], v[2 * i + 1]);
            hm[(i, i)] = (p - 2.0 * f0 + m) / (s * s);
            g[i] = (p - m) / (2.0 * s);
        }
        let mut idx = 2 * d;
        for i in 0..d {
            for j in i + 1..d {
                let c = (v[idx] - v[idx + 1] - v[idx + 2] + v[idx + 3]) / (4.0 * s * s);
                hm[(i, j)] = c;
                hm[(j, i)] = c;
                idx += 4;
            }
        }
        (hm, g)
    };

    let (mut matrix, mut gradient) = estimate(0);
    if options.richardson {
        let (fine, fine_g) = estimate(1);
        matrix = (fine * 4.0 - matrix) / 3.0;
        gradient = fine_g
            .iter()
            .zip(&gradient)
            .map(|(a, b)| (4.0 * a - b) / 3.0)
            .collect();
    }

    let mut eigenvalues: Vec<f64> = if d == 0 {
        Vec::new()
    } else {
        SymmetricEigen::new(matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    };
    eigenvalues.sort_by(f64::total_cmp);
    let degen_tol = options.degen_tol.unwrap_or(1e-4 * (1.0 + f0.abs()));
    let gradient_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    let mut report = HessianReport {
        point: point.to_vec(),
        value: f0,
        matrix,
        h,
        richardson: options.richardson,
        eigenvalues,
        gradient,
        gradient_norm,
        degen_tol,
        morse_index: 0,
        nondegenerate: true,
    };
    let (index, nondegenerate) = morse_index(&report, degen_tol);
    report.morse_index = index;
    report.nondegenerate = nondegenerate;
    Ok(report)
}

/// Number of eigenvalues below `-degen_tol`, and whether all of them are
/// larger than `degen_tol` in magnitude.
pub fn morse_index(report: &HessianReport, degen_tol: f64) -> (usize, bool) {
    let index = report
        .eigenvalues
        .iter()
        .filter(|&&e| e < -degen_tol)
        .count();
    let nondegenerate = report.eigenvalues.iter().all(|e| e.abs() > degen_tol);
    (index, nondegenerate)
}

impl fmt::Display for HessianReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.12e}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(f, "dimension: {}", self.dimension())?;
        writeln!(f, "point: [{}]", list(&self.point))?;
        writeln!(f, "value: {:.15e}", self.value)?;
        writeln!(f, "h: {:e}", self.h)?;
        writeln!(f, "richardson: {}", self.richardson)?;
        writeln!(f, "gradient: [{}]", list(&self.gradient))?;
        writeln!(f, "gradient_norm: {:.6e}", self.gradient_norm)?;
        writeln!(f, "matrix:")?;
        for i in 0..self.dimension() {
            let row: Vec<f64> = self.matrix.row(i).iter().copied().collect();
            writeln!(f, "  [{}]", list(&row))?;
        }
        writeln!(f, "eigenvalues: [{}]", list(&self.eigenvalues))?;
        writeln!(f, "degen_tol: {:e}", self.degen_tol)?;
        writeln!(f, "morse_index: {}", self.morse_index)?;
        writeln!(f, "nondegenerate: {}", self.nondegenerate)
    }
}
