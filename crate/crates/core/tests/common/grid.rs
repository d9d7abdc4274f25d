//! Morse-index oracle: classify a critical point by comparing the value
//! there with a dense grid around it. Eigenvalues are located by bisection
//! on the eigenvalue count, so the secular-matrix scan is not involved.

#![allow(dead_code)]

use qgraph_core::spectral::eigenvalue_count;
use qgraph_core::SpectralProblem;
use rayon::prelude::*;

/// Grid points per axis and half-width of the grid.
pub const POINTS: usize = 201;
pub const RADIUS: f64 = 0.3;

/// `λ_n` by bisection on the count, starting from a bracket around `guess`.
pub fn nth_by_count(problem: &SpectralProblem, n: usize, guess: f64) -> f64 {
    let count = |l: f64| eigenvalue_count(problem, l).expect("self-adjoint family");
    let mut width = 0.5 * (1.0 + guess.abs());
    let (mut lo, mut hi) = (guess - width, guess + width);
    while count(lo) >= n {
        width *= 2.0;
        lo = guess - width;
    }
    while count(hi) < n {
        width *= 2.0;
        hi = guess + width;
    }
    while hi - lo > 1e-14 * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn axis() -> Vec<f64> {
    (0..POINTS)
        .map(|i| -RADIUS + 2.0 * RADIUS * i as f64 / (POINTS - 1) as f64)
        .collect()
}

/// Number of descending directions of `λ_n` at `centre` in dimension one
/// or two, read off the grid: 0 at a minimum, `d` at a maximum, 1 at a
/// saddle of a two-dimensional function, `None` when a one-dimensional
/// function is monotone through the centre. `problem_at` builds the
/// operator at a parameter point; each grid value is only compared with the
/// centre value through two eigenvalue counts.
pub fn grid_index<F>(problem_at: F, n: usize, centre: &[f64]) -> Option<usize>
where
    F: Fn(&[f64]) -> SpectralProblem + Sync,
{
    let d = centre.len();
    let value = nth_by_count(&problem_at(centre), n, 0.0);
    let tol = 1e-10 * (1.0 + value.abs());
    let offsets = axis();
    let points: Vec<Vec<f64>> = match d {
        1 => offsets.iter().map(|&a| vec![centre[0] + a]).collect(),
        2 => offsets
            .iter()
            .flat_map(|&a| offsets.iter().map(move |&b| (a, b)))
            .map(|(a, b)| vec![centre[0] + a, centre[1] + b])
            .collect(),
        _ => panic!("grid oracle supports one or two parameters"),
    };
    // +1 strictly above the centre value, -1 strictly below, 0 within tolerance
    let signs: Vec<i8> = points
        .par_iter()
        .map(|p| {
            let problem = problem_at(p);
            let count = |l: f64| eigenvalue_count(&problem, l).expect("self-adjoint family");
            if count(value + tol) < n {
                1
            } else if count(value - tol) >= n {
                -1
            } else {
                0
            }
        })
        .collect();
    let above = signs.iter().all(|&s| s >= 0);
    let below = signs.iter().all(|&s| s <= 0);
    match (above, below, d) {
        (true, false, _) => Some(0),
        (false, true, _) => Some(d),
        (false, false, 2) => Some(1),
        _ => None,
    }
}
