//! Number of eigenvalues below `λ` for the self-adjoint families.
//!
//! Every segment is split into two pieces, and the solution on each piece
//! is fixed by its end values away from the piece's Dirichlet spectrum.
//! The quadratic form minus `λ‖f‖²` then reduces to a Hermitian matrix on
//! the end values, and the count is the number of Dirichlet eigenvalues of
//! the pieces below `λ` plus the negative eigenvalues of that matrix.
//!
//! The split point sits at an irrational fraction of the segment so that a
//! piece's Dirichlet spectrum does not coincide with an eigenvalue of the
//! graph on the symmetric examples, where the reduced matrix would be
//! evaluated next to a pole.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::cutting::CutFamily;
use crate::graph::VertexCondition;
use crate::spectral::problem::{Joint, SpectralProblem};

const SPLIT: f64 = 0.381_966_011_250_105;

/// An end value: unknown index and the phase it is multiplied by.
type Slot = Option<(usize, Complex64)>;

/// Diagonal and coupling coefficients of a piece's reduced form
/// `c(|a|² + |b|²) − 2d·Re(āb)`, and its Dirichlet count below `λ`.
fn piece(lambda: f64, q: f64, len: f64) -> (f64, f64, usize) {
    let d = lambda - q;
    if d > 0.0 {
        let w = d.sqrt();
        let (s, c) = (w * len).sin_cos();
        let below = ((w * len / std::f64::consts::PI).ceil() as usize).saturating_sub(1);
        (w * c / s, w / s, below)
    } else if d < 0.0 {
        let k = (-d).sqrt();
        let e = (-k * len).exp();
        let denom = 1.0 - e * e;
        (k * (1.0 + e * e) / denom, 2.0 * k * e / denom, 0)
    } else {
        (1.0 / len, 1.0 / len, 0)
    }
}

/// Eigenvalues strictly below `λ`, with multiplicity; `None` for families
/// that are not self-adjoint.
pub fn eigenvalue_count(problem: &SpectralProblem, lambda: f64) -> Option<usize> {
    let layout = problem.layout();
    let one = Complex64::new(1.0, 0.0);
    let nseg = layout.segments.len();
    let mut starts: Vec<Slot> = vec![None; nseg];
    let mut ends: Vec<Slot> = vec![None; nseg];
    let mut diagonal: Vec<f64> = Vec::new();
    let fresh = |diagonal: &mut Vec<f64>, strength: f64| {
        diagonal.push(strength);
        diagonal.len() - 1
    };
    for joint in &layout.joints {
        match joint {
            Joint::Continue { left, right } => {
                let u = fresh(&mut diagonal, 0.0);
                ends[*left] = Some((u, one));
                starts[*right] = Some((u, one));
            }
            Joint::Cut { cut, left, right } => match &layout.family {
                CutFamily::Glued => {
                    let u = fresh(&mut diagonal, 0.0);
                    ends[*left] = Some((u, one));
                    starts[*right] = Some((u, one));
                }
                CutFamily::Flux(alpha) => {
                    // f(c⁺) = e^{iα} f(c⁻)
                    let u = fresh(&mut diagonal, 0.0);
                    ends[*left] = Some((u, one));
                    starts[*right] = Some((u, Complex64::from_polar(1.0, -alpha[*cut])));
                }
                CutFamily::Robin(gamma) => {
                    let g = gamma[*cut];
                    ends[*left] = Some((fresh(&mut diagonal, g), one));
                    starts[*right] = Some((fresh(&mut diagonal, -g), one));
                }
                CutFamily::Dirichlet => {}
                CutFamily::ImaginaryFlux(_) => return None,
            },
            Joint::Vertex {
                condition,
                ends: at,
                ..
            } => {
                if let VertexCondition::Delta(chi) = condition {
                    let u = fresh(&mut diagonal, *chi);
                    for end in at {
                        let slot = Some((u, one));
                        if end.at_start {
                            starts[end.segment] = slot;
                        } else {
                            ends[end.segment] = slot;
                        }
                    }
                }
            }
        }
    }
    let junctions: Vec<usize> = (0..nseg).map(|_| fresh(&mut diagonal, 0.0)).collect();

    let size = diagonal.len();
    let mut m = DMatrix::<Complex64>::zeros(size, size);
    for (i, &x) in diagonal.iter().enumerate() {
        m[(i, i)] += x;
    }
    let mut below = 0;
    for (s, seg) in layout.segments.iter().enumerate() {
        let j = Some((junctions[s], one));
        for (a, b, len) in [
            (starts[s], j, SPLIT * seg.len),
            (j, ends[s], (1.0 - SPLIT) * seg.len),
        ] {
            let (c, d, n) = piece(lambda, seg.q, len);
            below += n;
            for (i, _) in [a, b].into_iter().flatten() {
                m[(i, i)] += c;
            }
            if let (Some((ia, wa)), Some((ib, wb))) = (a, b) {
                let cross = wa.conj() * wb * d;
                m[(ia, ib)] -= cross;
                m[(ib, ia)] -= cross.conj();
            }
        }
    }
    let negative = if problem.is_real() {
        let real = m.map(|z| z.re);
        SymmetricEigen::new(real)
            .eigenvalues
            .iter()
            .filter(|&&e| e < 0.0)
            .count()
    } else {
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .filter(|&&e| e < 0.0)
            .count()
    };
    Some(below + negative)
}
