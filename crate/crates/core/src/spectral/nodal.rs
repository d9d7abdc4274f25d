//! Zeros of an eigenfunction, located in closed form on every segment.

use crate::cutting::{open_components, CutFamily};
use crate::error::{Error, Result};
use crate::graph::{EdgePoint, MetricGraph, VertexCondition};
use crate::spectral::eigen::Eigenpair;
use crate::spectral::problem::{End, Joint};
use crate::spectral::transfer::LINEAR_SWITCH;

/// Relative tolerance for a vanishing value at a vertex or cut leaf.
pub const VERTEX_ZERO_TOL: f64 = 1e-8;

/// Zeros of `f = a cos ωs + (b/ω) sin ωs` (or its hyperbolic and affine
/// analogues) strictly inside `(lo, hi)`.
fn segment_zeros(lambda: f64, q: f64, a: f64, b: f64, lo: f64, hi: f64) -> Vec<f64> {
    let z = lambda - q;
    let mut out = Vec::new();
    if z.abs() < LINEAR_SWITCH {
        if b != 0.0 {
            let s = -a / b;
            if s > lo && s < hi {
                out.push(s);
            }
        }
    } else if z > 0.0 {
        let w = z.sqrt();
        // f = R cos(ωs - θ)
        let theta = (b / w).atan2(a);
        let first = theta + std::f64::consts::FRAC_PI_2;
        let mut k = ((lo * w - first) / std::f64::consts::PI).floor() as i64 - 1;
        loop {
            let s = (first + k as f64 * std::f64::consts::PI) / w;
            if s >= hi {
                break;
            }
            if s > lo {
                out.push(s);
            }
            k += 1;
        }
    } else if b != 0.0 {
        let kappa = (-z).sqrt();
        let r = -a * kappa / b;
        if r > 0.0 && r < 1.0 {
            let s = r.atanh() / kappa;
            if s > lo && s < hi {
                out.push(s);
            }
        }
    }
    out
}

/// Interior zeros of a real eigenfunction, sorted by edge and position.
///
/// Fails with [`Error::VertexZero`] when the function nearly vanishes at a
/// vertex with a δ condition or at a leaf of a non-glued cut. Dirichlet
/// vertices and Dirichlet cuts are not zeros.
pub fn zeros(pair: &Eigenpair) -> Result<Vec<EdgePoint>> {
    let layout = pair.layout();
    let sup = pair.sup_norm();
    let tol = VERTEX_ZERO_TOL * sup;
    let glued_cuts = matches!(layout.family, CutFamily::Glued);

    let mut out = Vec::new();
    for joint in &layout.joints {
        match joint {
            Joint::Vertex {
                vertex,
                condition: VertexCondition::Delta(_),
                ends,
            } => {
                let value = pair.end_eval(ends[0]).0;
                if value.abs() < tol {
                    return Err(Error::VertexZero {
                        site: format!("vertex {vertex}"),
                        value,
                    });
                }
            }
            Joint::Vertex { .. } => {}
            Joint::Cut { cut, left, right } if !glued_cuts => {
                if matches!(layout.family, CutFamily::Dirichlet) {
                    continue;
                }
                for end in [
                    End {
                        segment: *left,
                        at_start: false,
                    },
                    End {
                        segment: *right,
                        at_start: true,
                    },
                ] {
                    let value = pair.end_eval(end).0;
                    if value.abs() < tol {
                        return Err(Error::VertexZero {
                            site: format!("cut {cut}"),
                            value,
                        });
                    }
                }
            }
            Joint::Cut { left, .. } | Joint::Continue { left, .. } => {
                // a zero exactly at an interior junction is still one zero
                let end = End {
                    segment: *left,
                    at_start: false,
                };
                if pair.end_eval(end).0.abs() < tol {
                    let seg = &layout.segments[*left];
                    out.push(EdgePoint::new(seg.edge, seg.offset + seg.len));
                }
            }
        }
    }

    for (i, seg) in layout.segments.iter().enumerate() {
        let (a, b) = pair.coefficients[i];
        let guard = 1e-9 * seg.len;
        for s in segment_zeros(pair.lambda, seg.q, a, b, guard, seg.len - guard) {
            out.push(EdgePoint::new(seg.edge, seg.offset + s));
        }
    }
    out.sort_by(|x, y| x.edge.cmp(&y.edge).then(x.t.total_cmp(&y.t)));
    Ok(out)
}

/// Number of interior zeros `φ`.
pub fn count_zeros(pair: &Eigenpair, graph: &MetricGraph) -> Result<usize> {
    check_graph(pair, graph)?;
    Ok(zeros(pair)?.len())
}

/// Number of nodal domains `ν`, the components of the graph minus the zeros.
pub fn nodal_domain_count(pair: &Eigenpair, graph: &MetricGraph) -> Result<usize> {
    check_graph(pair, graph)?;
    Ok(open_components(graph, &zeros(pair)?).count)
}

fn check_graph(pair: &Eigenpair, graph: &MetricGraph) -> Result<()> {
    if pair.layout().edge_segments.len() != graph.edges().len() {
        return Err(Error::ConditionMismatch(
            "eigenpair was computed on a different graph".into(),
        ));
    }
    Ok(())
}
