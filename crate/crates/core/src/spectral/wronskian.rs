//! Wronskians of two solutions at vertices and at leaves.
//!
//! All Wronskians are outward, `W = f₁ f₂' − f₁' f₂` with derivatives taken
//! into the edges.

use crate::error::{Error, Result};
use crate::spectral::eigen::Eigenpair;
use crate::spectral::problem::{End, Site};

/// Joint residual above which a function is taken to violate a condition.
const CONDITION_TOL: f64 = 1e-8;

fn outward(f1: &Eigenpair, f2: &Eigenpair, end: End) -> f64 {
    let (a, da) = f1.end_eval_inward(end);
    let (b, db) = f2.end_eval_inward(end);
    a * db - da * b
}

fn check_pair(f1: &Eigenpair, f2: &Eigenpair) -> Result<()> {
    if !f1.layout().same_geometry(f2.layout()) {
        return Err(Error::ConditionMismatch(
            "solutions live on different layouts".into(),
        ));
    }
    if (f1.lambda - f2.lambda).abs() > 1e-12 * (1.0 + f1.lambda.abs()) {
        return Err(Error::ConditionMismatch(format!(
            "different spectral parameters {} and {}",
            f1.lambda, f2.lambda
        )));
    }
    Ok(())
}

/// Sum of outward Wronskians over the edge ends at `vertex`.
pub fn wronskian_vertex_sum(f1: &Eigenpair, f2: &Eigenpair, vertex: usize) -> Result<f64> {
    check_pair(f1, f2)?;
    let layout = f1.layout();
    let joint = layout
        .vertex_joint(vertex)
        .ok_or_else(|| Error::ConditionMismatch(format!("no vertex {vertex}")))?;
    for f in [f1, f2] {
        let r = f.max_joint_residual(|j| j == joint);
        if r > CONDITION_TOL {
            return Err(Error::ConditionMismatch(format!(
                "vertex {vertex} condition violated by {r:e}"
            )));
        }
    }
    let ends = layout
        .site_ends(Site::Vertex(vertex))
        .expect("vertex joint exists");
    Ok(ends.iter().map(|&e| outward(f1, f2, e)).sum())
}

/// Outward Wronskians at two leaves, for solutions that satisfy the same
/// conditions everywhere else.
pub fn wronskian_leaf_transfer(
    f1: &Eigenpair,
    f2: &Eigenpair,
    a: Site,
    b: Site,
) -> Result<(f64, f64)> {
    check_pair(f1, f2)?;
    let layout = f1.layout();
    let leaf = |s: Site| {
        layout
            .leaf_end(s)
            .ok_or_else(|| Error::ConditionMismatch(format!("{s:?} is not a leaf")))
    };
    let (ea, eb) = (leaf(a)?, leaf(b)?);
    let skip = [layout.joint_of(a), layout.joint_of(b)];
    for f in [f1, f2] {
        let r = f.max_joint_residual(|j| !skip.contains(&Some(j)));
        if r > CONDITION_TOL {
            return Err(Error::ConditionMismatch(format!(
                "conditions away from the leaves violated by {r:e}"
            )));
        }
    }
    Ok((outward(f1, f2, ea), outward(f1, f2, eb)))
}
