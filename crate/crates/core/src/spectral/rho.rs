//! The auxiliary solution `ρ_{j,λ}`: glued everywhere except at cut `j`,
//! where it vanishes at `c⁻` and equals one at `c⁺`.

use num_complex::Complex64;

use crate::cutting::CutFamily;
use crate::error::{Error, Result};
use crate::spectral::eigen::Eigenpair;
use crate::spectral::problem::{
    assemble, joint_rows, slope_scale, End, Joint, Row, SpectralProblem,
};

/// Conditioning below which `λ` counts as a Dirichlet eigenvalue at the cut.
const RESONANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Rho {
    pub solution: Eigenpair,
    /// `ρ'(c⁺) + ρ'(c⁻)` with derivatives into the pieces.
    pub r: f64,
}

pub fn solve_rho(problem: &SpectralProblem, lambda: f64, j: usize) -> Result<Rho> {
    let glued = problem.with_family(CutFamily::Glued)?;
    let layout = glued.layout().clone();
    let cut_joint = *layout
        .cut_joints
        .get(j)
        .ok_or_else(|| Error::InvalidCutSet(format!("no cut {j}")))?;
    let Joint::Cut { left, right, .. } = layout.joints[cut_joint] else {
        unreachable!("cut joints index cut entries")
    };

    let z = Complex64::from(lambda);
    let k = slope_scale(z);
    let one = Complex64::new(1.0, 0.0);
    let mut rows: Vec<Row> = Vec::new();
    for (i, joint) in layout.joints.iter().enumerate() {
        if i != cut_joint {
            rows.extend(joint_rows(&layout, joint, z, k));
        }
    }
    let plus = End {
        segment: left,
        at_start: false,
    };
    let minus = End {
        segment: right,
        at_start: true,
    };
    for (end, value) in [(plus, 1.0), (minus, 0.0)] {
        let forms =
            crate::spectral::problem::end_forms(&layout.segments[end.segment], end.at_start, z, k);
        let mut row = Row {
            rhs: Complex64::from(value),
            ..Row::default()
        };
        row.entries.push((2 * end.segment, forms.value[0] * one));
        row.entries
            .push((2 * end.segment + 1, forms.value[1] * one));
        rows.push(row);
    }
    let (m, rhs) = assemble(&layout, &rows);
    let m = m.map(|c| c.re);
    let svd = m.svd(true, true);
    let sv = &svd.singular_values;
    let (lo, hi) = (sv.min(), sv.max().max(1.0));
    if lo < RESONANCE_TOL * hi {
        return Err(Error::DirichletResonance { lambda, cut: j });
    }
    let b = nalgebra::DVector::from_iterator(rhs.len(), rhs.iter().map(|c| c.re));
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::ConditionMismatch(e.to_string()))?;
    let mut solution = Eigenpair::from_unknowns(layout, lambda, x.as_slice());
    solution.residual = solution.max_joint_residual(|i| i != cut_joint);
    let r = solution.end_eval_inward(plus).1 + solution.end_eval_inward(minus).1;
    Ok(Rho { solution, r })
}
