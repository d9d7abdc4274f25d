//! Propagation of `(f, f')` across a segment with constant potential.

use num_complex::Complex64;

/// Below this `|λ - q|` the segment is treated as free (`f'' = 0`).
pub const LINEAR_SWITCH: f64 = 1e-12;

/// Transfer matrix of `-f'' + q f = λ f` over a segment of length `len`.
///
/// Maps `(f, f')` at the segment start to the segment end. Uses cos/sin for
/// `λ > q`, cosh/sinh for `λ < q` and the affine solution in between. The
/// determinant is one, which is the Wronskian being preserved.
pub fn segment_transfer(lambda: f64, q: f64, len: f64) -> [[f64; 2]; 2] {
    let z = lambda - q;
    if z.abs() < LINEAR_SWITCH {
        [[1.0, len], [0.0, 1.0]]
    } else if z > 0.0 {
        let w = z.sqrt();
        let (s, c) = (w * len).sin_cos();
        [[c, s / w], [-w * s, c]]
    } else {
        let k = (-z).sqrt();
        let (s, c) = ((k * len).sinh(), (k * len).cosh());
        [[c, s / k], [k * s, c]]
    }
}

/// Complex-λ version of [`segment_transfer`]; entire in `λ`.
pub fn segment_transfer_complex(lambda: Complex64, q: f64, len: f64) -> [[Complex64; 2]; 2] {
    if lambda.im == 0.0 {
        let t = segment_transfer(lambda.re, q, len);
        return t.map(|row| row.map(Complex64::from));
    }
    let z = lambda - q;
    if z.norm() < LINEAR_SWITCH {
        let one = Complex64::new(1.0, 0.0);
        return [[one, Complex64::from(len)], [Complex64::new(0.0, 0.0), one]];
    }
    let w = z.sqrt();
    let c = (w * len).cos();
    let s = (w * len).sin();
    [[c, s / w], [-w * s, c]]
}

/// Value and derivative at distance `s` from the start of a segment whose
/// start values are `(value, slope)`.
pub fn propagate(lambda: f64, q: f64, value: f64, slope: f64, s: f64) -> (f64, f64) {
    let t = segment_transfer(lambda, q, s);
    (
        t[0][0] * value + t[0][1] * slope,
        t[1][0] * value + t[1][1] * slope,
    )
}
