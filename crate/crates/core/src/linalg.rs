//! Small helpers over dense complex matrices.

use num_complex::Complex64;

use crate::signal::ComplexMatrix;

/// Largest entry magnitude `max |a_ij|`.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for z in a.col(j).iter() {
            best = best.max(z.norm());
        }
    }
    best
}

/// `max |a_ij − b_ij|`; panics on shape mismatch.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    max_abs(&(a - b))
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.norm_l2()
}

/// `‖a_i,:‖²` for row `i`.
pub fn row_energy(a: &ComplexMatrix, i: usize) -> f64 {
    a.row(i).iter().map(|z| z.norm_sqr()).sum()
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    (0..a.ncols()).all(|j| a.col(j).iter().all(|z: &Complex64| z.is_finite()))
}
