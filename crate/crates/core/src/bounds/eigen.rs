//! Trace-based eigenvalue brackets for Hermitian matrices.

use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::signal::ComplexMatrix;

/// Tolerance on `|M − Mᴴ|`, relative to the largest entry (absolute below 1).
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBracket {
    pub tau: f64,
    pub s: f64,
    pub lambda_min_lo: f64,
    pub lambda_min_hi: f64,
    pub lambda_max_lo: f64,
    pub lambda_max_hi: f64,
}

impl EigenBracket {
    pub fn contains_min(&self, v: f64, slack: f64) -> bool {
        v >= self.lambda_min_lo - slack && v <= self.lambda_min_hi + slack
    }

    pub fn contains_max(&self, v: f64, slack: f64) -> bool {
        v >= self.lambda_max_lo - slack && v <= self.lambda_max_hi + slack
    }
}

impl fmt::Display for EigenBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tau={}", self.tau)?;
        writeln!(f, "s={}", self.s)?;
        writeln!(f, "lambda_min_lo={}", self.lambda_min_lo)?;
        writeln!(f, "lambda_min_hi={}", self.lambda_min_hi)?;
        writeln!(f, "lambda_max_lo={}", self.lambda_max_lo)?;
        writeln!(f, "lambda_max_hi={}", self.lambda_max_hi)
    }
}

/// `τ = tr(M)/N`, `s² = tr(M²)/N − τ²`;
/// `τ − s√(N−1) ≤ λ_min ≤ τ − s/√(N−1)` and `τ + s/√(N−1) ≤ λ_max ≤ τ + s√(N−1)`.
pub fn wolkowicz_brackets(m: &ComplexMatrix) -> Result<EigenBracket> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(invalid("brackets need a nonempty square matrix"));
    }
    let scale = crate::linalg::max_abs(m).max(1.0);
    let mut trace = 0.0;
    let mut trace_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = m[(i, j)];
            let b: Complex64 = m[(j, i)].conj();
            if !a.is_finite() || (a - b).norm() > HERMITIAN_TOL * scale {
                return Err(invalid("matrix is not Hermitian"));
            }
            trace_sq += a.norm_sqr();
        }
        trace += m[(i, i)].re;
    }
    let nf = n as f64;
    let tau = trace / nf;
    let s = (trace_sq / nf - tau * tau).max(0.0).sqrt();
    if n == 1 {
        return Ok(EigenBracket {
            tau,
            s,
            lambda_min_lo: tau,
            lambda_min_hi: tau,
            lambda_max_lo: tau,
            lambda_max_hi: tau,
        });
    }
    let wide = s * (nf - 1.0).sqrt();
    let narrow = s / (nf - 1.0).sqrt();
    Ok(EigenBracket {
        tau,
        s,
        lambda_min_lo: tau - wide,
        lambda_min_hi: tau - narrow,
        lambda_max_lo: tau + narrow,
        lambda_max_hi: tau + wide,
    })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| invalid(format!("eigen solver failed: {e:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(v.len(), v.len(), |i, j| {
            if i == j {
                Complex64::new(v[i], 0.0)
            } else {
                Complex64::ZERO
            }
        })
    }

    #[test]
    fn identity() {
        let b = wolkowicz_brackets(&diag(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(b.tau, 1.0);
        assert_eq!(b.s, 0.0);
        for v in [b.lambda_min_lo, b.lambda_min_hi, b.lambda_max_lo, b.lambda_max_hi] {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn diag_123() {
        let b = wolkowicz_brackets(&diag(&[1.0, 2.0, 3.0])).unwrap();
        assert!((b.tau - 2.0).abs() < 1e-15);
        assert!((b.s * b.s - 2.0 / 3.0).abs() < 1e-14);
        assert!((b.lambda_min_lo - (2.0 - (4.0f64 / 3.0).sqrt())).abs() < 1e-12);
        assert!((b.lambda_min_hi - (2.0 - (1.0f64 / 3.0).sqrt())).abs() < 1e-12);
        assert!(b.contains_min(1.0, 0.0));
        assert!(b.contains_max(3.0, 0.0));
    }

    #[test]
    fn equality_case() {
        // one small eigenvalue, the rest equal: the wide lower bound is attained
        let b = wolkowicz_brackets(&diag(&[0.5, 4.0, 4.0, 4.0, 4.0])).unwrap();
        assert!((b.lambda_min_lo - 0.5).abs() < 1e-10);
        let b = wolkowicz_brackets(&diag(&[9.0, 2.0, 2.0, 2.0])).unwrap();
        assert!((b.lambda_max_hi - 9.0).abs() < 1e-10);
    }

    #[test]
    fn scalar() {
        let b = wolkowicz_brackets(&diag(&[-3.5])).unwrap();
        assert_eq!(b.lambda_min_lo, -3.5);
        assert_eq!(b.lambda_max_hi, -3.5);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = diag(&[1.0, 2.0]);
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        m[(1, 0)] = Complex64::new(0.0, 1.0);
        assert!(wolkowicz_brackets(&m).is_err());
        m[(1, 0)] = Complex64::new(0.0, -1.0);
        assert!(wolkowicz_brackets(&m).is_ok());
    }
}
