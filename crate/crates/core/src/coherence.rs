//! Subspace coherence, strong coherence and the joint incoherence parameter μ₁.
//!
//! All quantities are computed from the compact SVD of the matrix. The QR route
//! through the steering matrix is kept as an independent cross-check.

use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::TargetScene;
use crate::linalg::{is_finite, max_abs, row_energy};
use crate::signal::ComplexMatrix;

/// Tolerance on `BᴴB = I` accepted by the coherence functions.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Default relative rank threshold `max(N₁, N₂)·ε`.
pub fn default_rel_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Compact SVD `M = U Σ Vᴴ` truncated at the numerical rank.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
    pub rank: usize,
    pub rel_tol: f64,
}

impl SvdFactors {
    pub fn shape(&self) -> (usize, usize) {
        (self.u.nrows(), self.v.nrows())
    }
}

/// Thin SVD with singular values in nonincreasing order.
pub(crate) fn thin_svd(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let svd = m
        .thin_svd()
        .map_err(|e| Error::DegenerateInput(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((svd.U().to_owned(), s, svd.V().to_owned()))
}

/// Compact SVD keeping singular values `σ_i > rel_tol·σ₁`.
pub fn compact_svd(m: &ComplexMatrix, rel_tol: Option<f64>) -> Result<SvdFactors> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::DegenerateInput("empty matrix".into()));
    }
    if !is_finite(m) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let rel_tol = rel_tol.unwrap_or_else(|| default_rel_tol(rows, cols));
    if !(rel_tol.is_finite() && rel_tol >= 0.0) {
        return Err(invalid("rank tolerance must be nonnegative"));
    }
    let (u, s, v) = thin_svd(m)?;
    let s1 = s.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        return Err(Error::DegenerateInput("all-zero matrix has no column space".into()));
    }
    let rank = s.iter().take_while(|&&x| x > rel_tol * s1).count();
    Ok(SvdFactors {
        u: u.subcols(0, rank).to_owned(),
        singular_values: s[..rank].to_vec(),
        v: v.subcols(0, rank).to_owned(),
        rank,
        rel_tol,
    })
}

pub fn numerical_rank(m: &ComplexMatrix, rel_tol: Option<f64>) -> Result<usize> {
    compact_svd(m, rel_tol).map(|f| f.rank)
}

fn check_orthonormal(b: &ComplexMatrix) -> Result<()> {
    if b.ncols() == 0 || b.nrows() < b.ncols() {
        return Err(invalid(format!(
            "basis of shape {}x{} cannot have orthonormal columns",
            b.nrows(),
            b.ncols()
        )));
    }
    let gram = b.adjoint() * b;
    let r = b.ncols();
    for i in 0..r {
        for j in 0..r {
            let target = if i == j { 1.0 } else { 0.0 };
            if (gram[(i, j)] - Complex64::new(target, 0.0)).norm() > ORTHONORMALITY_TOL {
                return Err(invalid("basis columns are not orthonormal"));
            }
        }
    }
    Ok(())
}

/// `μ(U) = (N/r)·max_i ‖P_U e_i‖²` for a basis `B` with orthonormal columns.
pub fn subspace_coherence(b: &ComplexMatrix) -> Result<f64> {
    check_orthonormal(b)?;
    let (n, r) = b.shape();
    let max_row = (0..n).map(|i| row_energy(b, i)).fold(0.0, f64::max);
    Ok(n as f64 / r as f64 * max_row)
}

/// `μ_s(U) = max_{i,j} |(N/r)⟨e_i, P_U e_j⟩ − 1{i=j}|`, one projector row at a time.
pub fn strong_coherence(b: &ComplexMatrix) -> Result<f64> {
    check_orthonormal(b)?;
    let (n, r) = b.shape();
    let scale = n as f64 / r as f64;
    let rows: Vec<Vec<Complex64>> = (0..n).map(|i| b.row(i).iter().copied().collect()).collect();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let p_ij: Complex64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, c)| a * c.conj())
                .sum();
            let mut z = p_ij * scale;
            if i == j {
                z -= 1.0;
            }
            best = best.max(z.norm());
        }
    }
    Ok(best)
}

/// `μ₁ = √(N₁N₂/r)·‖U Vᴴ‖_∞` (largest entry magnitude).
pub fn mu1_parameter(f: &SvdFactors) -> f64 {
    let (n1, n2) = f.shape();
    let max_entry = max_abs(&(&f.u * f.v.adjoint()));
    (n1 as f64 * n2 as f64 / f.rank as f64).sqrt() * max_entry
}

/// Coherence figures of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    pub rank: usize,
    pub mu_u: f64,
    pub mu_v: f64,
    pub mu_s_u: f64,
    pub mu_s_v: f64,
    pub mu1: f64,
    pub tol: f64,
}

impl CoherenceReport {
    /// `max(μ(U), μ(V))`.
    pub fn mu0(&self) -> f64 {
        self.mu_u.max(self.mu_v)
    }

    pub fn mu_strong(&self) -> f64 {
        self.mu_s_u.max(self.mu_s_v)
    }
}

impl fmt::Display for CoherenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank={}", self.rank)?;
        writeln!(f, "mu_u={}", self.mu_u)?;
        writeln!(f, "mu_v={}", self.mu_v)?;
        writeln!(f, "mu_s_u={}", self.mu_s_u)?;
        writeln!(f, "mu_s_v={}", self.mu_s_v)?;
        writeln!(f, "mu1={}", self.mu1)?;
        writeln!(f, "tol={}", self.tol)
    }
}

pub fn coherence_report(m: &ComplexMatrix, rel_tol: Option<f64>) -> Result<CoherenceReport> {
    let f = compact_svd(m, rel_tol)?;
    Ok(CoherenceReport {
        rank: f.rank,
        mu_u: subspace_coherence(&f.u)?,
        mu_v: subspace_coherence(&f.v)?,
        mu_s_u: strong_coherence(&f.u)?,
        mu_s_v: strong_coherence(&f.v)?,
        mu1: mu1_parameter(&f),
        tol: f.rel_tol,
    })
}

/// Coherence of the column space of a full-column-rank steering matrix, through
/// its thin QR factor: `(M/K)·max_i ‖Q_i‖²`.
pub fn qr_route_coherence(steering: &ComplexMatrix) -> Result<f64> {
    let (m, k) = steering.shape();
    if k == 0 || m < k {
        return Err(invalid("QR route needs a tall steering matrix"));
    }
    let q = steering.qr().compute_thin_Q();
    let max_row = (0..m).map(|i| row_energy(&q, i)).fold(0.0, f64::max);
    Ok(m as f64 / k as f64 * max_row)
}

/// Keeps the first occurrence of each angle and drops later angles within `eps` of a kept one.
pub fn dedup_angles(scene: &TargetScene, eps: f64) -> Result<TargetScene> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(invalid("eps must be nonnegative"));
    }
    let angles = scene.angles();
    let mut keep: Vec<usize> = Vec::with_capacity(angles.len());
    for (i, &a) in angles.iter().enumerate() {
        if keep.iter().all(|&k| (angles[k] - a).abs() > eps) {
            keep.push(i);
        }
    }
    scene.select(&keep)
}
