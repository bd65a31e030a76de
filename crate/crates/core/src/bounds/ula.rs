//! Coherence bounds for uniform linear array pairs.

use std::fmt;

use crate::error::{invalid, Result};
use crate::geometry::{ArrayGeometry, ArrayKind};

use super::dirichlet::{beta_sup_finite, beta_sup_uniform, min_separation_xi};
use super::{fmt_opt, MuBounds};

/// Bound report for a transmit/receive ULA pair.
#[derive(Debug, Clone, PartialEq)]
pub struct UlaBoundReport {
    pub m_t: usize,
    pub m_r: usize,
    pub k: usize,
    pub xi_t: Option<f64>,
    pub xi_r: Option<f64>,
    /// `min(ξ_t, ξ_r)`.
    pub xi: Option<f64>,
    pub beta_t: Option<f64>,
    pub beta_r: Option<f64>,
    pub beta_uniform: Option<f64>,
    pub mu0_bound: Option<f64>,
    pub mu1_bound: Option<f64>,
    /// `μ₀` rebuilt from `β_ξ` instead of the finite-`M` suprema.
    pub mu0_uniform: Option<f64>,
    pub k_max: f64,
    pub feasible: bool,
}

impl fmt::Display for UlaBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m_t={}", self.m_t)?;
        writeln!(f, "m_r={}", self.m_r)?;
        writeln!(f, "k={}", self.k)?;
        writeln!(f, "xi_t={}", fmt_opt(self.xi_t))?;
        writeln!(f, "xi_r={}", fmt_opt(self.xi_r))?;
        writeln!(f, "xi={}", fmt_opt(self.xi))?;
        writeln!(f, "beta_t={}", fmt_opt(self.beta_t))?;
        writeln!(f, "beta_r={}", fmt_opt(self.beta_r))?;
        writeln!(f, "beta_uniform={}", fmt_opt(self.beta_uniform))?;
        writeln!(f, "mu0_bound={}", fmt_opt(self.mu0_bound))?;
        writeln!(f, "mu1_bound={}", fmt_opt(self.mu1_bound))?;
        writeln!(f, "mu0_uniform={}", fmt_opt(self.mu0_uniform))?;
        writeln!(f, "k_max={}", self.k_max)?;
        writeln!(f, "feasible={}", self.feasible)
    }
}

/// `β_ξ(M)`, with `ξ = 0` mapped to the kernel peak `M²`.
pub fn side_beta(m: usize, xi: f64) -> Result<f64> {
    if xi == 0.0 {
        Ok((m * m) as f64)
    } else {
        beta_sup_finite(m, xi)
    }
}

/// `μ₀ = max_i M_i/(M_i − (K−1)√β_i)`, `μ₁ = μ₀√K`, feasible iff `K ≤ min_i M_i/√β_i`.
pub fn mu_bounds_from_betas(m_t: usize, m_r: usize, k: usize, beta_t: f64, beta_r: f64) -> MuBounds {
    let side_k = |m: usize, beta: f64| {
        if beta > 0.0 {
            m as f64 / beta.sqrt()
        } else {
            f64::INFINITY
        }
    };
    let k_max = side_k(m_t, beta_t).min(side_k(m_r, beta_r));
    if k <= 1 {
        return MuBounds {
            k_max,
            feasible: true,
            mu0: Some(1.0),
            mu1: Some(1.0),
        };
    }
    let feasible = k as f64 <= k_max;
    let ratio = |m: usize, beta: f64| m as f64 / (m as f64 - (k - 1) as f64 * beta.sqrt());
    let mu0 = feasible.then(|| ratio(m_t, beta_t).max(ratio(m_r, beta_r)));
    MuBounds {
        k_max,
        feasible,
        mu0,
        mu1: mu0.map(|v| v * (k as f64).sqrt()),
    }
}

/// Bounds for ULA sizes `M_t`, `M_r`, `K` targets and side separations `ξ_t`, `ξ_r`.
/// For `K = 1` there are no pairs and the bound is exactly 1.
pub fn ula_bounds(m_t: usize, m_r: usize, k: usize, xi_t: f64, xi_r: f64) -> Result<UlaBoundReport> {
    if m_t == 0 || m_r == 0 || k == 0 {
        return Err(invalid("M_t, M_r and K must be positive"));
    }
    if k == 1 {
        return Ok(UlaBoundReport {
            m_t,
            m_r,
            k,
            xi_t: None,
            xi_r: None,
            xi: None,
            beta_t: None,
            beta_r: None,
            beta_uniform: None,
            mu0_bound: Some(1.0),
            mu1_bound: Some(1.0),
            mu0_uniform: Some(1.0),
            k_max: f64::INFINITY,
            feasible: true,
        });
    }
    for (name, xi) in [("xi_t", xi_t), ("xi_r", xi_r)] {
        if !(0.0..=0.5).contains(&xi) {
            return Err(invalid(format!("{name} = {xi} outside [0, 1/2]")));
        }
    }
    let beta_t = side_beta(m_t, xi_t)?;
    let beta_r = side_beta(m_r, xi_r)?;
    let mb = mu_bounds_from_betas(m_t, m_r, k, beta_t, beta_r);
    let xi = xi_t.min(xi_r);
    let beta_uniform = if xi > 0.0 { Some(beta_sup_uniform(xi)?) } else { None };
    let mu0_uniform = beta_uniform.and_then(|b| {
        let u = mu_bounds_from_betas(m_t, m_r, k, b, b);
        u.mu0
    });
    Ok(UlaBoundReport {
        m_t,
        m_r,
        k,
        xi_t: Some(xi_t),
        xi_r: Some(xi_r),
        xi: Some(xi),
        beta_t: Some(beta_t),
        beta_r: Some(beta_r),
        beta_uniform,
        mu0_bound: mb.mu0,
        mu1_bound: mb.mu1,
        mu0_uniform,
        k_max: mb.k_max,
        feasible: mb.feasible,
    })
}

fn ula_spacing_ratio(g: &ArrayGeometry) -> Result<f64> {
    match (g.kind(), g.spacing_over_wavelength()) {
        (ArrayKind::Ula, Some(r)) => Ok(r),
        _ => Err(invalid("ULA bounds need ULA geometries")),
    }
}

/// Bounds for a concrete ULA pair and (distinct) target angles, with `ξ_t`, `ξ_r`
/// computed from each side's `d/λ`.
pub fn ula_bounds_for_scene(tx: &ArrayGeometry, rx: &ArrayGeometry, angles: &[f64]) -> Result<UlaBoundReport> {
    let k = angles.len();
    let rt = ula_spacing_ratio(tx)?;
    let rr = ula_spacing_ratio(rx)?;
    if k < 2 {
        return ula_bounds(tx.len(), rx.len(), k, 0.5, 0.5);
    }
    let xi_t = min_separation_xi(rt, angles)?;
    let xi_r = min_separation_xi(rr, angles)?;
    ula_bounds(tx.len(), rx.len(), k, xi_t, xi_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::dirichlet::dirichlet_sq;

    #[test]
    fn single_target_is_exact() {
        for m in [1usize, 2, 9, 64] {
            let r = ula_bounds(m, m + 1, 1, 0.0, 0.0).unwrap();
            assert_eq!(r.mu0_bound, Some(1.0));
            assert_eq!(r.mu1_bound, Some(1.0));
            assert!(r.feasible);
            assert!(r.xi.is_none());
        }
    }

    #[test]
    fn worked_example_m20_k4() {
        let r = ula_bounds(20, 20, 4, 0.25, 0.25).unwrap();
        let n = 400_000;
        let brute = (0..=n)
            .map(|i| dirichlet_sq(20, 0.25 + 0.25 * i as f64 / n as f64))
            .fold(0.0, f64::max);
        let beta = r.beta_t.unwrap();
        assert!(beta >= brute && beta <= brute * (1.0 + 1e-8));
        let want = 20.0 / (20.0 - 3.0 * beta.sqrt());
        assert!((r.mu0_bound.unwrap() - want).abs() < 1e-12);
        assert!((r.mu1_bound.unwrap() - want * 2.0).abs() < 1e-12);
        assert!(r.feasible);
        assert!(r.k_max >= 4.0);
    }

    #[test]
    fn coincident_sines_are_infeasible() {
        let r = ula_bounds(16, 16, 3, 0.0, 0.2).unwrap();
        assert!(!r.feasible);
        assert!(r.mu0_bound.is_none() && r.mu1_bound.is_none());
        assert!((r.k_max - 1.0).abs() < 1e-12);
        assert!(r.beta_uniform.is_none());
    }

    #[test]
    fn infeasible_at_small_m() {
        let r = ula_bounds(4, 4, 4, 0.05, 0.05).unwrap();
        assert!(!r.feasible);
        assert!(r.to_string().contains("mu0_bound=none"));
    }

    #[test]
    fn bound_decreases_towards_one() {
        let mut prev = f64::INFINITY;
        for m in (10..=400).step_by(10) {
            let r = ula_bounds(m, m, 4, 0.2, 0.2).unwrap();
            if let Some(b) = r.mu0_bound {
                assert!(b >= 1.0 && b <= prev + 1e-12, "M = {m}");
                prev = b;
            }
        }
        assert!(prev < 1.05);
    }

    #[test]
    fn uniform_bound_dominates() {
        let r = ula_bounds(40, 30, 3, 0.1, 0.15).unwrap();
        assert!(r.mu0_uniform.unwrap() >= r.mu0_bound.unwrap());
        assert!(r.beta_uniform.unwrap() >= r.beta_t.unwrap());
    }

    #[test]
    fn scene_path_uses_each_side_spacing() {
        let tx = ArrayGeometry::ula(12, 0.25, 0.5).unwrap();
        let rx = ArrayGeometry::ula(10, 0.5, 0.5).unwrap();
        let angles = [-0.5, 0.4];
        let r = ula_bounds_for_scene(&tx, &rx, &angles).unwrap();
        let ds = ((-0.5f64).sin() - 0.4f64.sin()).abs();
        assert!((r.xi_t.unwrap() - super::super::dirichlet::wrap_g(0.5 * ds)).abs() < 1e-15);
        assert!((r.xi_r.unwrap() - super::super::dirichlet::wrap_g(ds)).abs() < 1e-15);
        let uca = ArrayGeometry::uca(8, 0.5, 0.5).unwrap();
        assert!(ula_bounds_for_scene(&uca, &rx, &angles).is_err());
    }
}
