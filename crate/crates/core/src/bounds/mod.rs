//! Theoretical coherence bounds, kernel suprema, eigenvalue brackets and
//! sample-count thresholds.

pub mod dirichlet;
pub mod eigen;
pub mod general;
pub mod samples;
pub mod ula;

pub use dirichlet::{
    beta_sup_finite, beta_sup_finite_bracket, beta_sup_uniform, dirichlet_sq, lemma2_xi,
    min_separation_xi, wrap_g, SupBracket,
};
pub use eigen::{hermitian_eigenvalues, wolkowicz_brackets, EigenBracket};
pub use general::{
    general_beta, general_beta_with, general_bounds, phi_general, AdmissibleSet, GeneralBeta,
    GeneralBoundReport, SearchOptions,
};
pub use samples::{sample_requirement, target_sample_counts, Branch, SampleConstants, SampleThresholds};
pub use ula::{mu_bounds_from_betas, side_beta, ula_bounds, ula_bounds_for_scene, UlaBoundReport};

/// Feasibility threshold and the resulting `μ₀`, `μ₁` (absent when infeasible).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuBounds {
    pub k_max: f64,
    pub feasible: bool,
    pub mu0: Option<f64>,
    pub mu1: Option<f64>,
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}
