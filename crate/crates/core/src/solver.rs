//! Nuclear-norm matrix completion.
//!
//! The equality-constrained program `min ‖X‖_* s.t. P(X) = P(Y)` is solved by
//! singular value thresholding. Two iterations are available:
//!
//! * [`Variant::Augmented`] (default): the alternating-direction form
//!   `X = D_t(Z − W)`, `Z = X + W` with observed entries reset, `W += γ(X − Z)`.
//!   Its fixed point is the exact minimizer for every threshold `t`.
//! * [`Variant::Classic`]: `X = D_τ(Y)`, `Y += δ P(M − X)`, which converges to the
//!   minimizer of `τ‖X‖_* + ½‖X‖_F²` and so carries an `O(1/τ)` bias.
//!
//! The noisy program `min ‖X‖_* s.t. ‖P(X − Y)‖_F ≤ δ` is approached through
//! proximal gradient steps on `½‖P(X − Y)‖² + λ‖X‖_*` with a decreasing `λ`,
//! stopping the first time the data-fit residual reaches `δ`.

use std::fmt;

use faer::Scale;
use num_complex::Complex64;

use crate::coherence::thin_svd;
use crate::error::{invalid, Error, Result};
use crate::signal::{ComplexMatrix, PartialObservation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Augmented,
    Classic,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "augmented" => Ok(Self::Augmented),
            "classic" => Ok(Self::Classic),
            _ => Err(invalid(format!("unknown solver variant '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Augmented => "augmented",
            Self::Classic => "classic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub variant: Variant,
    /// Shrinkage threshold.
    pub threshold: f64,
    /// Dual step: `γ` for the augmented form, `δ` for the classic one.
    pub step: f64,
    pub max_iters: usize,
    pub rel_stop_tol: f64,
    /// Keep at most this many singular values after shrinkage.
    pub svd_rank_cap: Option<usize>,
}

pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_REL_STOP_TOL: f64 = 1e-4;

impl SolverParams {
    /// Augmented-form defaults: `t = ‖P(Y)‖_F/√m`, `γ = 1`.
    pub fn for_observation(obs: &PartialObservation) -> Self {
        let m = obs.mask().len().max(1) as f64;
        let t = obs.norm() / m.sqrt();
        Self {
            variant: Variant::Augmented,
            threshold: if t > 0.0 { t } else { 1.0 },
            step: 1.0,
            max_iters: DEFAULT_MAX_ITERS,
            rel_stop_tol: DEFAULT_REL_STOP_TOL,
            svd_rank_cap: None,
        }
    }

    /// Classic defaults for an `n1 × n2` matrix with `m` samples:
    /// `τ = 5√(n1 n2)`, `δ = 1.2 n1 n2 / m`.
    pub fn classic(n1: usize, n2: usize, m: usize) -> Self {
        let nn = (n1 * n2) as f64;
        Self {
            variant: Variant::Classic,
            threshold: 5.0 * nn.sqrt(),
            step: 1.2 * nn / m.max(1) as f64,
            max_iters: DEFAULT_MAX_ITERS,
            rel_stop_tol: DEFAULT_REL_STOP_TOL,
            svd_rank_cap: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.rel_stop_tol = tol;
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("threshold", self.threshold),
            ("step", self.step),
            ("rel_stop_tol", self.rel_stop_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be positive"));
        }
        if self.svd_rank_cap == Some(0) {
            return Err(invalid("svd_rank_cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CompletionResult {
    pub estimate: ComplexMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// `‖P(X_k − Y)‖_F / ‖P(Y)‖_F` per iteration (absolute for the noisy solver).
    pub residual_history: Vec<f64>,
}

impl CompletionResult {
    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    /// Medians of consecutive `window`-long blocks never increase by more than `slack`
    /// (relative). Raw residuals oscillate; the block medians should not.
    pub fn trailing_median_nonincreasing(&self, window: usize, slack: f64) -> bool {
        let w = window.max(1);
        let medians: Vec<f64> = self
            .residual_history
            .chunks(w)
            .filter(|c| c.len() == w)
            .map(|c| {
                let mut v = c.to_vec();
                v.sort_by(f64::total_cmp);
                v[w / 2]
            })
            .collect();
        medians.windows(2).all(|p| p[1] <= p[0] * (1.0 + slack))
    }

    /// Residual history as `iter,residual` CSV rows (with header).
    pub fn residual_csv(&self) -> String {
        let mut s = String::from("iter,residual\n");
        for (i, r) in self.residual_history.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, r));
        }
        s
    }
}

/// Singular value shrinkage `D_t(A) = U max(Σ − t, 0) Vᴴ`, keeping at most `cap` terms.
pub fn shrink(a: &ComplexMatrix, t: f64, cap: Option<usize>) -> Result<ComplexMatrix> {
    let (u, s, v) = thin_svd(a)?;
    let keep = s
        .iter()
        .take(cap.unwrap_or(usize::MAX))
        .take_while(|&&x| x > t)
        .count();
    let (rows, cols) = a.shape();
    if keep == 0 {
        return Ok(ComplexMatrix::zeros(rows, cols));
    }
    let mut us = u.subcols(0, keep).to_owned();
    for k in 0..keep {
        let f = s[k] - t;
        for z in us.col_mut(k).iter_mut() {
            *z *= f;
        }
    }
    Ok(&us * v.subcols(0, keep).adjoint())
}

fn observed_residual(x: &ComplexMatrix, obs: &PartialObservation) -> f64 {
    obs.mask()
        .indices()
        .iter()
        .zip(obs.values())
        .map(|(&(i, j), b)| (x[(i, j)] - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn check_obs(obs: &PartialObservation) -> Result<f64> {
    if obs.mask().is_empty() {
        return Err(invalid("mask is empty"));
    }
    Ok(obs.norm())
}

/// Divergence: residual above 10× its first value for this many consecutive iterations.
const DIVERGENCE_RUN: usize = 50;

struct Monitor {
    first: Option<f64>,
    run: usize,
}

impl Monitor {
    fn new() -> Self {
        Self { first: None, run: 0 }
    }

    fn diverged(&mut self, r: f64) -> bool {
        if !r.is_finite() {
            return true;
        }
        let first = *self.first.get_or_insert(r);
        if r > 10.0 * first {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= DIVERGENCE_RUN
    }
}

/// Solves `min ‖X‖_* s.t. P(X) = P(Y)` by singular value thresholding.
pub fn svt_complete(obs: &PartialObservation, params: &SolverParams) -> Result<CompletionResult> {
    params.validate()?;
    let bnorm = check_obs(obs)?;
    let (rows, cols) = obs.shape();
    if bnorm == 0.0 {
        return Ok(CompletionResult {
            estimate: ComplexMatrix::zeros(rows, cols),
            iterations: 0,
            converged: true,
            residual_history: vec![0.0],
        });
    }
    match params.variant {
        Variant::Augmented => augmented(obs, params, bnorm),
        Variant::Classic => classic(obs, params, bnorm),
    }
}

fn augmented(obs: &PartialObservation, p: &SolverParams, bnorm: f64) -> Result<CompletionResult> {
    let idx = obs.mask().indices();
    let vals = obs.values();
    let mut z = obs.to_dense();
    let (rows, cols) = obs.shape();
    let mut w = ComplexMatrix::zeros(rows, cols);
    let mut x_prev = ComplexMatrix::zeros(rows, cols);
    let mut history = Vec::new();
    let mut monitor = Monitor::new();
    for it in 1..=p.max_iters {
        let x = shrink(&(&z - &w), p.threshold, p.svd_rank_cap)?;
        z = &x + &w;
        for (&(i, j), b) in idx.iter().zip(vals) {
            z[(i, j)] = *b;
        }
        w += Scale(Complex64::new(p.step, 0.0)) * (&x - &z);
        let res = observed_residual(&x, obs) / bnorm;
        history.push(res);
        let xn = x.norm_l2();
        let change = if xn > 0.0 { (&x - &x_prev).norm_l2() / xn } else { f64::INFINITY };
        if res <= p.rel_stop_tol && change <= p.rel_stop_tol {
            return Ok(done(x, it, true, history));
        }
        if monitor.diverged(res) {
            return Ok(done(x, it, false, history));
        }
        x_prev = x;
    }
    Ok(done(x_prev, p.max_iters, false, history))
}

fn classic(obs: &PartialObservation, p: &SolverParams, bnorm: f64) -> Result<CompletionResult> {
    let idx = obs.mask().indices();
    let vals = obs.values();
    let b = obs.to_dense();
    let spectral = thin_svd(&b)?.1[0];
    // warm start: the first iterate with a nonzero shrinkage
    let k0 = (p.threshold / (p.step * spectral)).ceil().max(1.0);
    let mut y = &b * Scale(Complex64::new(k0 * p.step, 0.0));
    let mut history = Vec::new();
    let mut monitor = Monitor::new();
    let mut x = ComplexMatrix::zeros(b.nrows(), b.ncols());
    for it in 1..=p.max_iters {
        x = shrink(&y, p.threshold, p.svd_rank_cap)?;
        let res = observed_residual(&x, obs) / bnorm;
        history.push(res);
        if res <= p.rel_stop_tol {
            return Ok(done(x, it, true, history));
        }
        if monitor.diverged(res) {
            return Ok(done(x, it, false, history));
        }
        for (&(i, j), v) in idx.iter().zip(vals) {
            y[(i, j)] += (v - x[(i, j)]) * p.step;
        }
    }
    Ok(done(x, p.max_iters, false, history))
}

fn done(estimate: ComplexMatrix, iterations: usize, converged: bool, residual_history: Vec<f64>) -> CompletionResult {
    CompletionResult {
        estimate,
        iterations,
        converged,
        residual_history,
    }
}

/// Continuation factor for the regularization weight of the noisy solver.
const LAMBDA_DECAY: f64 = 0.8;
/// Proximal steps per continuation stage.
const STAGE_ITERS: usize = 25;

/// Approaches `min ‖X‖_* s.t. ‖P(X − Y)‖_F ≤ δ`. `δ = 0` is the exact program.
/// The residual history holds absolute residuals `‖P(X − Y)‖_F`.
pub fn noisy_complete(obs: &PartialObservation, delta: f64, params: &SolverParams) -> Result<CompletionResult> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(invalid("delta must be nonnegative"));
    }
    if delta == 0.0 {
        return svt_complete(obs, params);
    }
    params.validate()?;
    let bnorm = check_obs(obs)?;
    let (rows, cols) = obs.shape();
    if bnorm <= delta {
        return Ok(done(ComplexMatrix::zeros(rows, cols), 0, true, vec![bnorm]));
    }
    let idx = obs.mask().indices();
    let vals = obs.values();
    let b = obs.to_dense();
    let mut lambda = thin_svd(&b)?.1[0];
    let mut x = ComplexMatrix::zeros(rows, cols);
    let mut history = Vec::new();
    let target = delta * (1.0 + params.rel_stop_tol);
    let mut it = 0;
    while it < params.max_iters {
        lambda *= LAMBDA_DECAY;
        for _ in 0..STAGE_ITERS {
            if it >= params.max_iters {
                break;
            }
            it += 1;
            // gradient step with unit step size (P is a projection)
            let mut g = x.clone();
            for (&(i, j), v) in idx.iter().zip(vals) {
                g[(i, j)] = *v;
            }
            let next = shrink(&g, lambda, params.svd_rank_cap)?;
            let change = (&next - &x).norm_l2();
            x = next;
            let res = observed_residual(&x, obs);
            history.push(res);
            if res <= target {
                return Ok(done(x, it, true, history));
            }
            if change <= params.rel_stop_tol * x.norm_l2().max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }
    Ok(done(x, it, false, history))
}

/// `4√((2N₁N₂ + m)·min(N₁, N₂)/m)·δ + 2δ`.
pub fn stability_bound(n1: usize, n2: usize, m: usize, delta: f64) -> Result<f64> {
    if m == 0 || n1 == 0 || n2 == 0 {
        return Err(invalid("N1, N2 and m must be positive"));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(invalid("delta must be nonnegative"));
    }
    let nn = (n1 * n2) as f64;
    let mf = m as f64;
    Ok(4.0 * ((2.0 * nn + mf) * n1.min(n2) as f64 / mf).sqrt() * delta + 2.0 * delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryError {
    pub abs_frob: f64,
    /// `abs_frob / ‖truth‖_F` (0 when both vanish, infinite for a zero truth otherwise).
    pub rel_frob: f64,
    pub max_entry: f64,
}

impl fmt::Display for RecoveryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "abs_frob={}", self.abs_frob)?;
        writeln!(f, "rel_frob={}", self.rel_frob)?;
        writeln!(f, "max_entry={}", self.max_entry)
    }
}

pub fn recovery_error(truth: &ComplexMatrix, estimate: &ComplexMatrix) -> Result<RecoveryError> {
    if truth.shape() != estimate.shape() {
        return Err(Error::ShapeMismatch {
            expected: truth.shape(),
            got: estimate.shape(),
        });
    }
    let d = truth - estimate;
    let abs_frob = d.norm_l2();
    let tn = truth.norm_l2();
    let rel_frob = if tn > 0.0 {
        abs_frob / tn
    } else if abs_frob == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(RecoveryError {
        abs_frob,
        rel_frob,
        max_entry: crate::linalg::max_abs(&d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{observe, sample_uniform, SampleMask};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_rank_one(n: usize, seed: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::from_polar(1.0, seed * i as f64 + 0.37 * (j * j) as f64 - 0.9 * j as f64)
        })
    }

    #[test]
    fn shrink_matches_definition() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| if i == j { c([5.0, 2.0, 0.5][i], 0.0) } else { c(0.0, 0.0) });
        let s = shrink(&a, 1.0, None).unwrap();
        assert!((s[(0, 0)].re - 4.0).abs() < 1e-12);
        assert!((s[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(s[(2, 2)].norm() < 1e-12);
        let capped = shrink(&a, 1.0, Some(1)).unwrap();
        assert!(capped[(1, 1)].norm() < 1e-12);
        assert!(shrink(&a, 10.0, None).unwrap().norm_l2() == 0.0);
    }

    #[test]
    fn full_mask_recovers() {
        let truth = unit_rank_one(6, 0.4);
        let obs = PartialObservation::noiseless(&truth, SampleMask::full(6, 6).unwrap()).unwrap();
        for p in [SolverParams::for_observation(&obs), SolverParams::classic(6, 6, 36)] {
            let r = svt_complete(&obs, &p).unwrap();
            assert!(r.converged, "{:?}", p.variant);
            let e = recovery_error(&truth, &r.estimate).unwrap();
            assert!(e.rel_frob <= p.rel_stop_tol, "{:?} {}", p.variant, e.rel_frob);
        }
    }

    #[test]
    fn rank_one_sixty_percent() {
        let truth = unit_rank_one(8, 1.1);
        let mut ok = 0;
        for seed in 0..20 {
            let mask = sample_uniform(8, 8, 38, seed).unwrap();
            let obs = PartialObservation::noiseless(&truth, mask).unwrap();
            let p = SolverParams::for_observation(&obs).with_tol(1e-5);
            let r = svt_complete(&obs, &p).unwrap();
            if recovery_error(&truth, &r.estimate).unwrap().rel_frob <= 1e-4 {
                ok += 1;
            }
        }
        assert!(ok >= 19, "{ok}/20");
    }

    #[test]
    fn missing_row_is_not_recovered() {
        let truth = unit_rank_one(6, 0.7);
        let idx: Vec<_> = (1..6).flat_map(|i| (0..6).map(move |j| (i, j))).collect();
        let obs = PartialObservation::noiseless(&truth, SampleMask::new(6, 6, idx).unwrap()).unwrap();
        let r = svt_complete(&obs, &SolverParams::for_observation(&obs)).unwrap();
        let row_err: f64 = (0..6).map(|j| (r.estimate[(0, j)] - truth[(0, j)]).norm_sqr()).sum::<f64>().sqrt();
        let row_norm = 6f64.sqrt();
        assert!(!r.converged || row_err >= row_norm - 1e-3, "{row_err}");
    }

    #[test]
    fn residual_history_settles() {
        let truth = unit_rank_one(10, 0.2);
        let obs = PartialObservation::noiseless(&truth, sample_uniform(10, 10, 60, 3).unwrap()).unwrap();
        let r = svt_complete(&obs, &SolverParams::for_observation(&obs)).unwrap();
        assert!(r.converged);
        assert!(r.trailing_median_nonincreasing(20, 1e-9));
        assert!(r.residual_csv().starts_with("iter,residual\n1,"));
    }

    #[test]
    fn noisy_zero_delta_matches_exact() {
        let truth = unit_rank_one(8, 0.3);
        let obs = PartialObservation::noiseless(&truth, sample_uniform(8, 8, 40, 1).unwrap()).unwrap();
        let p = SolverParams::for_observation(&obs);
        let a = svt_complete(&obs, &p).unwrap();
        let b = noisy_complete(&obs, 0.0, &p).unwrap();
        assert!(crate::linalg::max_abs_diff(&a.estimate, &b.estimate) <= 1e-8);
    }

    #[test]
    fn noisy_large_delta_returns_zero() {
        let truth = unit_rank_one(5, 0.3);
        let obs = PartialObservation::noiseless(&truth, sample_uniform(5, 5, 12, 1).unwrap()).unwrap();
        let r = noisy_complete(&obs, obs.norm() * 1.01, &SolverParams::for_observation(&obs)).unwrap();
        assert_eq!(r.estimate.norm_l2(), 0.0);
        assert!(r.converged);
    }

    #[test]
    fn noisy_respects_residual_and_stability_bound() {
        let a = ComplexMatrix::from_fn(16, 2, |i, k| Complex64::from_polar(1.0, (0.3 + k as f64) * i as f64));
        let b = ComplexMatrix::from_fn(16, 2, |j, k| Complex64::from_polar(1.0, (1.7 - 0.4 * k as f64) * j as f64));
        let truth = &a * b.transpose();
        let mask = sample_uniform(16, 16, 179, 9).unwrap();
        let obs = observe(&truth, &mask, 0.05, 4).unwrap();
        let delta = obs.noise_level();
        let p = SolverParams::for_observation(&obs);
        let r = noisy_complete(&obs, delta, &p).unwrap();
        assert!(r.converged);
        assert!(observed_residual(&r.estimate, &obs) <= delta * (1.0 + p.rel_stop_tol));
        let err = recovery_error(&truth, &r.estimate).unwrap().abs_frob;
        assert!(err <= stability_bound(16, 16, 179, delta).unwrap(), "{err}");
    }

    #[test]
    fn stability_formula() {
        assert_eq!(stability_bound(10, 10, 50, 0.0).unwrap(), 0.0);
        let v = stability_bound(10, 10, 50, 0.1).unwrap();
        assert!((v - (4.0 * 50f64.sqrt() * 0.1 + 0.2)).abs() < 1e-12);
        assert!((v - 3.0284).abs() < 1e-3);
        let mut prev = f64::INFINITY;
        for m in 1..=100 {
            let b = stability_bound(10, 10, m, 0.1).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(stability_bound(10, 10, 0, 0.1).is_err());
    }

    #[test]
    fn recovery_error_oracle() {
        let t = ComplexMatrix::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.7));
        let e = ComplexMatrix::from_fn(4, 4, |i, j| c(((i + 2 * j) % 5) as f64 * 0.3, 0.05 * (i * j) as f64));
        let mut s = 0.0;
        let mut tn = 0.0;
        let mut mx = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let d = (t[(i, j)] - e[(i, j)]).norm();
                s += d * d;
                tn += t[(i, j)].norm_sqr();
                mx = mx.max(d);
            }
        }
        let r = recovery_error(&t, &e).unwrap();
        assert!((r.abs_frob - s.sqrt()).abs() < 1e-12);
        assert!((r.rel_frob - s.sqrt() / tn.sqrt()).abs() < 1e-12);
        assert!((r.max_entry - mx).abs() < 1e-12);
        let z = recovery_error(&t, &ComplexMatrix::zeros(4, 4)).unwrap();
        assert!((z.rel_frob - 1.0).abs() < 1e-15);
        assert_eq!(recovery_error(&t, &t).unwrap().abs_frob, 0.0);
        assert!(recovery_error(&t, &ComplexMatrix::zeros(3, 4)).is_err());
    }
}
