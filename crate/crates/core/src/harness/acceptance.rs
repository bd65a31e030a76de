//! Property suites behind the `acceptance` command.
//!
//! Every criterion returns a verdict plus a one-line detail. Random inputs are
//! drawn from `AcceptanceOptions::seed`, so a verdict can be replayed.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds::{
    beta_sup_finite_bracket, general_beta, hermitian_eigenvalues, lemma2_xi, min_separation_xi,
    mu_bounds_from_betas, phi_general, sample_requirement, target_sample_counts, ula_bounds_for_scene,
    wolkowicz_brackets, wrap_g, AdmissibleSet, SampleConstants, UlaBoundReport,
};
use crate::coherence::{coherence_report, dedup_angles, CoherenceReport};
use crate::config::draw_scene;
use crate::error::Result;
use crate::geometry::{ArrayGeometry, TargetScene};
use crate::rng::{self, derive_seed};
use crate::signal::{data_matrix, observe, sample_uniform, steering_matrix, ComplexMatrix, PartialObservation};
use crate::solver::{noisy_complete, recovery_error, stability_bound, svt_complete, SolverParams};

use super::{map_trials, surface_axis, SUCCESS_REL_ERR};

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceOptions {
    pub seed: u64,
    /// Multiplies every kernel supremum in the bound-validity suite (1 = unmodified).
    pub beta_scale: f64,
    /// Run the `M = 64` recovery-phase sweep (the slow part of criterion 10).
    pub phase_sweep: bool,
    pub phase_trials: usize,
    pub phase_grid: Vec<usize>,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            beta_scale: 1.0,
            phase_sweep: true,
            phase_trials: 50,
            phase_grid: vec![400, 600, 800, 1000, 1200, 1600, 2048],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<26} {} ({:.2}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceReport {
    pub results: Vec<CriterionResult>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn verdicts(&self) -> Vec<(u8, bool)> {
        self.results.iter().map(|r| (r.id, r.passed)).collect()
    }

    pub fn get(&self, id: u8) -> Option<&CriterionResult> {
        self.results.iter().find(|r| r.id == id)
    }
}

impl fmt::Display for AcceptanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        let failed = self.results.iter().filter(|r| !r.passed).count();
        writeln!(f, "{} passed, {failed} failed", self.results.len() - failed)
    }
}

fn timed(
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    run: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionResult {
    let t0 = Instant::now();
    let (mut passed, mut detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
    let elapsed = t0.elapsed();
    if let Some(l) = limit {
        if elapsed > l {
            passed = false;
            detail.push_str(&format!("; over time limit {}s", l.as_secs()));
        }
    }
    CriterionResult {
        id,
        name,
        passed,
        detail,
        elapsed,
    }
}

pub fn run_acceptance(opts: &AcceptanceOptions) -> AcceptanceReport {
    let mut results = vec![timed(1, "single-target coherence", Some(Duration::from_secs(1)), || {
        single_target(opts.seed)
    })];
    let t0 = Instant::now();
    let instances = bound_instances(opts.seed);
    let build = t0.elapsed();
    let mut c2 = timed(2, "bound validity", Some(Duration::from_secs(120)), || {
        bound_validity(instances.as_ref().map_err(clone_err)?, opts.beta_scale)
    });
    c2.elapsed += build;
    results.push(c2);
    results.push(timed(3, "asymptotic coherence", None, fixed_scene_sweep));
    results.push(timed(4, "separation closed form", None, || separation_closed_form(opts.seed)));
    results.push(timed(5, "strong coherence chain", None, || {
        strong_chain(instances.as_ref().map_err(clone_err)?)
    }));
    results.push(timed(6, "duplicate angles", None, || duplicate_angles(opts.seed)));
    results.push(timed(7, "eigenvalue brackets", None, || eigen_brackets(opts.seed)));
    results.push(timed(8, "gram eigenvalue bound", None, || {
        gram_bound(instances.as_ref().map_err(clone_err)?)
    }));
    results.push(timed(9, "general-array kernel", None, general_kernel));
    results.push(timed(10, "noiseless completion", Some(Duration::from_secs(600)), || {
        noiseless_completion(opts)
    }));
    results.push(timed(11, "noisy stability", None, || noisy_stability(opts.seed)));
    results.push(timed(12, "sample-count formulas", None, sample_formulas));
    AcceptanceReport { results }
}

fn clone_err(e: &crate::Error) -> crate::Error {
    crate::Error::DegenerateInput(e.to_string())
}

fn unit_phase<R: Rng>(r: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, r.random_range(0.0..2.0 * PI))
}

/// One target on ULA, UCA and spiral arrays of every size `2..=64`.
pub fn single_target(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::stream(seed, rng::STREAM_SCENE);
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in 2..=64 {
        let arrays = [
            ArrayGeometry::ula(m, 0.5, 1.0)?,
            ArrayGeometry::uca(m, 0.5, 0.5)?,
            ArrayGeometry::spiral(m, 0.05, 1.0)?,
        ];
        for g in &arrays {
            let scene = TargetScene::new(vec![r.random_range(-PI / 2.0..PI / 2.0)], vec![unit_phase(&mut r)], vec![0.0], 1, 1e-3)?;
            let c = coherence_report(&data_matrix(g, g, &scene)?, None)?;
            worst = worst.max((c.mu_u - 1.0).abs()).max((c.mu_v - 1.0).abs());
            count += 1;
        }
    }
    Ok((worst <= 1e-10, format!("{count} arrays, max |mu - 1| = {worst:.2e}")))
}

/// A random ULA-pair instance with its measured and bounded coherence.
#[derive(Debug, Clone)]
pub struct BoundInstance {
    pub m_t: usize,
    pub m_r: usize,
    pub k: usize,
    pub measured: CoherenceReport,
    pub bound: UlaBoundReport,
    /// Smallest eigenvalues of `X_tᴴX_t` and `X_rᴴX_r`.
    pub gram_min: [f64; 2],
}

pub const BOUND_INSTANCES: usize = 500;

/// `K ∈ 2..=5`, `M_t, M_r ∈ 8..=64`, `d = λ/2`, distinct sines.
pub fn bound_instances(seed: u64) -> Result<Vec<BoundInstance>> {
    map_trials(BOUND_INSTANCES, |i| {
        let s = derive_seed(seed, i as u64);
        let mut r = rng::stream(s, rng::STREAM_MATRIX);
        let k = r.random_range(2..=5);
        let m_t = r.random_range(8..=64);
        let m_r = r.random_range(8..=64);
        let scene = draw_scene(k, 1e-12, 0.5, s)?;
        let tx = ArrayGeometry::ula(m_t, 0.5, 1.0)?;
        let rx = ArrayGeometry::ula(m_r, 0.5, 1.0)?;
        let measured = coherence_report(&data_matrix(&tx, &rx, &scene)?, None)?;
        let bound = ula_bounds_for_scene(&tx, &rx, scene.angles())?;
        let gram = |g: &ArrayGeometry| -> Result<f64> {
            let x = steering_matrix(g, scene.angles())?;
            Ok(hermitian_eigenvalues(&(x.adjoint() * &x))?[0])
        };
        Ok(BoundInstance {
            m_t,
            m_r,
            k,
            measured,
            bound,
            gram_min: [gram(&tx)?, gram(&rx)?],
        })
    })
}

/// Measured `μ(U)`, `μ(V)`, `μ₁` never exceed the bounds on feasible instances.
pub fn bound_validity(inst: &[BoundInstance], beta_scale: f64) -> Result<(bool, String)> {
    let mut feasible = 0;
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for b in inst {
        let (Some(bt), Some(br)) = (b.bound.beta_t, b.bound.beta_r) else {
            continue;
        };
        let mb = mu_bounds_from_betas(b.m_t, b.m_r, b.k, bt * beta_scale, br * beta_scale);
        let (Some(mu0), Some(mu1)) = (mb.mu0, mb.mu1) else {
            continue;
        };
        feasible += 1;
        let margin = (mu0 - b.measured.mu0()).min(mu1 - b.measured.mu1);
        min_margin = min_margin.min(margin);
        if margin < -1e-9 {
            violations += 1;
        }
    }
    Ok((
        violations == 0 && feasible > 0,
        format!("{feasible}/{} feasible, {violations} violations, min margin {min_margin:.3e}", inst.len()),
    ))
}

/// `μ_s ≤ μ` and `μ₁ ≤ μ√r` on every instance.
pub fn strong_chain(inst: &[BoundInstance]) -> Result<(bool, String)> {
    let mut bad = 0;
    let mut worst = f64::NEG_INFINITY;
    for b in inst {
        let m = &b.measured;
        let d1 = m.mu_strong() - m.mu0();
        let d2 = m.mu1 - m.mu0() * (m.rank as f64).sqrt();
        worst = worst.max(d1).max(d2);
        if d1 > 1e-9 || d2 > 1e-9 {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{} instances, {bad} violations, max excess {worst:.3e}", inst.len())))
}

/// `λ_min(XᴴX) ≥ M − (K−1)√β` on each side of the feasible instances.
pub fn gram_bound(inst: &[BoundInstance]) -> Result<(bool, String)> {
    let mut checked = 0;
    let mut bad = 0;
    let mut min_margin = f64::INFINITY;
    for b in inst.iter().filter(|b| b.bound.feasible) {
        let (Some(bt), Some(br)) = (b.bound.beta_t, b.bound.beta_r) else {
            continue;
        };
        for (m, beta, lam) in [(b.m_t, bt, b.gram_min[0]), (b.m_r, br, b.gram_min[1])] {
            let margin = lam - (m as f64 - (b.k - 1) as f64 * beta.sqrt());
            min_margin = min_margin.min(margin);
            checked += 1;
            if margin < -1e-6 {
                bad += 1;
            }
        }
    }
    Ok((bad == 0 && checked > 0, format!("{checked} sides, {bad} violations, min margin {min_margin:.3e}")))
}

pub const FIXED_SCENE_DEG: [f64; 4] = [-40.0, -10.0, 20.0, 50.0];

/// Fixed four-target scene: the bound curve never increases past `M = 20` and
/// the measured coherence at `M = 200` is within 0.05 of 1.
pub fn fixed_scene_sweep() -> Result<(bool, String)> {
    let angles: Vec<f64> = FIXED_SCENE_DEG.iter().map(|d| d.to_radians()).collect();
    let xi = min_separation_xi(0.5, &angles)?;
    let scene = TargetScene::from_angles(angles.clone())?;
    let mut bounds = Vec::new();
    for m in 20..=200 {
        let g = ArrayGeometry::ula(m, 0.5, 1.0)?;
        bounds.push(ula_bounds_for_scene(&g, &g, &angles)?.mu0_bound);
    }
    let feasible_from = bounds.iter().position(Option::is_some);
    let curve: Vec<f64> = bounds.iter().flatten().copied().collect();
    let rises = curve.windows(2).filter(|w| w[1] > w[0] + 1e-6).count();
    let measured = |m: usize| -> Result<f64> {
        let g = ArrayGeometry::ula(m, 0.5, 1.0)?;
        Ok(coherence_report(&data_matrix(&g, &g, &scene)?, None)?.mu0())
    };
    let mu200 = measured(200)?;
    // the measured curve is reported, not gated: it oscillates with the kernel sidelobes
    let samples: Vec<f64> = (20..=200).step_by(10).map(measured).collect::<Result<_>>()?;
    let measured_rises = samples.windows(2).filter(|w| w[1] > w[0] + 1e-6).count();
    let ok = xi >= 0.1 && feasible_from == Some(0) && rises == 0 && (mu200 - 1.0).abs() <= 0.05;
    Ok((
        ok,
        format!(
            "xi = {xi:.4}, bound rises {rises} over M = 20..200, mu(200) = {mu200:.5}, bound(200) = {:.5}, measured rises {measured_rises}/18",
            curve.last().copied().unwrap_or(f64::NAN)
        ),
    ))
}

/// Monte Carlo minimum of the wrapped sine gap over the separated band, boundary included.
pub fn separation_closed_form(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::stream(seed, rng::STREAM_MASK);
    let h = PI / 2.0;
    let f = |x: f64, y: f64| wrap_g(0.5 * (x.sin() - y.sin()).abs());
    let mut ok = true;
    let mut notes = Vec::new();
    for eta in [0.2, 0.5, 1.0, PI / 2.0] {
        let set = AdmissibleSet::separated_band(eta)?;
        let closed = lemma2_xi(eta)?;
        let mut best = f64::INFINITY;
        // draw the gap, then the position; at eta = pi/2 the band has no area
        for _ in 0..100_000 {
            let gap = r.random_range(eta..=PI - eta);
            let x = r.random_range(-h..=h - gap);
            let (a, b) = if r.random_bool(0.5) { (x, x + gap) } else { (x + gap, x) };
            if set.contains(a, b) {
                best = best.min(f(a, b));
            }
        }
        // boundary: the two gap lines and the box edges
        let steps = 20_000;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            for gap in [eta, PI - eta] {
                let x = -h + t * (PI - gap);
                for (a, b) in [(x, x + gap), (x + gap, x)] {
                    if set.contains(a, b) {
                        best = best.min(f(a, b));
                    }
                }
            }
            let s = -h + t * PI;
            for (a, b) in [(s, h), (s, -h), (h, s), (-h, s)] {
                if set.contains(a, b) {
                    best = best.min(f(a, b));
                }
            }
        }
        let pass = best >= closed - 1e-9 && best <= closed + 1e-3;
        ok &= pass;
        notes.push(format!("eta {eta:.3}: min {best:.6} vs {closed:.6}"));
    }
    let top = (lemma2_xi(PI / 2.0)? - (2.0 - 2f64.sqrt()) / 2.0).abs();
    ok &= top <= 1e-12;
    notes.push(format!("eta pi/2 error {top:.1e}"));
    Ok((ok, notes.join(", ")))
}

/// Duplicating a target leaves both subspace coherences unchanged.
pub fn duplicate_angles(seed: u64) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let s = derive_seed(seed ^ 0xD0D0, i);
        let mut r = rng::stream(s, rng::STREAM_MATRIX);
        let k = r.random_range(2..=4);
        let base = draw_scene(k, 0.05, 0.5, s)?;
        let dup = r.random_range(0..k);
        let mut angles = base.angles().to_vec();
        let mut refl = base.reflections().to_vec();
        angles.push(angles[dup]);
        refl.push(unit_phase(&mut r));
        let full = TargetScene::new(angles, refl, vec![0.0; k + 1], 1, 1e-3)?;
        let distinct = dedup_angles(&full, 0.0)?;
        let g = if i % 2 == 0 {
            ArrayGeometry::ula(16, 0.5, 1.0)?
        } else {
            ArrayGeometry::uca(12, 0.5, 0.5)?
        };
        let a = coherence_report(&data_matrix(&g, &g, &full)?, None)?;
        let b = coherence_report(&data_matrix(&g, &g, &distinct)?, None)?;
        if a.rank != b.rank {
            return Ok((false, format!("scene {i}: rank {} vs {}", a.rank, b.rank)));
        }
        worst = worst.max((a.mu_u - b.mu_u).abs()).max((a.mu_v - b.mu_v).abs());
    }
    Ok((worst <= 1e-8, format!("100 scenes, max difference {worst:.2e}")))
}

fn random_hermitian<R: Rng>(n: usize, r: &mut R) -> ComplexMatrix {
    let mut g = || -> f64 { StandardNormal.sample(r) };
    let a = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(g(), g()));
    ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()))
}

fn diag(v: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { Complex64::new(v[i], 0.0) } else { Complex64::ZERO })
}

/// Extreme eigenvalues lie inside the trace brackets; one-outlier spectra attain the wide ends.
pub fn eigen_brackets(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::stream(seed, rng::STREAM_NOISE);
    let mut misses = 0;
    for i in 0..1000 {
        let m = random_hermitian(1 + i % 8, &mut r);
        let b = wolkowicz_brackets(&m)?;
        let ev = hermitian_eigenvalues(&m)?;
        let slack = 1e-9 * (1.0 + b.tau.abs() + b.s);
        if !b.contains_min(ev[0], slack) || !b.contains_max(ev[ev.len() - 1], slack) {
            misses += 1;
        }
    }
    let mut tight = 0.0f64;
    for n in 2..=8 {
        let (a, bb) = (r.random_range(-3.0..0.0), r.random_range(0.5..4.0));
        let mut v = vec![bb; n];
        v[0] = a;
        tight = tight.max((wolkowicz_brackets(&diag(&v))?.lambda_min_lo - a).abs());
        v[0] = bb + 5.0;
        tight = tight.max((wolkowicz_brackets(&diag(&v))?.lambda_max_hi - v[0]).abs());
    }
    Ok((
        misses == 0 && tight <= 1e-10,
        format!("1000 matrices, {misses} outside, equality-case error {tight:.1e}"),
    ))
}

/// ULA kernel through the general-array search matches the one-dimensional
/// bracket; the circular-array surface peaks on the diagonal and is `2π`-periodic.
pub fn general_kernel() -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    let ula = ArrayGeometry::ula(16, 0.5, 1.0)?;
    for eta in [0.5, 1.0] {
        let g = general_beta(&ula, &AdmissibleSet::separated_band(eta)?, 0.05)?;
        let one = beta_sup_finite_bracket(16, lemma2_xi(eta)?)?;
        let overlap = g.lower <= one.upper + 1e-9 && one.lower <= g.upper + 1e-9;
        let gap = (g.upper - g.lower) / g.upper;
        ok &= overlap && g.converged && gap <= 1e-3;
        notes.push(format!("eta {eta}: [{:.6}, {:.6}] vs [{:.6}, {:.6}]", g.lower, g.upper, one.lower, one.upper));
    }
    let uca = ArrayGeometry::uca(20, 0.5, 0.5)?;
    let axis = surface_axis(201);
    let mut diag_err = 0.0f64;
    let mut period_err = 0.0f64;
    for &x in &axis {
        diag_err = diag_err.max((phi_general(&uca, x, x) - 400.0).abs());
        for &y in &axis {
            let v = phi_general(&uca, x, y);
            period_err = period_err
                .max((v - phi_general(&uca, x + 2.0 * PI, y)).abs())
                .max((v - phi_general(&uca, x, y + 2.0 * PI)).abs());
        }
    }
    ok &= diag_err <= 1e-9 && period_err <= 1e-9;
    notes.push(format!("UCA diagonal error {diag_err:.1e}, period error {period_err:.1e}"));
    Ok((ok, notes.join(", ")))
}

fn wilson(successes: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = successes as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    (centre - half, centre + half)
}

/// Success counts may dip once, and only within overlapping 95% intervals.
pub fn monotone_within_noise(successes: &[usize], n: usize) -> bool {
    let mut dips = 0;
    for w in successes.windows(2) {
        if w[1] < w[0] {
            let (lo_prev, _) = wilson(w[0], n);
            let (_, hi_next) = wilson(w[1], n);
            if hi_next < lo_prev {
                return false;
            }
            dips += 1;
        }
    }
    dips <= 1
}

fn rank_one_instance(seed: u64, n: usize) -> ComplexMatrix {
    let mut r = rng::stream(seed, rng::STREAM_MATRIX);
    let a: Vec<Complex64> = (0..n).map(|_| unit_phase(&mut r)).collect();
    let b: Vec<Complex64> = (0..n).map(|_| unit_phase(&mut r)).collect();
    ComplexMatrix::from_fn(n, n, |i, j| a[i] * b[j])
}

pub const PHASE_M: usize = 64;
pub const PHASE_K: usize = 3;

/// `M = 64`, `K = 3` ULA pair, scenes with `ξ ≥ 0.1`: `(m, successes, mean error)` per grid point.
pub fn phase_sweep(seed: u64, grid: &[usize], trials: usize) -> Result<Vec<(usize, usize, f64)>> {
    let g = ArrayGeometry::ula(PHASE_M, 0.5, 1.0)?;
    let mut out = Vec::new();
    for &m in grid {
        let errs = map_trials(trials, |t| {
            let s = derive_seed(seed, t as u64);
            let truth = data_matrix(&g, &g, &draw_scene(PHASE_K, 0.1, 0.5, s)?)?;
            let mask = sample_uniform(PHASE_M, PHASE_M, m, derive_seed(s, m as u64))?;
            let obs = PartialObservation::noiseless(&truth, mask)?;
            let res = svt_complete(&obs, &SolverParams::for_observation(&obs))?;
            Ok(recovery_error(&truth, &res.estimate)?.rel_frob)
        })?;
        let ok = errs.iter().filter(|&&e| e <= SUCCESS_REL_ERR).count();
        out.push((m, ok, errs.iter().sum::<f64>() / trials as f64));
    }
    Ok(out)
}

pub fn noiseless_completion(opts: &AcceptanceOptions) -> Result<(bool, String)> {
    let mut notes = Vec::new();
    // rank-1 unit-modulus 8x8 at 60%
    let recovered = map_trials(50, |i| {
        let s = derive_seed(opts.seed ^ 0x8888, i as u64);
        let truth = rank_one_instance(s, 8);
        let obs = PartialObservation::noiseless(&truth, sample_uniform(8, 8, 39, s)?)?;
        let res = svt_complete(&obs, &SolverParams::for_observation(&obs).with_tol(1e-5))?;
        Ok(recovery_error(&truth, &res.estimate)?.rel_frob <= 1e-4)
    })?;
    let small = recovered.iter().filter(|&&b| b).count();
    let mut ok = small >= 48;
    notes.push(format!("8x8 rank-1: {small}/50"));
    // full observation
    let mut full_err = 0.0f64;
    for i in 0..5u64 {
        let s = derive_seed(opts.seed ^ 0xF011, i);
        let g = ArrayGeometry::ula(24, 0.5, 1.0)?;
        let truth = data_matrix(&g, &g, &draw_scene(3, 0.05, 0.5, s)?)?;
        let obs = PartialObservation::noiseless(&truth, sample_uniform(24, 24, 576, s)?)?;
        let p = SolverParams::for_observation(&obs);
        let res = svt_complete(&obs, &p)?;
        full_err = full_err.max(recovery_error(&truth, &res.estimate)?.rel_frob / p.rel_stop_tol);
    }
    ok &= full_err <= 1.0;
    notes.push(format!("full mask error/tol {full_err:.3}"));
    if opts.phase_sweep {
        let rows = phase_sweep(opts.seed, &opts.phase_grid, opts.phase_trials)?;
        let succ: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let mono = monotone_within_noise(&succ, opts.phase_trials);
        let reach = rows
            .iter()
            .find(|r| r.1 as f64 >= 0.95 * opts.phase_trials as f64 && r.0 * 2 <= PHASE_M * PHASE_M)
            .map(|r| r.0);
        ok &= mono && reach.is_some();
        let counts: Vec<String> = rows.iter().map(|r| format!("{}:{}", r.0, r.1)).collect();
        notes.push(format!(
            "M=64 sweep [{}] monotone {mono}, 95% at m = {}",
            counts.join(" "),
            reach.map_or("none".into(), |m| m.to_string())
        ));
    }
    Ok((ok, notes.join(", ")))
}

/// When the noiseless instance recovers, the noisy error obeys the stability bound.
pub fn noisy_stability(seed: u64) -> Result<(bool, String)> {
    let n = 16;
    let m = 179;
    let g = ArrayGeometry::ula(n, 0.5, 1.0)?;
    let rows = map_trials(20, |i| {
        let s = derive_seed(seed ^ 0x5757, i as u64);
        let truth = data_matrix(&g, &g, &draw_scene(2, 0.05, 0.5, s)?)?;
        let mask = sample_uniform(n, n, m, s)?;
        let clean = PartialObservation::noiseless(&truth, mask.clone())?;
        let exact = svt_complete(&clean, &SolverParams::for_observation(&clean))?;
        if recovery_error(&truth, &exact.estimate)?.rel_frob > SUCCESS_REL_ERR {
            return Ok(None);
        }
        let noisy = observe(&truth, &mask, 0.05, s)?;
        let delta = noisy.noise_level();
        let res = noisy_complete(&noisy, delta, &SolverParams::for_observation(&noisy))?;
        let err = recovery_error(&truth, &res.estimate)?.abs_frob;
        Ok(Some((err, stability_bound(n, n, m, delta)?, res.converged)))
    })?;
    let eligible: Vec<_> = rows.iter().flatten().collect();
    let bad = eligible.iter().filter(|(e, b, c)| e > b || !c).count();
    let ratio = eligible.iter().map(|(e, b, _)| e / b).fold(0.0, f64::max);
    let formula = stability_bound(10, 10, 50, 0.1)?;
    let ok = !eligible.is_empty() && bad == 0 && (formula - 3.0284).abs() <= 1e-3;
    Ok((
        ok,
        format!(
            "{} eligible of 20, {bad} violations, max error/bound {ratio:.3}, bound(10,10,50,0.1) = {formula:.4}",
            eligible.len()
        ),
    ))
}

/// The sample-count formulas against an independent log-domain evaluation.
/// The constants are unknown, so only the arithmetic is checked.
pub fn sample_formulas() -> Result<(bool, String)> {
    let k = SampleConstants::default();
    let mut worst = 0.0f64;
    for &(n, r, mu0, mu1, mu) in &[
        (64usize, 3usize, 1.2, 2.0, 1.7),
        (200, 4, 2.0, 3.0, 2.5),
        (32, 1, 1.0, 1.0, 1.0),
        (1000, 10, 1.5, 4.0, 3.0),
    ] {
        let t = sample_requirement(n, r, mu0, mu1, mu, &k)?;
        let (ln_n, lnln) = ((n as f64).ln(), (n as f64).ln().ln());
        let (lr, lb) = ((r as f64).ln(), k.beta.ln());
        let lead = (2.0 * f64::ln(mu1)).max(0.5 * f64::ln(mu0) + f64::ln(mu1)).max(f64::ln(mu0) + 0.25 * ln_n);
        let general = (lead + ln_n + lr + lb + lnln).exp();
        let improved = (f64::ln(mu0) + 1.2 * ln_n + lr + lb + lnln).exp();
        let first = (4.0 * f64::ln(mu) + ln_n + 2.0 * lr + 2.0 * lnln).exp();
        let second = (2.0 * f64::ln(mu) + ln_n + lr + 6.0 * lnln).exp();
        for (a, b) in [(t.general, general), (t.improved, improved), (t.strong_first, first), (t.strong_second, second)] {
            worst = worst.max((a - b).abs() / b);
        }
    }
    let (a, b) = target_sample_counts(PHASE_K, PHASE_M, &k)?;
    let lm = (PHASE_M as f64).ln();
    let kk = PHASE_K as f64;
    worst = worst
        .max((a - kk.powi(4) * PHASE_M as f64 * lm * lm).abs() / a)
        .max((b - kk * kk * PHASE_M as f64 * lm.powi(6)).abs() / b);
    Ok((
        worst <= 1e-12,
        format!("max relative error {worst:.1e}; unit-constant counts at M=64, K=3: {a:.0}, {b:.0} (guarantees at the true constants not checked)"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_sanity() {
        let (lo, hi) = wilson(25, 50);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        let (lo, hi) = wilson(50, 50);
        assert!(hi <= 1.0 + 1e-12 && lo > 0.9);
    }

    #[test]
    fn monotone_check() {
        assert!(monotone_within_noise(&[0, 3, 40, 49, 50], 50));
        assert!(monotone_within_noise(&[0, 10, 48, 47, 50], 50));
        assert!(!monotone_within_noise(&[0, 10, 48, 47, 46, 50], 50));
        assert!(!monotone_within_noise(&[0, 45, 10, 50], 50));
    }
}
