//! Experiment drivers. Each returns a [`CsvTable`] (or a key-value report)
//! that depends only on the config, including its seed.

pub mod acceptance;

use std::f64::consts::PI;

use crate::bounds::{
    general_bounds, lemma2_xi, mu_bounds_from_betas, phi_general, ula_bounds, ula_bounds_for_scene,
    AdmissibleSet,
};
use crate::coherence::coherence_report;
use crate::config::{BoundSet, ExperimentConfig};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ArrayKind};
use crate::rng::derive_seed;
use crate::signal::{data_matrix, observe, sample_uniform, ComplexMatrix, PartialObservation};
use crate::solver::{noisy_complete, recovery_error, svt_complete, CompletionResult};
use crate::textio::CsvTable;

pub use acceptance::{run_acceptance, AcceptanceOptions, AcceptanceReport, CriterionResult};

/// Success threshold on the relative Frobenius error.
pub const SUCCESS_REL_ERR: f64 = 1e-3;

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Runs `f(0..n)` (in parallel with the `parallel` feature) and returns results in index order.
pub fn map_trials<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn table(cfg: &ExperimentConfig, columns: &[&str]) -> CsvTable {
    CsvTable::new(cfg.hash(), cfg.seed, columns)
}

fn sweep_values(cfg: &ExperimentConfig) -> Result<&[usize]> {
    if cfg.sweep.values.is_empty() {
        return Err(cfg_err("sweep.values is empty"));
    }
    Ok(&cfg.sweep.values)
}

/// Largest kernel value over the scene's ordered target pairs.
pub fn scene_beta(geom: &ArrayGeometry, angles: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for (i, &a) in angles.iter().enumerate() {
        for (j, &b) in angles.iter().enumerate() {
            if i != j {
                best = best.max(phi_general(geom, a, b));
            }
        }
    }
    best
}

/// `μ₀` bound for a concrete pair and scene: the ULA formula when both sides
/// are ULAs, otherwise the pairwise kernel maximum.
pub fn scene_mu0_bound(tx: &ArrayGeometry, rx: &ArrayGeometry, angles: &[f64]) -> Result<Option<f64>> {
    if tx.kind() == ArrayKind::Ula && rx.kind() == ArrayKind::Ula {
        return Ok(ula_bounds_for_scene(tx, rx, angles)?.mu0_bound);
    }
    let k = angles.len();
    Ok(mu_bounds_from_betas(tx.len(), rx.len(), k, scene_beta(tx, angles), scene_beta(rx, angles)).mu0)
}

fn fmt_bound(b: Option<f64>) -> String {
    b.map_or_else(|| "infeasible".to_string(), |v| v.to_string())
}

/// Rows `M,mu_measured,mu0_bound` for a fixed scene, resizing both arrays to `M`.
pub fn run_coherence_sweep(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let scene = cfg.scene_for(derive_seed(cfg.seed, 0))?;
    let mut out = table(cfg, &["M", "mu_measured", "mu0_bound"]);
    for &m in sweep_values(cfg)? {
        let tx = cfg.tx_geometry(Some(m))?;
        let rx = cfg.rx_geometry(Some(m))?;
        let delta = data_matrix(&tx, &rx, &scene)?;
        let measured = coherence_report(&delta, None)?.mu0();
        let bound = scene_mu0_bound(&tx, &rx, scene.angles())?;
        out.push(vec![m.to_string(), measured.to_string(), fmt_bound(bound)]);
    }
    Ok(out)
}

/// Rows `eta,M,mu0_bound` with `ξ = 1 − cos(η/2)` on both sides.
pub fn run_eta_sweep(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let k = cfg.num_targets()?;
    if cfg.sweep.etas.is_empty() {
        return Err(cfg_err("sweep.etas is empty"));
    }
    let ms = sweep_values(cfg)?;
    let mut out = table(cfg, &["eta", "M", "mu0_bound"]);
    for &eta in &cfg.sweep.etas {
        let xi = lemma2_xi(eta).map_err(|e| cfg_err(e.to_string()))?;
        for &m in ms {
            let r = ula_bounds(m, m, k, xi, xi)?;
            out.push(vec![eta.to_string(), m.to_string(), fmt_bound(r.mu0_bound)]);
        }
    }
    Ok(out)
}

/// Grid coordinates `−π + 2πi/(n−1)`, `i = 0..n`.
pub fn surface_axis(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64).collect()
}

/// Rows `x,y,value` of the transmit array's kernel over `[−π, π]²`.
pub fn run_surface(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let n = cfg.sweep.resolution.unwrap_or(101);
    if n < 2 {
        return Err(cfg_err("surface resolution must be at least 2"));
    }
    let geom = cfg.tx_geometry(None)?;
    let axis = surface_axis(n);
    let mut out = table(cfg, &["x", "y", "value"]);
    for &x in &axis {
        for &y in &axis {
            out.push(vec![x.to_string(), y.to_string(), phi_general(&geom, x, y).to_string()]);
        }
    }
    Ok(out)
}

/// One noiseless (or noisy, with `noise_std > 0`) completion instance.
pub struct Instance {
    pub truth: ComplexMatrix,
    pub obs: PartialObservation,
}

/// Builds the instance for `trial` with `m` samples. The scene depends only on
/// the trial, so every `m` sees the same `Δ`.
pub fn make_instance(cfg: &ExperimentConfig, trial: usize, m: usize) -> Result<Instance> {
    let trial_seed = derive_seed(cfg.seed, trial as u64);
    let scene = cfg.scene_for(trial_seed)?;
    let tx = cfg.tx_geometry(None)?;
    let rx = cfg.rx_geometry(None)?;
    let truth = data_matrix(&tx, &rx, &scene)?;
    let (r, c) = truth.shape();
    if m == 0 || m > r * c {
        return Err(cfg_err(format!("sample count {m} outside 1..={}", r * c)));
    }
    let mask = sample_uniform(r, c, m, derive_seed(trial_seed, m as u64))?;
    let obs = observe(&truth, &mask, cfg.noise_std, derive_seed(trial_seed, u64::MAX - m as u64))?;
    Ok(Instance { truth, obs })
}

/// Exact or noisy completion depending on the recorded noise level.
pub fn complete(cfg: &ExperimentConfig, obs: &PartialObservation) -> Result<CompletionResult> {
    let p = cfg.solver.params_for(obs)?;
    if obs.noise_level() > 0.0 {
        noisy_complete(obs, obs.noise_level(), &p)
    } else {
        svt_complete(obs, &p)
    }
}

/// Rows `m,trials,successes,mean_rel_err`.
pub fn run_recovery_phase(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let mut out = table(cfg, &["m", "trials", "successes", "mean_rel_err"]);
    for &m in sweep_values(cfg)? {
        let errs = map_trials(cfg.trials, |t| {
            let inst = make_instance(cfg, t, m)?;
            let r = complete(cfg, &inst.obs)?;
            Ok(recovery_error(&inst.truth, &r.estimate)?.rel_frob)
        })?;
        let successes = errs.iter().filter(|&&e| e <= SUCCESS_REL_ERR).count();
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        out.push(vec![
            m.to_string(),
            cfg.trials.to_string(),
            successes.to_string(),
            mean.to_string(),
        ]);
    }
    Ok(out)
}

/// Key-value bound report, followed by the measured coherence of `Δ` under `measured_` keys.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<String> {
    let tx = cfg.tx_geometry(None)?;
    let rx = cfg.rx_geometry(None)?;
    let scene = cfg.scene_for(derive_seed(cfg.seed, 0))?;
    let k = scene.num_targets();
    let both_ula = tx.kind() == ArrayKind::Ula && rx.kind() == ArrayKind::Ula;
    let eta = || cfg.bounds.eta.ok_or_else(|| cfg_err("bounds.eta is required for this set"));
    let mut out = match cfg.bounds.set {
        BoundSet::Scene if both_ula => ula_bounds_for_scene(&tx, &rx, scene.angles())?.to_string(),
        BoundSet::Scene => {
            let (bt, br) = (scene_beta(&tx, scene.angles()), scene_beta(&rx, scene.angles()));
            let mb = mu_bounds_from_betas(tx.len(), rx.len(), k, bt, br);
            format!(
                "k={k}\nbeta_t={bt}\nbeta_r={br}\nmu0_bound={}\nmu1_bound={}\nk_max={}\nfeasible={}\n",
                crate::bounds::fmt_opt(mb.mu0),
                crate::bounds::fmt_opt(mb.mu1),
                mb.k_max,
                mb.feasible
            )
        }
        BoundSet::SeparatedBand if both_ula && tx.spacing_over_wavelength() == Some(0.5) && rx.spacing_over_wavelength() == Some(0.5) => {
            let xi = lemma2_xi(eta()?).map_err(|e| cfg_err(e.to_string()))?;
            ula_bounds(tx.len(), rx.len(), k, xi, xi)?.to_string()
        }
        set => {
            let a = match set {
                BoundSet::SeparatedBand => AdmissibleSet::separated_band(eta()?),
                _ => AdmissibleSet::separated(eta()?),
            }
            .map_err(|e| cfg_err(e.to_string()))?;
            general_bounds(&tx, &rx, k, &a, cfg.bounds.resolution)?.to_string()
        }
    };
    let measured = coherence_report(&data_matrix(&tx, &rx, &scene)?, None)?;
    for line in measured.to_string().lines() {
        out.push_str("measured_");
        out.push_str(line);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        let base = format!(
            "kind = \"coherence-sweep\"\nseed = 11\n{extra}\n[tx]\nkind = \"ula\"\ncount = 16\nspacing = 0.5\nwavelength = 1.0\n"
        );
        ExperimentConfig::from_toml(&base).unwrap()
    }

    #[test]
    fn single_target_sweep_is_all_ones() {
        let mut c = cfg("[scene]\nangles_deg = [12.0]\n[sweep]\nvalues = [4, 9, 30]");
        c.kind = crate::config::ExperimentKind::CoherenceSweep;
        let t = run_coherence_sweep(&c).unwrap();
        for row in &t.rows {
            assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(row[2], "1");
        }
    }

    #[test]
    fn sweep_is_deterministic_and_marks_infeasible() {
        let c = cfg("[scene]\nangles_deg = [-40.0, -10.0, 20.0, 50.0]\n[sweep]\nvalues = [3, 20, 40]");
        let a = run_coherence_sweep(&c).unwrap().render();
        assert_eq!(a, run_coherence_sweep(&c).unwrap().render());
        let t = CsvTable::parse(&a).unwrap();
        assert_eq!(t.columns, ["M", "mu_measured", "mu0_bound"]);
        assert_eq!(t.rows[0][2], "infeasible");
        for row in &t.rows[1..] {
            let (mu, b): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
            assert!(mu <= b + 1e-9);
        }
    }

    #[test]
    fn eta_sweep_orders_curves() {
        let c = cfg("[random_scene]\ntargets = 3\n[sweep]\nvalues = [40, 80]\netas = [0.5, 1.0]");
        let t = run_eta_sweep(&c).unwrap();
        assert_eq!(t.rows.len(), 4);
        let v: Vec<f64> = t.column("mu0_bound").unwrap().iter().map(|s| s.parse().unwrap()).collect();
        assert!(v[2] <= v[0] && v[3] <= v[1]);
    }

    #[test]
    fn surface_diagonal_and_edges() {
        let c = cfg("[sweep]\nresolution = 9");
        let t = run_surface(&c).unwrap();
        assert_eq!(t.rows.len(), 81);
        for i in 0..9 {
            let v: f64 = t.rows[i * 9 + i][2].parse().unwrap();
            assert!((v - 256.0).abs() < 1e-9);
        }
    }

    #[test]
    fn full_sampling_always_recovers() {
        let c = cfg("trials = 3\n[random_scene]\ntargets = 2\n[sweep]\nvalues = [256]");
        let t = run_recovery_phase(&c).unwrap();
        assert_eq!(t.rows[0][2], "3");
    }

    #[test]
    fn bounds_report_has_measured_keys() {
        let c = cfg("[scene]\nangles_deg = [-30.0, 25.0]");
        let kv = crate::textio::parse_kv(&run_bounds(&c).unwrap()).unwrap();
        let mu: f64 = kv["measured_mu_u"].parse().unwrap();
        let b: f64 = kv["mu0_bound"].parse().unwrap();
        assert!(mu <= b);
    }
}
