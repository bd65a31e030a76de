//! TOML experiment configuration.
//!
//! ```toml
//! kind = "coherence-sweep"
//! seed = 7
//! trials = 1
//!
//! [tx]
//! kind = "ula"
//! count = 10
//! spacing = 0.5
//! wavelength = 1.0
//!
//! [scene]
//! angles_deg = [-40.0, -10.0, 20.0, 50.0]
//!
//! [sweep]
//! values = [10, 20, 40, 80]
//! ```
//!
//! `rx` defaults to `tx`. Angles are in degrees, `etas` in radians, reflections
//! are `[re, im]` pairs. Any key can be overridden with `key.path=value`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::min_separation_xi;
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ArrayKind, TargetScene, DEFAULT_SPIRAL_STEP};
use crate::rng;
use crate::signal::PartialObservation;
use crate::solver::{SolverParams, Variant, DEFAULT_MAX_ITERS, DEFAULT_REL_STOP_TOL};

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CoherenceSweep,
    EtaSweep,
    Surface,
    RecoveryPhase,
    Bounds,
    Complete,
    Acceptance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub kind: ArrayKind,
    #[serde(default)]
    pub count: Option<usize>,
    /// ULA element spacing (meters).
    #[serde(default)]
    pub spacing: Option<f64>,
    /// UCA radius (meters).
    #[serde(default)]
    pub radius: Option<f64>,
    /// Spiral growth per radian (meters).
    #[serde(default)]
    pub turn_spacing: Option<f64>,
    #[serde(default)]
    pub angle_step: Option<f64>,
    /// Explicit coordinates for `custom` arrays.
    #[serde(default)]
    pub positions: Option<Vec<[f64; 2]>>,
    pub wavelength: f64,
}

impl GeometrySpec {
    pub fn ula(count: usize, spacing: f64, wavelength: f64) -> Self {
        Self {
            kind: ArrayKind::Ula,
            count: Some(count),
            spacing: Some(spacing),
            radius: None,
            turn_spacing: None,
            angle_step: None,
            positions: None,
            wavelength,
        }
    }

    pub fn build(&self) -> Result<ArrayGeometry> {
        self.build_with_count(None)
    }

    /// Builds the array, replacing the element count when `count` is given.
    pub fn build_with_count(&self, count: Option<usize>) -> Result<ArrayGeometry> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| cfg_err(format!("{:?} array needs '{name}'", self.kind)));
        let n = || {
            count
                .or(self.count)
                .ok_or_else(|| cfg_err("array needs 'count'"))
        };
        match self.kind {
            ArrayKind::Ula => ArrayGeometry::ula(n()?, need(self.spacing, "spacing")?, self.wavelength),
            ArrayKind::Uca => ArrayGeometry::uca(n()?, need(self.radius, "radius")?, self.wavelength),
            ArrayKind::Spiral => ArrayGeometry::spiral_with_step(
                n()?,
                need(self.turn_spacing, "turn_spacing")?,
                self.angle_step.unwrap_or(DEFAULT_SPIRAL_STEP),
                self.wavelength,
            ),
            ArrayKind::Custom => {
                if count.is_some() {
                    return Err(cfg_err("custom arrays cannot be resized by a sweep"));
                }
                let p = self
                    .positions
                    .clone()
                    .ok_or_else(|| cfg_err("custom array needs 'positions'"))?;
                ArrayGeometry::custom(p, self.wavelength)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub angles_deg: Vec<f64>,
    #[serde(default)]
    pub reflections: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub speeds: Option<Vec<f64>>,
    #[serde(default = "one_u32")]
    pub pulse_index: u32,
    #[serde(default = "default_pri")]
    pub pulse_repetition: f64,
}

fn one_u32() -> u32 {
    1
}

fn default_pri() -> f64 {
    1e-3
}

impl SceneSpec {
    pub fn build(&self) -> Result<TargetScene> {
        let k = self.angles_deg.len();
        let refl = match &self.reflections {
            Some(r) => r.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            None => vec![Complex64::new(1.0, 0.0); k],
        };
        let speeds = self.speeds.clone().unwrap_or_else(|| vec![0.0; k]);
        TargetScene::new(
            self.angles_deg.iter().map(|d| d.to_radians()).collect(),
            refl,
            speeds,
            self.pulse_index,
            self.pulse_repetition,
        )
    }
}

/// Random targets: angles uniform on `(−π/2, π/2)`, unit-modulus reflections with
/// uniform phase, redrawn until the pairwise separation reaches `min_xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSceneSpec {
    pub targets: usize,
    #[serde(default = "default_min_xi")]
    pub min_xi: f64,
}

fn default_min_xi() -> f64 {
    0.05
}

const MAX_SCENE_DRAWS: usize = 100_000;

impl RandomSceneSpec {
    /// Draws a scene. `spacing_over_lambda` sets the separation measure.
    pub fn draw(&self, seed: u64, spacing_over_lambda: f64) -> Result<TargetScene> {
        draw_scene(self.targets, self.min_xi, spacing_over_lambda, seed)
    }
}

pub fn draw_scene(k: usize, min_xi: f64, spacing_over_lambda: f64, seed: u64) -> Result<TargetScene> {
    if k == 0 {
        return Err(cfg_err("random scene needs at least one target"));
    }
    let mut r = rng::stream(seed, rng::STREAM_SCENE);
    for _ in 0..MAX_SCENE_DRAWS {
        let angles: Vec<f64> = (0..k).map(|_| r.random_range(-PI / 2.0..PI / 2.0)).collect();
        if k > 1 && min_separation_xi(spacing_over_lambda, &angles)? < min_xi {
            continue;
        }
        let refl = (0..k)
            .map(|_| Complex64::from_polar(1.0, r.random_range(0.0..2.0 * PI)))
            .collect();
        return TargetScene::new(angles, refl, vec![0.0; k], 1, default_pri());
    }
    Err(cfg_err(format!("no scene with {k} targets reached xi >= {min_xi}")))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Antenna counts (coherence and eta sweeps) or sample counts (recovery phase).
    #[serde(default)]
    pub values: Vec<usize>,
    /// Radians.
    #[serde(default)]
    pub etas: Vec<f64>,
    /// Surface grid points per axis.
    #[serde(default)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_variant")]
    pub variant: String,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub rel_stop_tol: f64,
    #[serde(default)]
    pub svd_rank_cap: Option<usize>,
}

fn default_variant() -> String {
    "augmented".into()
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

fn default_tol() -> f64 {
    DEFAULT_REL_STOP_TOL
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            variant: default_variant(),
            threshold: None,
            step: None,
            max_iters: DEFAULT_MAX_ITERS,
            rel_stop_tol: DEFAULT_REL_STOP_TOL,
            svd_rank_cap: None,
        }
    }
}

impl SolverSpec {
    /// Variant defaults for `obs`, then explicit overrides.
    pub fn params_for(&self, obs: &PartialObservation) -> Result<SolverParams> {
        let (r, c) = obs.shape();
        let mut p = match Variant::parse(&self.variant).map_err(|e| cfg_err(e.to_string()))? {
            Variant::Augmented => SolverParams::for_observation(obs),
            Variant::Classic => SolverParams::classic(r, c, obs.mask().len()),
        };
        if let Some(t) = self.threshold {
            p.threshold = t;
        }
        if let Some(s) = self.step {
            p.step = s;
        }
        p.max_iters = self.max_iters;
        p.rel_stop_tol = self.rel_stop_tol;
        p.svd_rank_cap = self.svd_rank_cap;
        p.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(p)
    }
}

/// Admissible set used by the `bounds` experiment for non-ULA arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSet {
    /// The configured target pairs.
    #[default]
    Scene,
    /// `η ≤ |y − x| ≤ π − η` on `[−π/2, π/2]²`.
    SeparatedBand,
    /// `η ≤ |y − x| ≤ π` on `[−π/2, π/2]²`.
    Separated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    #[serde(default)]
    pub set: BoundSet,
    #[serde(default)]
    pub eta: Option<f64>,
    /// Initial branch-and-bound cell size (radians).
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_resolution() -> f64 {
    0.05
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            set: BoundSet::Scene,
            eta: None,
            resolution: default_resolution(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub output: Option<String>,
    pub tx: GeometrySpec,
    #[serde(default)]
    pub rx: Option<GeometrySpec>,
    #[serde(default)]
    pub scene: Option<SceneSpec>,
    #[serde(default)]
    pub random_scene: Option<RandomSceneSpec>,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
    /// Per-entry noise standard deviation for generated observations.
    #[serde(default)]
    pub noise_std: f64,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        Self::from_toml_with(s, &[])
    }

    /// Parses `s` after applying `key.path=value` overrides. Values are read as
    /// TOML literals and fall back to strings.
    pub fn from_toml_with(s: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(s).map_err(|e| cfg_err(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = doc.try_into().map_err(|e: toml::de::Error| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(cfg_err("trials must be at least 1"));
        }
        if self.sweep.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(cfg_err("sweep values must be strictly increasing"));
        }
        if self.sweep.etas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(cfg_err("etas must be strictly increasing"));
        }
        if self.scene.is_some() && self.random_scene.is_some() {
            return Err(cfg_err("give either 'scene' or 'random_scene', not both"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(cfg_err("noise_std must be nonnegative"));
        }
        // sweeps may leave the count open; probe the other parameters with a small array
        for (side, spec) in [("tx", Some(&self.tx)), ("rx", self.rx.as_ref())] {
            let Some(spec) = spec else { continue };
            let probe = match spec.kind {
                ArrayKind::Custom => None,
                _ => Some(spec.count.unwrap_or(2)),
            };
            spec.build_with_count(probe).map_err(|e| match e {
                Error::Config(m) => cfg_err(format!("{side}: {m}")),
                e => cfg_err(format!("{side}: {e}")),
            })?;
        }
        Ok(())
    }

    pub fn tx_geometry(&self, count: Option<usize>) -> Result<ArrayGeometry> {
        self.tx.build_with_count(count)
    }

    pub fn rx_geometry(&self, count: Option<usize>) -> Result<ArrayGeometry> {
        self.rx.as_ref().unwrap_or(&self.tx).build_with_count(count)
    }

    /// Separation scale for random scenes: the ULA `d/λ`, or `1/2` otherwise.
    fn spacing_over_lambda(&self) -> f64 {
        self.tx
            .build()
            .ok()
            .and_then(|g| g.spacing_over_wavelength())
            .unwrap_or(0.5)
    }

    /// The fixed scene, or a random one drawn from `seed`.
    pub fn scene_for(&self, seed: u64) -> Result<TargetScene> {
        match (&self.scene, &self.random_scene) {
            (Some(s), _) => s.build(),
            (None, Some(r)) => r.draw(seed, self.spacing_over_lambda()),
            (None, None) => Err(cfg_err("config needs 'scene' or 'random_scene'")),
        }
    }

    pub fn num_targets(&self) -> Result<usize> {
        match (&self.scene, &self.random_scene) {
            (Some(s), _) => Ok(s.angles_deg.len()),
            (None, Some(r)) => Ok(r.targets),
            (None, None) => Err(cfg_err("config needs 'scene' or 'random_scene'")),
        }
    }
}

fn apply_override(doc: &mut toml::Table, o: &str) -> Result<()> {
    let (path, raw) = o
        .split_once('=')
        .ok_or_else(|| cfg_err(format!("override '{o}' is not key=value")))?;
    let value = parse_value(raw.trim());
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields one item");
    let mut table = doc;
    for k in parents {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| cfg_err(format!("'{k}' in '{path}' is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
kind = "coherence-sweep"
seed = 3
[tx]
kind = "ula"
count = 8
spacing = 0.5
wavelength = 1.0
[scene]
angles_deg = [-40.0, 20.0]
reflections = [[1.0, 0.0], [0.0, 2.0]]
[sweep]
values = [8, 16]
"#;

    #[test]
    fn parses_and_builds() {
        let c = ExperimentConfig::from_toml(BASE).unwrap();
        assert_eq!(c.kind, ExperimentKind::CoherenceSweep);
        let g = c.rx_geometry(Some(12)).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.spacing_over_wavelength(), Some(0.5));
        let s = c.scene_for(0).unwrap();
        assert!((s.angles()[0] + 40f64.to_radians()).abs() < 1e-15);
        assert_eq!(s.reflections()[1], Complex64::new(0.0, 2.0));
        assert_eq!(c.solver, SolverSpec::default());
    }

    #[test]
    fn overrides_and_hash() {
        let a = ExperimentConfig::from_toml(BASE).unwrap();
        let b = ExperimentConfig::from_toml_with(BASE, &["seed=4".into(), "tx.count=9".into()]).unwrap();
        assert_eq!(b.seed, 4);
        assert_eq!(b.tx.count, Some(9));
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), ExperimentConfig::from_toml(BASE).unwrap().hash());
        assert_eq!(a.hash().len(), 16);
        let c = ExperimentConfig::from_toml_with(BASE, &["solver.variant=classic".into()]).unwrap();
        assert_eq!(c.solver.variant, "classic");
    }

    #[test]
    fn rejects_bad_configs() {
        for o in ["trials=0", "sweep.values=[16, 8]", "bogus=1", "tx.kind=\"hex\""] {
            assert!(
                matches!(ExperimentConfig::from_toml_with(BASE, &[o.into()]), Err(Error::Config(_))),
                "{o}"
            );
        }
        assert!(ExperimentConfig::from_toml("kind = 3").is_err());
    }

    #[test]
    fn random_scene_respects_floor() {
        for seed in 0..20 {
            let s = draw_scene(4, 0.1, 0.5, seed).unwrap();
            assert!(min_separation_xi(0.5, s.angles()).unwrap() >= 0.1);
            assert!(s.reflections().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }
        assert_eq!(draw_scene(3, 0.1, 0.5, 5).unwrap(), draw_scene(3, 0.1, 0.5, 5).unwrap());
        assert!(draw_scene(12, 0.45, 0.5, 1).is_err());
    }
}
