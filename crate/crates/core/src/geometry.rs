//! Array topologies and target scenes.
//!
//! Antennas are indexed from 0. Angles are radians everywhere in the library;
//! degree conversion happens only when reading configuration files.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default angular step between consecutive spiral elements.
pub const DEFAULT_SPIRAL_STEP: f64 = 2.0 * PI / 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Ula,
    Uca,
    Spiral,
    Custom,
}

/// Planar antenna array: element coordinates in meters and the carrier wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<[f64; 2]>,
    wavelength: f64,
    kind: ArrayKind,
    /// Element spacing for ULAs, kept so the Vandermonde structure is recoverable.
    spacing: Option<f64>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be a positive finite number, got {v}")))
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("an array needs at least one antenna"));
    }
    Ok(())
}

impl ArrayGeometry {
    /// Uniform linear array along the y axis: element `l` sits at `(0, l * spacing)`.
    pub fn ula(num_antennas: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        check_count(num_antennas)?;
        check_positive("spacing", spacing)?;
        check_positive("wavelength", wavelength)?;
        let positions = (0..num_antennas)
            .map(|l| [0.0, l as f64 * spacing])
            .collect();
        Ok(Self {
            positions,
            wavelength,
            kind: ArrayKind::Ula,
            spacing: Some(spacing),
        })
    }

    /// Uniform circular array of radius `radius`; element `l` at angle `2πl/M`.
    pub fn uca(num_antennas: usize, radius: f64, wavelength: f64) -> Result<Self> {
        check_count(num_antennas)?;
        check_positive("radius", radius)?;
        check_positive("wavelength", wavelength)?;
        let m = num_antennas as f64;
        let positions = (0..num_antennas)
            .map(|l| {
                let a = 2.0 * PI * l as f64 / m;
                [radius * a.cos(), radius * a.sin()]
            })
            .collect();
        Ok(Self {
            positions,
            wavelength,
            kind: ArrayKind::Uca,
            spacing: None,
        })
    }

    /// Archimedean spiral `r = a·φ` sampled at `φ_l = l·Δφ` with the default step.
    pub fn spiral(num_antennas: usize, turn_spacing: f64, wavelength: f64) -> Result<Self> {
        Self::spiral_with_step(num_antennas, turn_spacing, DEFAULT_SPIRAL_STEP, wavelength)
    }

    /// Archimedean spiral with an explicit angular step.
    ///
    /// Experimental: uniform sampling in the spiral parameter, not in arc length.
    pub fn spiral_with_step(
        num_antennas: usize,
        turn_spacing: f64,
        angle_step: f64,
        wavelength: f64,
    ) -> Result<Self> {
        check_count(num_antennas)?;
        check_positive("turn_spacing", turn_spacing)?;
        check_positive("angle_step", angle_step)?;
        check_positive("wavelength", wavelength)?;
        let positions = (0..num_antennas)
            .map(|l| {
                let phi = l as f64 * angle_step;
                let r = turn_spacing * phi;
                [r * phi.cos(), r * phi.sin()]
            })
            .collect();
        Ok(Self {
            positions,
            wavelength,
            kind: ArrayKind::Spiral,
            spacing: None,
        })
    }

    pub fn custom(positions: Vec<[f64; 2]>, wavelength: f64) -> Result<Self> {
        check_count(positions.len())?;
        check_positive("wavelength", wavelength)?;
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(invalid("antenna coordinates must be finite"));
        }
        Ok(Self {
            positions,
            wavelength,
            kind: ArrayKind::Custom,
            spacing: None,
        })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `d/λ` for a ULA, `None` for any other topology.
    pub fn spacing_over_wavelength(&self) -> Option<f64> {
        self.spacing.map(|d| d / self.wavelength)
    }

    /// Same geometry measured at a different carrier wavelength.
    pub fn with_wavelength(&self, wavelength: f64) -> Result<Self> {
        check_positive("wavelength", wavelength)?;
        Ok(Self {
            wavelength,
            ..self.clone()
        })
    }

    /// Element coordinates in wavelengths, `r(l) = p_l / λ`.
    pub fn normalized_positions(&self) -> Vec<[f64; 2]> {
        self.positions
            .iter()
            .map(|p| [p[0] / self.wavelength, p[1] / self.wavelength])
            .collect()
    }
}

/// Far-field point targets observed at a single pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetScene {
    angles: Vec<f64>,
    reflections: Vec<Complex64>,
    speeds: Vec<f64>,
    pulse_index: u32,
    pulse_repetition: f64,
}

impl TargetScene {
    pub fn new(
        angles: Vec<f64>,
        reflections: Vec<Complex64>,
        speeds: Vec<f64>,
        pulse_index: u32,
        pulse_repetition: f64,
    ) -> Result<Self> {
        let k = angles.len();
        if k == 0 {
            return Err(Error::InvalidScene("a scene needs at least one target".into()));
        }
        if reflections.len() != k || speeds.len() != k {
            return Err(Error::InvalidScene(format!(
                "length mismatch: {k} angles, {} reflections, {} speeds",
                reflections.len(),
                speeds.len()
            )));
        }
        if angles.iter().chain(&speeds).any(|v| !v.is_finite())
            || reflections.iter().any(|z| !z.is_finite())
        {
            return Err(Error::InvalidScene("non-finite scene parameter".into()));
        }
        if let Some(i) = reflections.iter().position(|z| z.norm_sqr() == 0.0) {
            return Err(Error::InvalidScene(format!(
                "reflection coefficient {i} is zero"
            )));
        }
        if pulse_index == 0 {
            return Err(Error::InvalidScene("pulse index starts at 1".into()));
        }
        if !(pulse_repetition.is_finite() && pulse_repetition > 0.0) {
            return Err(Error::InvalidScene(
                "pulse repetition interval must be positive".into(),
            ));
        }
        Ok(Self {
            angles,
            reflections,
            speeds,
            pulse_index,
            pulse_repetition,
        })
    }

    /// Static unit-reflectivity targets at the given angles (first pulse).
    pub fn from_angles(angles: Vec<f64>) -> Result<Self> {
        let k = angles.len();
        Self::new(angles, vec![Complex64::new(1.0, 0.0); k], vec![0.0; k], 1, 1e-3)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn reflections(&self) -> &[Complex64] {
        &self.reflections
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn pulse_index(&self) -> u32 {
        self.pulse_index
    }

    pub fn pulse_repetition(&self) -> f64 {
        self.pulse_repetition
    }

    pub fn num_targets(&self) -> usize {
        self.angles.len()
    }

    /// Sub-scene with the targets at `keep` (in that order).
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        Self::new(
            keep.iter().map(|&i| self.angles[i]).collect(),
            keep.iter().map(|&i| self.reflections[i]).collect(),
            keep.iter().map(|&i| self.speeds[i]).collect(),
            self.pulse_index,
            self.pulse_repetition,
        )
    }

    /// Every reflection coefficient multiplied by `c`.
    pub fn scale_reflections(&self, c: Complex64) -> Result<Self> {
        Self::new(
            self.angles.clone(),
            self.reflections.iter().map(|z| z * c).collect(),
            self.speeds.clone(),
            self.pulse_index,
            self.pulse_repetition,
        )
    }
}
