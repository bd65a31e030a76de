//! Steering matrices, target gains, the data matrix and its sampled observations.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ArrayGeometry, TargetScene};
use crate::rng;

/// Dense complex matrix (double precision).
pub type ComplexMatrix = Mat<Complex64>;

/// `M × K` matrix with entry `(l, k) = exp(j2π r(l)ᵀ [cos θ_k, sin θ_k])`.
pub fn steering_matrix(geom: &ArrayGeometry, angles: &[f64]) -> Result<ComplexMatrix> {
    if angles.is_empty() {
        return Err(invalid("steering matrix needs at least one angle"));
    }
    let r = geom.normalized_positions();
    let dirs: Vec<(f64, f64)> = angles.iter().map(|t| (t.cos(), t.sin())).collect();
    Ok(ComplexMatrix::from_fn(r.len(), angles.len(), |l, k| {
        let (c, s) = dirs[k];
        Complex64::from_polar(1.0, 2.0 * PI * (r[l][0] * c + r[l][1] * s))
    }))
}

/// Per-target complex gains `ζ_k · exp(j (4π/λ) ϑ_k (q−1) T_PR)`.
pub fn target_gains(scene: &TargetScene, wavelength: f64) -> Vec<Complex64> {
    let pulses = (scene.pulse_index() - 1) as f64;
    scene
        .reflections()
        .iter()
        .zip(scene.speeds())
        .map(|(z, v)| {
            let phase = 4.0 * PI / wavelength * v * pulses * scene.pulse_repetition();
            z * Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// Diagonal `K × K` gain matrix `D`.
pub fn gain_matrix(scene: &TargetScene, wavelength: f64) -> Result<ComplexMatrix> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(invalid("wavelength must be positive"));
    }
    let g = target_gains(scene, wavelength);
    let k = g.len();
    Ok(ComplexMatrix::from_fn(k, k, |i, j| if i == j { g[i] } else { Complex64::ZERO }))
}

/// `Δ = X_r D X_tᵀ` (plain transpose), of shape `M_r × M_t`.
pub fn data_matrix(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    scene: &TargetScene,
) -> Result<ComplexMatrix> {
    let lt = tx.wavelength();
    let lr = rx.wavelength();
    if (lt - lr).abs() > 1e-12 * lt.max(lr) {
        return Err(invalid(format!(
            "transmit and receive wavelengths differ ({lt} vs {lr})"
        )));
    }
    let xr = steering_matrix(rx, scene.angles())?;
    let xt = steering_matrix(tx, scene.angles())?;
    let gains = target_gains(scene, lr);
    let mut xr_d = xr;
    for (k, g) in gains.iter().enumerate() {
        for v in xr_d.col_mut(k).iter_mut() {
            *v *= g;
        }
    }
    Ok(&xr_d * xt.transpose())
}

/// Set of observed coordinates, kept sorted in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMask {
    rows: usize,
    cols: usize,
    indices: Vec<(usize, usize)>,
}

impl SampleMask {
    pub fn new(rows: usize, cols: usize, mut indices: Vec<(usize, usize)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("mask shape must be positive"));
        }
        if let Some(&(i, j)) = indices.iter().find(|(i, j)| *i >= rows || *j >= cols) {
            return Err(invalid(format!(
                "index ({i}, {j}) outside {rows}x{cols}"
            )));
        }
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(invalid("duplicate mask coordinates"));
        }
        Ok(Self {
            rows,
            cols,
            indices,
        })
    }

    pub fn full(rows: usize, cols: usize) -> Result<Self> {
        let idx = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .collect();
        Self::new(rows, cols, idx)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    /// Cardinality `m`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of observed entries in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.rows];
        for &(i, _) in &self.indices {
            c[i] += 1;
        }
        c
    }

    pub fn col_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.cols];
        for &(_, j) in &self.indices {
            c[j] += 1;
        }
        c
    }
}

/// `m` distinct coordinates drawn uniformly without replacement.
pub fn sample_uniform(rows: usize, cols: usize, m: usize, seed: u64) -> Result<SampleMask> {
    let total = rows
        .checked_mul(cols)
        .ok_or_else(|| invalid("mask shape overflows"))?;
    if m == 0 || m > total {
        return Err(invalid(format!("m = {m} outside [1, {total}]")));
    }
    let mut r = rng::stream(seed, rng::STREAM_MASK);
    let idx = rand::seq::index::sample(&mut r, total, m)
        .into_iter()
        .map(|k| (k / cols, k % cols))
        .collect();
    SampleMask::new(rows, cols, idx)
}

/// Observed entries `P(Y) = P(Δ) + P(Z)` together with the noise level `δ ≥ ‖P(Z)‖_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialObservation {
    mask: SampleMask,
    values: Vec<Complex64>,
    noise_level: f64,
}

impl PartialObservation {
    pub fn new(mask: SampleMask, values: Vec<Complex64>, noise_level: f64) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(invalid(format!(
                "{} values for {} mask entries",
                values.len(),
                mask.len()
            )));
        }
        if !(noise_level.is_finite() && noise_level >= 0.0) {
            return Err(invalid("noise level must be nonnegative"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("observed values must be finite"));
        }
        Ok(Self {
            mask,
            values,
            noise_level,
        })
    }

    /// Noiseless sampling of `m` on `mask`.
    pub fn noiseless(m: &ComplexMatrix, mask: SampleMask) -> Result<Self> {
        check_shape(m, &mask)?;
        let values = mask.indices().iter().map(|&(i, j)| m[(i, j)]).collect();
        Self::new(mask, values, 0.0)
    }

    pub fn mask(&self) -> &SampleMask {
        &self.mask
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mask.shape()
    }

    /// Dense matrix holding the observed values and zeros elsewhere.
    pub fn to_dense(&self) -> ComplexMatrix {
        let (r, c) = self.shape();
        let mut out = ComplexMatrix::zeros(r, c);
        for (&(i, j), v) in self.mask.indices().iter().zip(&self.values) {
            out[(i, j)] = *v;
        }
        out
    }

    /// `‖P(Y)‖_F`.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_shape(m: &ComplexMatrix, mask: &SampleMask) -> Result<()> {
    if m.shape() != mask.shape() {
        return Err(Error::ShapeMismatch {
            expected: m.shape(),
            got: mask.shape(),
        });
    }
    Ok(())
}

/// Samples `delta_mat` on `mask` and adds circular complex Gaussian noise with
/// per-entry standard deviation `noise_std`. The recorded noise level is the
/// realized `‖P(Z)‖_F`.
pub fn observe(
    delta_mat: &ComplexMatrix,
    mask: &SampleMask,
    noise_std: f64,
    seed: u64,
) -> Result<PartialObservation> {
    check_shape(delta_mat, mask)?;
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(invalid("noise_std must be nonnegative"));
    }
    if noise_std == 0.0 {
        return PartialObservation::noiseless(delta_mat, mask.clone());
    }
    let normal = Normal::new(0.0, noise_std / 2f64.sqrt()).map_err(|e| invalid(e.to_string()))?;
    let mut r = rng::stream(seed, rng::STREAM_NOISE);
    let mut energy = 0.0;
    let values = mask
        .indices()
        .iter()
        .map(|&(i, j)| {
            let z = Complex64::new(normal.sample(&mut r), normal.sample(&mut r));
            energy += z.norm_sqr();
            delta_mat[(i, j)] + z
        })
        .collect();
    PartialObservation::new(mask.clone(), values, energy.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::numerical_rank;
    use crate::linalg::max_abs_diff;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ula_broadside_column_is_ones() {
        let g = ArrayGeometry::ula(3, 0.25, 0.5).unwrap();
        let x = steering_matrix(&g, &[0.0]).unwrap();
        for v in x.col(0).iter() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn ula_endfire_alternates() {
        let g = ArrayGeometry::ula(4, 0.25, 0.5).unwrap();
        let x = steering_matrix(&g, &[PI / 2.0]).unwrap();
        for l in 0..4 {
            let want = Complex64::from_polar(1.0, PI * l as f64);
            assert!((x[(l, 0)] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn uca_broadside_entries() {
        let g = ArrayGeometry::uca(20, 0.5, 0.5).unwrap();
        let x = steering_matrix(&g, &[0.0]).unwrap();
        for l in 0..20 {
            let want = Complex64::from_polar(1.0, 2.0 * PI * (2.0 * PI * l as f64 / 20.0).cos());
            assert!((x[(l, 0)] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn ula_rows_are_powers_of_the_generator() {
        let g = ArrayGeometry::ula(6, 0.25, 0.5).unwrap();
        let angles = [-0.7, 0.1, 1.2];
        let x = steering_matrix(&g, &angles).unwrap();
        for l in 0..6 {
            for k in 0..3 {
                let want = x[(1, k)].powu(l as u32);
                assert!((x[(l, k)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gains() {
        let scene = TargetScene::new(
            vec![0.1, 0.2],
            vec![c(2.0, 1.0), c(-1.0, 0.5)],
            vec![30.0, -12.0],
            1,
            1e-3,
        )
        .unwrap();
        let d = gain_matrix(&scene, 0.5).unwrap();
        assert_eq!(d[(0, 0)], c(2.0, 1.0));
        assert_eq!(d[(1, 1)], c(-1.0, 0.5));
        assert_eq!(d[(0, 1)], c(0.0, 0.0));

        let scene = TargetScene::new(vec![0.0], vec![c(1.0, 0.0)], vec![10.0], 2, 1e-3).unwrap();
        let d = gain_matrix(&scene, 0.5).unwrap();
        let want = Complex64::from_polar(1.0, 0.251_327_412_287_183_4);
        assert!((d[(0, 0)] - want).norm() < 1e-15);

        let scene = TargetScene::new(
            vec![0.0, 0.3],
            vec![c(3.0, -4.0), c(0.0, 0.2)],
            vec![17.0, 250.0],
            7,
            2e-4,
        )
        .unwrap();
        let d = gain_matrix(&scene, 0.3).unwrap();
        assert!((d[(0, 0)].norm() - 5.0).abs() < 1e-12);
        assert!((d[(1, 1)].norm() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn single_target_data_matrix() {
        let tx = ArrayGeometry::ula(5, 0.25, 0.5).unwrap();
        let rx = ArrayGeometry::uca(4, 0.4, 0.5).unwrap();
        let theta = 0.37;
        let scene = TargetScene::from_angles(vec![theta]).unwrap();
        let d = data_matrix(&tx, &rx, &scene).unwrap();
        assert_eq!(d.shape(), (4, 5));
        let rr = rx.normalized_positions();
        let rt = tx.normalized_positions();
        let (ct, st) = (theta.cos(), theta.sin());
        for l in 0..4 {
            for m in 0..5 {
                let ph = 2.0 * PI * ((rr[l][0] + rt[m][0]) * ct + (rr[l][1] + rt[m][1]) * st);
                assert!((d[(l, m)] - Complex64::from_polar(1.0, ph)).norm() < 1e-12);
            }
        }
        assert_eq!(numerical_rank(&d, None).unwrap(), 1);
    }

    #[test]
    fn rank_follows_distinct_angles() {
        let g = ArrayGeometry::ula(8, 0.25, 0.5).unwrap();
        let two = TargetScene::from_angles(vec![-0.4, 0.6]).unwrap();
        assert_eq!(numerical_rank(&data_matrix(&g, &g, &two).unwrap(), None).unwrap(), 2);
        let dup = TargetScene::new(
            vec![0.3, 0.3],
            vec![c(1.0, 0.0), c(0.5, 0.5)],
            vec![0.0, 0.0],
            1,
            1e-3,
        )
        .unwrap();
        assert_eq!(numerical_rank(&data_matrix(&g, &g, &dup).unwrap(), None).unwrap(), 1);
    }

    #[test]
    fn wavelength_mismatch_is_rejected() {
        let a = ArrayGeometry::ula(4, 0.25, 0.5).unwrap();
        let b = ArrayGeometry::ula(4, 0.25, 0.6).unwrap();
        let s = TargetScene::from_angles(vec![0.1]).unwrap();
        assert!(data_matrix(&a, &b, &s).is_err());
    }

    #[test]
    fn masks() {
        let full = sample_uniform(3, 4, 12, 1).unwrap();
        assert_eq!(full, SampleMask::full(3, 4).unwrap());
        let one = sample_uniform(3, 4, 1, 1).unwrap();
        assert_eq!(one.len(), 1);
        let (i, j) = one.indices()[0];
        assert!(i < 3 && j < 4);
        assert_eq!(sample_uniform(8, 8, 32, 77).unwrap(), sample_uniform(8, 8, 32, 77).unwrap());
        assert!(sample_uniform(3, 4, 0, 1).is_err());
        assert!(sample_uniform(3, 4, 13, 1).is_err());
        assert!(SampleMask::new(2, 2, vec![(0, 0), (0, 0)]).is_err());
        assert!(SampleMask::new(2, 2, vec![(2, 0)]).is_err());
    }

    #[test]
    fn noiseless_observation_reproduces_matrix() {
        let g = ArrayGeometry::ula(4, 0.25, 0.5).unwrap();
        let d = data_matrix(&g, &g, &TargetScene::from_angles(vec![0.2, -0.5]).unwrap()).unwrap();
        let obs = observe(&d, &SampleMask::full(4, 4).unwrap(), 0.0, 3).unwrap();
        assert_eq!(obs.noise_level(), 0.0);
        assert_eq!(obs.to_dense(), d);

        let mask = sample_uniform(4, 4, 7, 5).unwrap();
        let obs = observe(&d, &mask, 0.0, 3).unwrap();
        for (&(i, j), v) in mask.indices().iter().zip(obs.values()) {
            assert_eq!(*v, d[(i, j)]);
        }
    }

    #[test]
    fn noise_energy_concentrates() {
        // δ² is a sum of m i.i.d. |z|² with |z|² ~ Exp(mean σ²): mean mσ², variance mσ⁴.
        let d = ComplexMatrix::zeros(10, 10);
        let mask = sample_uniform(10, 10, 60, 0).unwrap();
        let sigma = 0.1;
        let trials = 100;
        let mean: f64 = (0..trials)
            .map(|s| observe(&d, &mask, sigma, s).unwrap().noise_level().powi(2))
            .sum::<f64>()
            / trials as f64;
        let expected = 60.0 * sigma * sigma;
        let std_err = (60.0f64).sqrt() * sigma * sigma / (trials as f64).sqrt();
        assert!((mean - expected).abs() < 5.0 * std_err, "{mean} vs {expected}");
    }

    #[test]
    fn noise_does_not_move_the_mask() {
        let d = ComplexMatrix::from_fn(5, 5, |_, _| c(1.0, 0.0));
        let mask = sample_uniform(5, 5, 10, 11).unwrap();
        let a = observe(&d, &mask, 0.1, 1).unwrap();
        let b = observe(&d, &mask, 0.3, 2).unwrap();
        assert_eq!(a.mask(), b.mask());
        assert_ne!(a.values(), b.values());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn common_reflection_scale_scales_delta(
                angles in proptest::collection::vec(-1.5f64..1.5, 1..5),
                re in -2.0f64..2.0, im in -2.0f64..2.0,
            ) {
                prop_assume!(re.abs() + im.abs() > 1e-3);
                let g = ArrayGeometry::ula(6, 0.25, 0.5).unwrap();
                let h = ArrayGeometry::uca(5, 0.3, 0.5).unwrap();
                let scene = TargetScene::from_angles(angles).unwrap();
                let cc = c(re, im);
                let a = data_matrix(&g, &h, &scene).unwrap() * faer::Scale(cc);
                let b = data_matrix(&g, &h, &scene.scale_reflections(cc).unwrap()).unwrap();
                prop_assert!(max_abs_diff(&a, &b) < 1e-12);
            }

            #[test]
            fn rank_at_most_k(angles in proptest::collection::vec(-1.5f64..1.5, 1..7)) {
                let g = ArrayGeometry::ula(9, 0.25, 0.5).unwrap();
                let k = angles.len();
                let scene = TargetScene::from_angles(angles).unwrap();
                let d = data_matrix(&g, &g, &scene).unwrap();
                prop_assert!(numerical_rank(&d, None).unwrap() <= k);
            }
        }
    }
}
