//! WebAssembly bindings for the browser demo. Every export returns a flat
//! `Float64Array`; the page reshapes it.

use wasm_bindgen::prelude::*;

use mimo_mc::bounds::{beta_sup_finite, beta_sup_uniform, phi_general, ula_bounds_for_scene};
use mimo_mc::coherence::coherence_report;
use mimo_mc::geometry::{ArrayGeometry, TargetScene};
use mimo_mc::signal::data_matrix;

type Out = Result<Vec<f64>, String>;

fn js_err(e: mimo_mc::Error) -> String {
    e.to_string()
}

fn to_js(r: Out) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

fn geometry(kind: &str, count: usize, size: f64, wavelength: f64) -> Result<ArrayGeometry, String> {
    match kind {
        "ula" => ArrayGeometry::ula(count, size, wavelength),
        "uca" => ArrayGeometry::uca(count, size, wavelength),
        "spiral" => ArrayGeometry::spiral(count, size, wavelength),
        _ => return Err(format!("unknown array kind '{kind}'")),
    }
    .map_err(js_err)
}

/// Kernel `|φ(x, y)|²` on a `resolution × resolution` grid over `[−π, π]²`, row-major in `x`.
/// `size` is the ULA spacing, UCA radius or spiral growth rate, in meters.
#[wasm_bindgen]
pub fn phi_surface(kind: &str, count: usize, size: f64, wavelength: f64, resolution: usize) -> Result<Vec<f64>, JsError> {
    to_js(phi_surface_impl(kind, count, size, wavelength, resolution))
}

fn phi_surface_impl(kind: &str, count: usize, size: f64, wavelength: f64, resolution: usize) -> Out {
    if resolution < 2 {
        return Err(String::from("resolution must be at least 2"));
    }
    let g = geometry(kind, count, size, wavelength)?;
    let step = 2.0 * std::f64::consts::PI / (resolution - 1) as f64;
    let axis: Vec<f64> = (0..resolution).map(|i| -std::f64::consts::PI + step * i as f64).collect();
    let mut out = Vec::with_capacity(resolution * resolution);
    for &x in &axis {
        for &y in &axis {
            out.push(phi_general(&g, x, y));
        }
    }
    Ok(out)
}

/// Triples `(M, measured μ, μ₀ bound)` for half-wavelength ULA pairs of size
/// `m_min..=m_max`. An infeasible bound is `NaN`.
#[wasm_bindgen]
pub fn coherence_curve(angles_deg: Vec<f64>, m_min: usize, m_max: usize) -> Result<Vec<f64>, JsError> {
    to_js(coherence_curve_impl(angles_deg, m_min, m_max))
}

fn coherence_curve_impl(angles_deg: Vec<f64>, m_min: usize, m_max: usize) -> Out {
    if m_min == 0 || m_max < m_min {
        return Err(String::from("need 1 <= m_min <= m_max"));
    }
    let angles: Vec<f64> = angles_deg.iter().map(|d| d.to_radians()).collect();
    let scene = TargetScene::from_angles(angles.clone()).map_err(js_err)?;
    let mut out = Vec::with_capacity(3 * (m_max - m_min + 1));
    for m in m_min..=m_max {
        let g = ArrayGeometry::ula(m, 0.5, 1.0).map_err(js_err)?;
        let measured = coherence_report(&data_matrix(&g, &g, &scene).map_err(js_err)?, None)
            .map_err(js_err)?
            .mu0();
        let bound = ula_bounds_for_scene(&g, &g, &angles).map_err(js_err)?.mu0_bound;
        out.extend([m as f64, measured, bound.unwrap_or(f64::NAN)]);
    }
    Ok(out)
}

/// Triples `(ξ, β_ξ(M), β_ξ)` for `n` values of `ξ` spread over `[xi_min, 1/2]`.
#[wasm_bindgen]
pub fn beta_curve(m: usize, xi_min: f64, n: usize) -> Result<Vec<f64>, JsError> {
    to_js(beta_curve_impl(m, xi_min, n))
}

fn beta_curve_impl(m: usize, xi_min: f64, n: usize) -> Out {
    if !(xi_min > 0.0 && xi_min < 0.5) || n < 2 {
        return Err(String::from("need 0 < xi_min < 1/2 and n >= 2"));
    }
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let xi = xi_min + (0.5 - xi_min) * i as f64 / (n - 1) as f64;
        out.extend([
            xi,
            beta_sup_finite(m, xi).map_err(js_err)?,
            beta_sup_uniform(xi).map_err(js_err)?,
        ]);
    }
    Ok(out)
}
