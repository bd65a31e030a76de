//! Squared Dirichlet kernel, the wrap distance `g`, the separation `ξ` and the
//! suprema `β_ξ(M)`, `β_ξ`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// `sin²(πMx) / sin²(πx)`, equal to `M²` at integer `x`.
pub fn dirichlet_sq(m: usize, x: f64) -> f64 {
    let t = x - x.round();
    if t == 0.0 {
        return (m * m) as f64;
    }
    let num = (PI * m as f64 * t).sin();
    let den = (PI * t).sin();
    (num * num) / (den * den)
}

/// Distance from `x` to the nearest integer.
pub fn wrap_g(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `min_{i<j} g((d/λ)|sin θ_i − sin θ_j|)`.
pub fn min_separation_xi(spacing_over_lambda: f64, angles: &[f64]) -> Result<f64> {
    if angles.len() < 2 {
        return Err(invalid("separation needs at least two angles"));
    }
    if !(spacing_over_lambda.is_finite() && spacing_over_lambda > 0.0) {
        return Err(invalid("d/lambda must be positive"));
    }
    let s: Vec<f64> = angles.iter().map(|t| t.sin()).collect();
    let mut best = 0.5f64;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            best = best.min(wrap_g(spacing_over_lambda * (s[i] - s[j]).abs()));
        }
    }
    Ok(best)
}

/// `β_ξ = sup_{M>0} sup_{x∈[ξ,1/2]} sin²(πMx)/sin²(πx) = 1/sin²(πξ)`.
pub fn beta_sup_uniform(xi: f64) -> Result<f64> {
    check_xi(xi)?;
    let s = (PI * xi).sin();
    Ok(1.0 / (s * s))
}

/// `ξ = 1 − cos(η/2)` for `η ∈ (0, π/2]`.
pub fn lemma2_xi(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= PI / 2.0) {
        return Err(invalid(format!("eta = {eta} outside (0, pi/2]")));
    }
    Ok(1.0 - (eta / 2.0).cos())
}

fn check_xi(xi: f64) -> Result<()> {
    if xi.is_nan() || xi <= 0.0 {
        return Err(Error::UnboundedSupremum(format!(
            "xi = {xi}: the kernel peak M^2 at 0 lies in the closure"
        )));
    }
    if xi > 0.5 {
        return Err(invalid(format!("xi = {xi} exceeds 1/2")));
    }
    Ok(())
}

/// Certified enclosure of `sup_{x∈[ξ,1/2]} φ²_M(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBracket {
    /// Attained value `φ²_M(argmax)`.
    pub lower: f64,
    /// Guaranteed upper bound on the supremum.
    pub upper: f64,
    pub argmax: f64,
    pub evaluations: usize,
}

/// Stop once the upper bound is within this relative distance of the best value.
const SUP_REL_TOL: f64 = 1e-11;
const SUP_MAX_EVALS: usize = 2_000_000;
/// Relative allowance for rounding in the kernel evaluation.
const EVAL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Cell {
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    ub: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.ub == other.ub
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.total_cmp(&other.ub)
    }
}

/// Branch and bound over `[ξ, 1/2]`. A cell `[a, b]` is bounded by
/// `max(f(a), f(b)) + F₂(b−a)²/8`, where `F₂ ≥ sup|f''|` follows from writing
/// `φ_M` as a real cosine sum with centred frequencies, and by `1/sin²(πa)`.
pub fn beta_sup_finite_bracket(m: usize, xi: f64) -> Result<SupBracket> {
    if m == 0 {
        return Err(invalid("M must be positive"));
    }
    check_xi(xi)?;
    let f = |x: f64| dirichlet_sq(m, x);
    if m == 1 || xi == 0.5 {
        let v = f(xi);
        return Ok(SupBracket {
            lower: v,
            upper: v,
            argmax: xi,
            evaluations: 1,
        });
    }
    let c = (m as f64 - 1.0) / 2.0;
    let (mut s1, mut s2) = (0.0, 0.0);
    for k in 0..m {
        let d = (k as f64 - c).abs();
        s1 += d;
        s2 += d * d;
    }
    let a1 = 2.0 * PI * s1;
    let a2 = 4.0 * PI * PI * s2;
    let f2 = 2.0 * a1 * a1 + 2.0 * m as f64 * a2;
    let cap = (m * m) as f64;
    let cell_ub = |a: f64, b: f64, fa: f64, fb: f64| {
        let w = b - a;
        let s = (PI * a).sin();
        let quad = fa.max(fb) + f2 * w * w / 8.0;
        quad.min(1.0 / (s * s)).min(cap)
    };

    let n0 = ((0.5 - xi) * 64.0 * m as f64).ceil().max(1.0) as usize;
    let h = (0.5 - xi) / n0 as f64;
    let xs: Vec<f64> = (0..=n0)
        .map(|i| if i == n0 { 0.5 } else { xi + i as f64 * h })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut evaluations = xs.len();
    let (mut lower, mut argmax) = (fs[0], xs[0]);
    for (&x, &v) in xs.iter().zip(&fs) {
        if v > lower {
            lower = v;
            argmax = x;
        }
    }
    let mut heap: BinaryHeap<Cell> = (0..n0)
        .map(|i| Cell {
            a: xs[i],
            b: xs[i + 1],
            fa: fs[i],
            fb: fs[i + 1],
            ub: cell_ub(xs[i], xs[i + 1], fs[i], fs[i + 1]),
        })
        .collect();

    while let Some(top) = heap.peek().copied() {
        if top.ub <= lower * (1.0 + SUP_REL_TOL) || evaluations >= SUP_MAX_EVALS {
            break;
        }
        heap.pop();
        let mid = 0.5 * (top.a + top.b);
        if mid <= top.a || mid >= top.b {
            // adjacent floats: the endpoints are the whole cell
            heap.push(Cell {
                ub: top.fa.max(top.fb),
                ..top
            });
            continue;
        }
        let fm = f(mid);
        evaluations += 1;
        if fm > lower {
            lower = fm;
            argmax = mid;
        }
        heap.push(Cell {
            a: top.a,
            b: mid,
            fa: top.fa,
            fb: fm,
            ub: cell_ub(top.a, mid, top.fa, fm),
        });
        heap.push(Cell {
            a: mid,
            b: top.b,
            fa: fm,
            fb: top.fb,
            ub: cell_ub(mid, top.b, fm, top.fb),
        });
    }
    let raw = heap.peek().map_or(lower, |c| c.ub).max(lower);
    let upper = (raw * (1.0 + EVAL_SLACK)).min(beta_sup_uniform(xi)?).min(cap).max(lower);
    Ok(SupBracket {
        lower,
        upper,
        argmax,
        evaluations,
    })
}

/// Certified upper estimate of `β_ξ(M) = sup_{x∈[ξ,1/2]} φ²_M(x)`.
pub fn beta_sup_finite(m: usize, xi: f64) -> Result<f64> {
    beta_sup_finite_bracket(m, xi).map(|b| b.upper)
}
