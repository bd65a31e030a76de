//! Kernel suprema and coherence bounds for arbitrary planar arrays.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::geometry::ArrayGeometry;

use super::ula::mu_bounds_from_betas;

/// `|Σ_m exp(j2π r_mᵀ(T(x) − T(y)))|²` with `T(θ) = [cos θ, sin θ]`.
pub fn phi_general(geom: &ArrayGeometry, x: f64, y: f64) -> f64 {
    Kernel::new(geom).eval(x, y)
}

/// Centred, 2π-scaled positions. Centring multiplies the sum by a unit phase only.
#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    rho: Vec<[f64; 2]>,
}

impl Kernel {
    pub(crate) fn new(geom: &ArrayGeometry) -> Self {
        let r = geom.normalized_positions();
        let n = r.len() as f64;
        let cx = r.iter().map(|p| p[0]).sum::<f64>() / n;
        let cy = r.iter().map(|p| p[1]).sum::<f64>() / n;
        let rho = r
            .iter()
            .map(|p| [2.0 * PI * (p[0] - cx), 2.0 * PI * (p[1] - cy)])
            .collect();
        Self { rho }
    }

    pub(crate) fn len(&self) -> usize {
        self.rho.len()
    }

    pub(crate) fn eval(&self, x: f64, y: f64) -> f64 {
        let dc = x.cos() - y.cos();
        let ds = x.sin() - y.sin();
        let (mut re, mut im) = (0.0, 0.0);
        for p in &self.rho {
            let (s, c) = (p[0] * dc + p[1] * ds).sin_cos();
            re += c;
            im += s;
        }
        re * re + im * im
    }

    /// Kernel value together with `|∇S|`, the gradient norm of the complex sum.
    fn sample(&self, x: f64, y: f64) -> Sample {
        let (sx, cx) = x.sin_cos();
        let (sy, cy) = y.sin_cos();
        let (dc, ds) = (cx - cy, sx - sy);
        let (mut re, mut im) = (0.0, 0.0);
        let (mut gx_re, mut gx_im, mut gy_re, mut gy_im) = (0.0, 0.0, 0.0, 0.0);
        for p in &self.rho {
            let (s, c) = (p[0] * dc + p[1] * ds).sin_cos();
            re += c;
            im += s;
            let px = -p[0] * sx + p[1] * cx;
            let py = p[0] * sy - p[1] * cy;
            gx_re -= px * s;
            gx_im += px * c;
            gy_re -= py * s;
            gy_im += py * c;
        }
        Sample {
            f: re * re + im * im,
            g: (gx_re * gx_re + gx_im * gx_im + gy_re * gy_re + gy_im * gy_im).sqrt(),
        }
    }
}

type Predicate = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;

/// Region of admissible angle pairs `(θ_i, θ_j)`.
#[derive(Clone)]
pub enum AdmissibleSet {
    /// `{(x, y) ∈ box : min_gap ≤ |y − x| ≤ max_gap}`.
    Band {
        x: [f64; 2],
        y: [f64; 2],
        min_gap: f64,
        max_gap: f64,
    },
    Point { x: f64, y: f64 },
    /// Arbitrary membership test inside a bounding box. Suprema over these sets
    /// are sampled rather than certified.
    Custom {
        x: [f64; 2],
        y: [f64; 2],
        contains: Predicate,
    },
}

impl fmt::Debug for AdmissibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Band { x, y, min_gap, max_gap } => f
                .debug_struct("Band")
                .field("x", x)
                .field("y", y)
                .field("min_gap", min_gap)
                .field("max_gap", max_gap)
                .finish(),
            Self::Point { x, y } => f.debug_struct("Point").field("x", x).field("y", y).finish(),
            Self::Custom { x, y, .. } => f.debug_struct("Custom").field("x", x).field("y", y).finish(),
        }
    }
}

const HALF_PI: f64 = PI / 2.0;

impl AdmissibleSet {
    pub fn band(x: [f64; 2], y: [f64; 2], min_gap: f64, max_gap: f64) -> Result<Self> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !ok(x) || !ok(y) {
            return Err(invalid("band box must have finite ordered bounds"));
        }
        if !(min_gap.is_finite() && max_gap.is_finite() && min_gap <= max_gap && max_gap >= 0.0) {
            return Err(invalid(format!("gap range [{min_gap}, {max_gap}] is empty")));
        }
        Ok(Self::Band { x, y, min_gap, max_gap })
    }

    /// Angles in `[−π/2, π/2]` with `η ≤ |y − x| ≤ π − η`, `η ∈ (0, π/2]`.
    pub fn separated_band(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= HALF_PI) {
            return Err(invalid(format!("eta = {eta} outside (0, pi/2]")));
        }
        Self::band([-HALF_PI, HALF_PI], [-HALF_PI, HALF_PI], eta, PI - eta)
    }

    /// Angles in `[−π/2, π/2]` with `η ≤ |y − x| ≤ π`, `η ∈ (0, π)`.
    pub fn separated(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < PI) {
            return Err(invalid(format!("eta = {eta} outside (0, pi)")));
        }
        Self::band([-HALF_PI, HALF_PI], [-HALF_PI, HALF_PI], eta, PI)
    }

    pub fn custom(x: [f64; 2], y: [f64; 2], contains: impl Fn(f64, f64) -> bool + Send + Sync + 'static) -> Self {
        Self::Custom {
            x,
            y,
            contains: Arc::new(contains),
        }
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        match self {
            Self::Band { x, y, min_gap, max_gap } => {
                let d = (py - px).abs();
                in_range(px, *x) && in_range(py, *y) && d >= *min_gap && d <= *max_gap
            }
            Self::Point { x, y } => px == *x && py == *y,
            Self::Custom { x, y, contains } => in_range(px, *x) && in_range(py, *y) && contains(px, py),
        }
    }

    /// Whether the set reaches the diagonal `x = y`, where the kernel equals `M²`.
    pub fn touches_diagonal(&self) -> bool {
        match self {
            Self::Band { x, y, min_gap, .. } => *min_gap <= 0.0 && x[0].max(y[0]) <= x[1].min(y[1]),
            Self::Point { x, y } => x == y,
            Self::Custom { .. } => false,
        }
    }

    /// Sampled membership test for a rectangle of a custom set.
    fn may_intersect(&self, lo: &(f64, f64), hi: &(f64, f64)) -> bool {
        let (cx, cy) = (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
        [(lo.0, lo.1), (hi.0, lo.1), (lo.0, hi.1), (hi.0, hi.1), (cx, cy)]
            .iter()
            .any(|&(a, b)| self.contains(a, b))
    }
}

fn in_range(v: f64, r: [f64; 2]) -> bool {
    v >= r[0] && v <= r[1]
}

/// Enclosure of `sup_A φ` for one array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralBeta {
    /// Largest kernel value found at an admissible point.
    pub lower: f64,
    /// Upper bound on the supremum (certified for bands and points).
    pub upper: f64,
    pub touches_diagonal: bool,
    pub converged: bool,
    pub evaluations: usize,
}

/// Branch-and-bound settings for [`general_beta_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            max_evaluations: 4_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    f: f64,
    g: f64,
}

/// Rectangle in search coordinates `(u, v)` with the kernel at its corners.
#[derive(Debug, Clone, Copy)]
struct Cell {
    piece: usize,
    u0: f64,
    u1: f64,
    v0: f64,
    v1: f64,
    /// Samples at (u0,v0), (u1,v0), (u0,v1), (u1,v1).
    f: [Sample; 4],
    ub: f64,
}

impl Cell {
    fn center(&self) -> (f64, f64) {
        (0.5 * (self.u0 + self.u1), 0.5 * (self.v0 + self.v1))
    }
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

/// A rectangle of search coordinates and its map into the `(x, y)` plane.
#[derive(Debug, Clone, Copy)]
enum Piece {
    /// Identity map over a box; membership is tested pointwise.
    Box { x: [f64; 2], y: [f64; 2] },
    /// One branch of a band with `u = d = y − x ∈ [d0, d1]` and `v = s ∈ [0, 1]`,
    /// `x = a(d) + s(b(d) − a(d))`, where `a(d) = max(x₀, y₀ − d)` and
    /// `b(d) = min(x₁, y₁ − d)` are linear on the piece. Every point is admissible.
    Band { d: [f64; 2], x: [f64; 2], y: [f64; 2] },
}

impl Piece {
    fn rect(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Self::Box { x, y } => (*x, *y),
            Self::Band { d, .. } => (*d, [0.0, 1.0]),
        }
    }

    fn span(x: [f64; 2], y: [f64; 2], d: f64) -> (f64, f64) {
        (x[0].max(y[0] - d), x[1].min(y[1] - d))
    }

    fn map(&self, u: f64, v: f64) -> (f64, f64) {
        match self {
            Self::Box { .. } => (u, v),
            Self::Band { x, y, .. } => {
                let (a, b) = Self::span(*x, *y, u);
                let px = a + v * (b - a);
                (px, (px + u).clamp(y[0], y[1]))
            }
        }
    }

    /// Bounds on `|∂²φ/∂u²|` and `|∂²φ/∂v²|` over the cell.
    ///
    /// With `w` the image of a coordinate direction, `φ_ww = 2Re(S̄ S_ww) + 2|S_w|²`
    /// because the map is linear in each coordinate. `|S|` and `|∇S|` are bounded
    /// on the cell from their corner values and `R`, the distance any point
    /// travels to its nearest corner.
    fn curvature(&self, c: &Cell, k: &Curvature) -> (f64, f64) {
        let (hu, hv) = (c.u1 - c.u0, c.v1 - c.v0);
        let (wu2, wv2, reach) = match self {
            Self::Box { .. } => (1.0, 1.0, 0.5 * (hu + hv)),
            Self::Band { x, y, .. } => {
                // w_u = (x_d, x_d + 1) has |w_u| ≤ 1; w_v = L(1, 1)
                let len = |d: f64| {
                    let (a, b) = Self::span(*x, *y, d);
                    (b - a).max(0.0)
                };
                let l = len(c.u0).max(len(c.u1));
                (1.0, 2.0 * l * l, 0.5 * hu + 0.5 * hv * std::f64::consts::SQRT_2 * l)
            }
        };
        let s0 = c.f.iter().map(|p| p.f.sqrt()).fold(0.0, f64::max);
        let g0 = c.f.iter().map(|p| p.g).fold(0.0, f64::max);
        let g = (g0 + reach * k.hessian).min(k.gradient);
        let s = (s0 + reach * g).min(k.size);
        let per = 2.0 * s * k.hessian + 2.0 * g * g;
        (wu2 * per, wv2 * per)
    }
}

/// Global bounds over unit directions: `|D_e S| ≤ gradient`, `|D_e D_f S| ≤ hessian`, `|S| ≤ size`.
struct Curvature {
    gradient: f64,
    hessian: f64,
    size: f64,
}

impl Kernel {
    fn curvature(&self) -> Curvature {
        let norms: Vec<f64> = self.rho.iter().map(|p| p[0].hypot(p[1])).collect();
        let g1: f64 = norms.iter().sum();
        let sq: f64 = norms.iter().map(|n| n * n).sum();
        Curvature {
            gradient: std::f64::consts::SQRT_2 * g1,
            hessian: g1 + 2.0 * sq,
            size: self.len() as f64,
        }
    }
}

/// Pieces covering a band exactly: both signs of `y − x`, split where `a(d)` or `b(d)` has a kink.
fn band_pieces(x: [f64; 2], y: [f64; 2], min_gap: f64, max_gap: f64) -> Vec<Piece> {
    let feasible = [y[0] - x[1], y[1] - x[0]];
    let kinks = [y[0] - x[0], y[1] - x[1]];
    let mut out = Vec::new();
    for (lo, hi) in [(min_gap, max_gap), (-max_gap, -min_gap)] {
        let lo = lo.max(feasible[0]);
        let hi = hi.min(feasible[1]);
        if lo > hi {
            continue;
        }
        let mut cuts = vec![lo, hi];
        cuts.extend(kinks.iter().copied().filter(|&k| k > lo && k < hi));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            out.push(Piece::Band { d: [w[0], w[1]], x, y });
        }
        if cuts.len() == 1 {
            out.push(Piece::Band { d: [lo, hi], x, y });
        }
    }
    out
}

/// Supremum of [`phi_general`] over `set`, starting from cells of side at most
/// `resolution` and refining by bisection. Each cell is bounded by its largest
/// corner value plus the bilinear interpolation error `(h_u²|φ_uu| + h_v²|φ_vv|)/8`.
/// Bands are searched in coordinates where each cell lies inside the set, so
/// the bracket closes quadratically.
pub fn general_beta(geom: &ArrayGeometry, set: &AdmissibleSet, resolution: f64) -> Result<GeneralBeta> {
    general_beta_with(geom, set, resolution, SearchOptions::default())
}

pub fn general_beta_with(
    geom: &ArrayGeometry,
    set: &AdmissibleSet,
    resolution: f64,
    opts: SearchOptions,
) -> Result<GeneralBeta> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(invalid("resolution must be positive"));
    }
    let kernel = Kernel::new(geom);
    let m2 = (kernel.len() * kernel.len()) as f64;
    if set.touches_diagonal() {
        return Ok(GeneralBeta {
            lower: m2,
            upper: m2,
            touches_diagonal: true,
            converged: true,
            evaluations: 0,
        });
    }
    let pieces = match set {
        AdmissibleSet::Point { x, y } => {
            let v = kernel.eval(*x, *y);
            return Ok(GeneralBeta {
                lower: v,
                upper: v,
                touches_diagonal: false,
                converged: true,
                evaluations: 1,
            });
        }
        AdmissibleSet::Band { x, y, min_gap, max_gap } => band_pieces(*x, *y, *min_gap, *max_gap),
        AdmissibleSet::Custom { x, y, .. } => vec![Piece::Box { x: *x, y: *y }],
    };
    if pieces.is_empty() {
        return Err(invalid("admissible set has no points inside its box"));
    }
    let certified = matches!(set, AdmissibleSet::Band { .. });
    let curv = kernel.curvature();
    let ub_of = |c: &Cell| {
        let (cu, cv) = pieces[c.piece].curvature(c, &curv);
        let (hu, hv) = (c.u1 - c.u0, c.v1 - c.v0);
        let m = c.f.iter().map(|p| p.f).fold(0.0, f64::max);
        (m + (hu * hu * cu + hv * hv * cv) / 8.0).min(m2)
    };
    let member = |p: &Piece, x: f64, y: f64| certified || set.contains(x, y) && matches!(p, Piece::Box { .. });
    let mut lower = f64::NEG_INFINITY;
    let mut evaluations = 0usize;
    let eval_at = |p: &Piece, u: f64, v: f64, lower: &mut f64, evaluations: &mut usize| {
        let (x, y) = p.map(u, v);
        let val = kernel.sample(x, y);
        *evaluations += 1;
        if member(p, x, y) {
            *lower = lower.max(val.f);
        }
        val
    };

    let mut heap = BinaryHeap::new();
    for (pi, p) in pieces.iter().enumerate() {
        let (ur, vr) = p.rect();
        let nu = (((ur[1] - ur[0]) / resolution).ceil() as usize).max(1);
        let nv = (((vr[1] - vr[0]) / resolution).ceil() as usize).max(1);
        let gu: Vec<f64> = (0..=nu).map(|i| grid_point(ur, nu, i)).collect();
        let gv: Vec<f64> = (0..=nv).map(|j| grid_point(vr, nv, j)).collect();
        let mut vals = vec![Sample { f: 0.0, g: 0.0 }; (nu + 1) * (nv + 1)];
        for j in 0..=nv {
            for i in 0..=nu {
                vals[j * (nu + 1) + i] = eval_at(p, gu[i], gv[j], &mut lower, &mut evaluations);
            }
        }
        for j in 0..nv {
            for i in 0..nu {
                let at = |a: usize, b: usize| vals[b * (nu + 1) + a];
                let mut c = Cell {
                    piece: pi,
                    u0: gu[i],
                    u1: gu[i + 1],
                    v0: gv[j],
                    v1: gv[j + 1],
                    f: [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)],
                    ub: 0.0,
                };
                if certified || set.may_intersect(&p.map(c.u0, c.v0), &p.map(c.u1, c.v1)) {
                    c.ub = ub_of(&c);
                    heap.push(c);
                }
            }
        }
    }
    if heap.is_empty() {
        return Err(invalid("admissible set has no points inside its box"));
    }

    let mut converged = false;
    while let Some(top) = heap.pop() {
        if lower.is_finite() && top.ub <= lower * (1.0 + opts.rel_tol) {
            heap.push(top);
            converged = true;
            break;
        }
        if evaluations >= opts.max_evaluations {
            heap.push(top);
            break;
        }
        let (um, vm) = top.center();
        let p = &pieces[top.piece];
        let (cu, cv) = p.curvature(&top, &curv);
        let (hu, hv) = (top.u1 - top.u0, top.v1 - top.v0);
        let can_u = um > top.u0 && um < top.u1;
        let can_v = vm > top.v0 && vm < top.v1;
        let split_u = match (can_u, can_v) {
            (false, false) => {
                if !certified {
                    heap.push(top);
                    break;
                }
                // a degenerate cell is just its corners
                heap.push(Cell {
                    ub: top.f.iter().map(|p| p.f).fold(0.0, f64::max),
                    ..top
                });
                continue;
            }
            (true, false) => true,
            (false, true) => false,
            (true, true) => hu * hu * cu >= hv * hv * cv,
        };
        let [f00, f10, f01, f11] = top.f;
        let children = if split_u {
            let fm0 = eval_at(p, um, top.v0, &mut lower, &mut evaluations);
            let fm1 = eval_at(p, um, top.v1, &mut lower, &mut evaluations);
            [
                (top.u0, um, top.v0, top.v1, [f00, fm0, f01, fm1]),
                (um, top.u1, top.v0, top.v1, [fm0, f10, fm1, f11]),
            ]
        } else {
            let f0m = eval_at(p, top.u0, vm, &mut lower, &mut evaluations);
            let f1m = eval_at(p, top.u1, vm, &mut lower, &mut evaluations);
            [
                (top.u0, top.u1, top.v0, vm, [f00, f10, f0m, f1m]),
                (top.u0, top.u1, vm, top.v1, [f0m, f1m, f01, f11]),
            ]
        };
        for (u0, u1, v0, v1, f) in children {
            let mut c = Cell {
                piece: top.piece,
                u0,
                u1,
                v0,
                v1,
                f,
                ub: 0.0,
            };
            if certified || set.may_intersect(&p.map(u0, v0), &p.map(u1, v1)) {
                c.ub = ub_of(&c);
                heap.push(c);
            }
        }
    }
    let lower = lower.max(0.0);
    let upper = heap.peek().map_or(lower, |c| c.ub).max(lower);
    Ok(GeneralBeta {
        lower,
        upper: (upper * (1.0 + 1e-12)).min(m2),
        touches_diagonal: false,
        converged,
        evaluations,
    })
}

fn grid_point(r: [f64; 2], n: usize, i: usize) -> f64 {
    if i == n {
        r[1]
    } else {
        r[0] + (r[1] - r[0]) * i as f64 / n as f64
    }
}

/// Bound report for an arbitrary transmit/receive array pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralBoundReport {
    pub k: usize,
    pub beta_t: f64,
    pub beta_r: f64,
    pub beta_t_lower: f64,
    pub beta_r_lower: f64,
    pub mu0_bound: Option<f64>,
    pub mu1_bound: Option<f64>,
    pub k_max: f64,
    pub feasible: bool,
    pub touches_diagonal: bool,
    pub grid_resolution: f64,
}

impl fmt::Display for GeneralBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use super::fmt_opt;
        writeln!(f, "k={}", self.k)?;
        writeln!(f, "beta_t={}", self.beta_t)?;
        writeln!(f, "beta_r={}", self.beta_r)?;
        writeln!(f, "beta_t_lower={}", self.beta_t_lower)?;
        writeln!(f, "beta_r_lower={}", self.beta_r_lower)?;
        writeln!(f, "mu0_bound={}", fmt_opt(self.mu0_bound))?;
        writeln!(f, "mu1_bound={}", fmt_opt(self.mu1_bound))?;
        writeln!(f, "k_max={}", self.k_max)?;
        writeln!(f, "feasible={}", self.feasible)?;
        writeln!(f, "touches_diagonal={}", self.touches_diagonal)?;
        writeln!(f, "grid_resolution={}", self.grid_resolution)
    }
}

/// Same structure as the ULA bounds, with `β_t`, `β_r` from [`general_beta`].
pub fn general_bounds(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    k: usize,
    set: &AdmissibleSet,
    resolution: f64,
) -> Result<GeneralBoundReport> {
    if k == 0 {
        return Err(invalid("K must be positive"));
    }
    let bt = general_beta(tx, set, resolution)?;
    let br = if rx == tx { bt } else { general_beta(rx, set, resolution)? };
    let mb = mu_bounds_from_betas(tx.len(), rx.len(), k, bt.upper, br.upper);
    Ok(GeneralBoundReport {
        k,
        beta_t: bt.upper,
        beta_r: br.upper,
        beta_t_lower: bt.lower,
        beta_r_lower: br.lower,
        mu0_bound: mb.mu0,
        mu1_bound: mb.mu1,
        k_max: mb.k_max,
        feasible: mb.feasible,
        touches_diagonal: bt.touches_diagonal || br.touches_diagonal,
        grid_resolution: resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::dirichlet::{beta_sup_finite_bracket, dirichlet_sq, lemma2_xi};

    fn uca20() -> ArrayGeometry {
        ArrayGeometry::uca(20, 0.5, 0.5).unwrap()
    }

    #[test]
    fn diagonal_is_peak() {
        for g in [uca20(), ArrayGeometry::spiral(12, 0.1, 0.5).unwrap()] {
            let m2 = (g.len() * g.len()) as f64;
            for x in [-2.0, 0.0, 0.3, 3.0] {
                assert!((phi_general(&g, x, x) - m2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ula_reduces_to_dirichlet() {
        let g = ArrayGeometry::ula(9, 0.3, 0.5).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let x = -PI + i as f64 * 0.157;
                let y = -PI + j as f64 * 0.161;
                let want = dirichlet_sq(9, 0.6 * (x.sin() - y.sin()));
                assert!((phi_general(&g, x, y) - want).abs() < 1e-10 * want.max(1.0));
            }
        }
    }

    #[test]
    fn matches_direct_complex_sum() {
        let g = ArrayGeometry::spiral(7, 0.2, 0.4).unwrap();
        let r = g.normalized_positions();
        let (x, y) = (0.4f64, -1.1f64);
        let mut s = num_complex::Complex64::new(0.0, 0.0);
        for p in &r {
            let ph = 2.0 * PI * (p[0] * (x.cos() - y.cos()) + p[1] * (x.sin() - y.sin()));
            s += num_complex::Complex64::from_polar(1.0, ph);
        }
        assert!((phi_general(&g, x, y) - s.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn uca_surface_is_periodic() {
        let g = uca20();
        for i in 0..25 {
            let x = -PI + i as f64 * 0.13;
            let y = 0.7 - i as f64 * 0.09;
            let v = phi_general(&g, x, y);
            assert!((v - phi_general(&g, x + 2.0 * PI, y)).abs() < 1e-9);
            assert!((v - phi_general(&g, x, y - 2.0 * PI)).abs() < 1e-9);
        }
    }

    #[test]
    fn point_set() {
        let g = uca20();
        let b = general_beta(&g, &AdmissibleSet::Point { x: 0.2, y: -0.9 }, 0.1).unwrap();
        assert_eq!(b.lower, phi_general(&g, 0.2, -0.9));
        assert_eq!(b.upper, b.lower);
        let d = general_beta(&g, &AdmissibleSet::Point { x: 0.2, y: 0.2 }, 0.1).unwrap();
        assert!(d.touches_diagonal);
        assert_eq!(d.upper, 400.0);
    }

    #[test]
    fn band_touching_diagonal() {
        let set = AdmissibleSet::band([-1.0, 1.0], [-1.0, 1.0], 0.0, 1.0).unwrap();
        let b = general_beta(&uca20(), &set, 0.1).unwrap();
        assert!(b.touches_diagonal);
        assert_eq!(b.upper, 400.0);
    }

    #[test]
    fn ula_band_agrees_with_one_dimensional_supremum() {
        let g = ArrayGeometry::ula(16, 0.25, 0.5).unwrap();
        for eta in [0.5, 1.0, PI / 2.0] {
            let set = AdmissibleSet::separated_band(eta).unwrap();
            let gb = general_beta(&g, &set, 0.02).unwrap();
            let one = beta_sup_finite_bracket(16, lemma2_xi(eta).unwrap()).unwrap();
            assert!(gb.converged);
            assert!(gb.lower <= one.upper * (1.0 + 1e-9) && one.lower <= gb.upper * (1.0 + 1e-9));
            assert!((gb.upper - one.upper).abs() <= 1e-3 * one.upper, "{eta}: {gb:?} {one:?}");
        }
    }

    #[test]
    fn uca_separated_is_below_peak_and_dense_grid_is_below_upper() {
        let g = uca20();
        let set = AdmissibleSet::separated(1.0).unwrap();
        let b = general_beta(&g, &set, 0.02).unwrap();
        assert!(b.upper < 400.0);
        let mut brute = 0.0f64;
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let x = -HALF_PI + PI * i as f64 / n as f64;
                let y = -HALF_PI + PI * j as f64 / n as f64;
                if set.contains(x, y) {
                    brute = brute.max(phi_general(&g, x, y));
                }
            }
        }
        assert!(brute <= b.upper);
        assert!(b.lower >= brute * (1.0 - 1e-9));
    }

    #[test]
    fn uca_bound_decreases_with_eta() {
        let g = uca20();
        let mut prev = f64::INFINITY;
        for eta in [0.4, 0.8, 1.2, 1.6, 2.0] {
            let r = general_bounds(&g, &g, 2, &AdmissibleSet::separated(eta).unwrap(), 0.05).unwrap();
            assert!(r.beta_t <= prev * (1.0 + 1e-6));
            prev = r.beta_t;
        }
    }

    #[test]
    fn single_target_general() {
        let g = uca20();
        let r = general_bounds(&g, &g, 1, &AdmissibleSet::separated(1.0).unwrap(), 0.05).unwrap();
        assert_eq!(r.mu0_bound, Some(1.0));
        assert!(r.to_string().contains("grid_resolution=0.05"));
    }

    #[test]
    fn band_pieces_cover_exactly() {
        let boxes = [([-1.0, 1.0], [-1.0, 1.0]), ([-0.5, 2.0], [-1.5, 0.3]), ([0.0, 3.0], [1.0, 1.5])];
        for (bx, by) in boxes {
            for (lo, hi) in [(0.2, 0.9), (0.05, 4.0), (1.0, 1.0)] {
                let set = AdmissibleSet::band(bx, by, lo, hi).unwrap();
                let pieces = band_pieces(bx, by, lo, hi);
                // every mapped point is admissible
                for p in &pieces {
                    let (ur, _) = p.rect();
                    for i in 0..=20 {
                        for j in 0..=20 {
                            let u = ur[0] + (ur[1] - ur[0]) * i as f64 / 20.0;
                            let (x, y) = p.map(u, j as f64 / 20.0);
                            let d = (y - x).abs();
                            assert!(x >= bx[0] - 1e-12 && x <= bx[1] + 1e-12);
                            assert!(y >= by[0] - 1e-12 && y <= by[1] + 1e-12);
                            assert!(d >= lo - 1e-12 && d <= hi + 1e-12);
                        }
                    }
                }
                // every admissible grid point has a preimage
                for i in 0..=60 {
                    for j in 0..=60 {
                        let x = bx[0] + (bx[1] - bx[0]) * i as f64 / 60.0;
                        let y = by[0] + (by[1] - by[0]) * j as f64 / 60.0;
                        if !set.contains(x, y) {
                            continue;
                        }
                        let d = y - x;
                        let hit = pieces.iter().any(|p| match p {
                            Piece::Band { d: r, .. } => {
                                let (a, b) = Piece::span(bx, by, d);
                                d >= r[0] - 1e-12 && d <= r[1] + 1e-12 && x >= a - 1e-12 && x <= b + 1e-12
                            }
                            Piece::Box { .. } => false,
                        });
                        assert!(hit, "({x}, {y}) uncovered");
                    }
                }
            }
        }
    }

    #[test]
    fn custom_set_is_sampled() {
        let g = uca20();
        let set = AdmissibleSet::custom([-1.0, 1.0], [-1.0, 1.0], |x, y| (x - y).abs() >= 0.8);
        let b = general_beta(&g, &set, 0.05).unwrap();
        let band = general_beta(&g, &AdmissibleSet::band([-1.0, 1.0], [-1.0, 1.0], 0.8, 2.0).unwrap(), 0.05).unwrap();
        assert!((b.lower - band.lower).abs() <= 1e-3 * band.upper);
    }
}
