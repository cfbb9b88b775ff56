//! Lipschitz lifts of planar maps to the Heisenberg group.
//!
//! A map F of ℍ is a lift of f : ℝ² → ℝ² when f ∘ π = π ∘ F. A Lipschitz f
//! admits a Lipschitz lift exactly when det(Df) is a.e. a constant λ, and
//! the lift is unique up to a vertical shift: F(z, t) = (f(z), λt + h₀(z))
//! with the potential h₀ determined by
//!
//! ```text
//! ∇h₀(x, y) = (−2λy, 2λx)ᵀ − 2 · Df* · (−f₂(x, y), f₁(x, y))ᵀ   a.e.
//! ```
//!
//! h₀ is recovered by integrating ∇h₀ from the origin along the two
//! axis-parallel paths; their disagreement is a discrete curl test and
//! signals a non-constant Jacobian determinant. This implementation
//! normalises h₀(0) = 0, so comparisons against other normalisations go
//! through differences.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::heisenberg::HPoint;
use crate::numeric::adaptive_simpson;

type PlanarFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
type JacobianFn = Arc<dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync>;
type LocusFn = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;

/// A planar map with a declared constant Jacobian determinant, the input to
/// the lift machinery.
#[derive(Clone)]
pub struct PlanarMap {
    name: String,
    f: PlanarFn,
    /// Analytic Jacobian when available; otherwise central finite
    /// differences with `fd_step` relative step are used.
    jacobian: Option<JacobianFn>,
    inverse: Option<PlanarFn>,
    /// Declared a.e. value of det(Df).
    lambda: f64,
    /// Closed null set where f is not differentiable, when declared.
    non_smooth: Option<LocusFn>,
    fd_step: f64,
}

impl std::fmt::Debug for PlanarMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PlanarMap({}, det = {})", self.name, self.lambda)
    }
}

impl PlanarMap {
    /// The identity plane map (λ = 1).
    pub fn identity() -> Self {
        PlanarMap {
            name: "id".into(),
            f: Arc::new(|x, y| (x, y)),
            jacobian: Some(Arc::new(|_, _| [[1.0, 0.0], [0.0, 1.0]])),
            inverse: Some(Arc::new(|x, y| (x, y))),
            lambda: 1.0,
            non_smooth: None,
            fd_step: 1e-6,
        }
    }

    /// The planar part of the stretch map: (x, y) ↦ (λx, y/λ), det = 1.
    pub fn stretch(lambda: f64) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "stretch parameter must be positive, got {lambda}"
            )));
        }
        Ok(PlanarMap {
            name: format!("f_lambda:{lambda}"),
            f: Arc::new(move |x, y| (lambda * x, y / lambda)),
            jacobian: Some(Arc::new(move |_, _| [[lambda, 0.0], [0.0, 1.0 / lambda]])),
            inverse: Some(Arc::new(move |x, y| (x / lambda, lambda * y))),
            lambda: 1.0,
            non_smooth: None,
            fd_step: 1e-6,
        })
    }

    /// The worked biLipschitz example: f(x + iy) = (x + g(y)) + iy with
    /// g(y) = y on |y| ≤ 1 and g(y) = y^{1/3} beyond, det ≡ 1. Not
    /// differentiable on |y| = 1.
    pub fn shear_example() -> Self {
        fn g(y: f64) -> f64 {
            if y.abs() <= 1.0 {
                y
            } else {
                y.signum() * y.abs().powf(1.0 / 3.0)
            }
        }
        fn g_prime(y: f64) -> f64 {
            if y.abs() <= 1.0 {
                1.0
            } else {
                y.abs().powf(-2.0 / 3.0) / 3.0
            }
        }
        PlanarMap {
            name: "paper_example".into(),
            f: Arc::new(|x, y| (x + g(y), y)),
            jacobian: Some(Arc::new(|_, y| [[1.0, g_prime(y)], [0.0, 1.0]])),
            inverse: Some(Arc::new(|u, v| (u - g(v), v))),
            lambda: 1.0,
            non_smooth: Some(Arc::new(|_, y| (y.abs() - 1.0).abs() < 1e-12)),
            fd_step: 1e-6,
        }
    }

    /// A custom map with declared determinant; Jacobians fall back to
    /// finite differences unless supplied.
    pub fn custom(
        name: &str,
        f: PlanarFn,
        lambda: f64,
        jacobian: Option<JacobianFn>,
        inverse: Option<PlanarFn>,
        non_smooth: Option<LocusFn>,
    ) -> Self {
        PlanarMap {
            name: name.into(),
            f,
            jacobian,
            inverse,
            lambda,
            non_smooth,
            fd_step: 1e-6,
        }
    }

    /// A bilinearly interpolated map from tabulated rows `x y f1 f2` on a
    /// rectangular grid. An optional first line `lambda <value>` declares
    /// the determinant; otherwise it is estimated at the grid centre.
    pub fn from_grid_text(name: &str, text: &str) -> Result<Self> {
        let grid = GridData::parse(text)?;
        let lambda = grid.declared_lambda;
        let grid = Arc::new(grid);
        let g = grid.clone();
        let f: PlanarFn = Arc::new(move |x, y| g.eval(x, y));
        let mut map = PlanarMap {
            name: name.into(),
            f,
            jacobian: None,
            inverse: None,
            lambda: lambda.unwrap_or(0.0),
            non_smooth: None,
            fd_step: 1e-6,
        };
        if lambda.is_none() {
            let (cx, cy) = grid.center();
            map.lambda = det_estimate(&map, cx, cy, 1e-4);
        }
        Ok(map)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The declared a.e. Jacobian determinant λ.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.f)(x, y)
    }

    pub fn eval_inverse(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        match &self.inverse {
            Some(inv) => Ok(inv(x, y)),
            None => Err(Error::NoInverse(format!("planar map {}", self.name))),
        }
    }

    /// True when (x, y) lies on the declared non-differentiability locus.
    pub fn on_non_smooth_locus(&self, x: f64, y: f64) -> bool {
        self.non_smooth.as_ref().map(|p| p(x, y)).unwrap_or(false)
    }

    /// Df at (x, y): analytic when declared, else central differences with
    /// relative step `fd_step`.
    pub fn jacobian_at(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        if let Some(j) = &self.jacobian {
            return j(x, y);
        }
        let h = self.fd_step * x.abs().max(y.abs()).max(1.0);
        let (f1p, f2p) = self.eval(x + h, y);
        let (f1m, f2m) = self.eval(x - h, y);
        let (g1p, g2p) = self.eval(x, y + h);
        let (g1m, g2m) = self.eval(x, y - h);
        [
            [(f1p - f1m) / (2.0 * h), (g1p - g1m) / (2.0 * h)],
            [(f2p - f2m) / (2.0 * h), (g2p - g2m) / (2.0 * h)],
        ]
    }
}

/// Central finite-difference estimate of det(Df) with explicit step.
pub fn det_estimate(f: &PlanarMap, x: f64, y: f64, step: f64) -> f64 {
    assert!(step > 0.0, "finite-difference step must be positive");
    let (f1p, f2p) = f.eval(x + step, y);
    let (f1m, f2m) = f.eval(x - step, y);
    let (g1p, g2p) = f.eval(x, y + step);
    let (g1m, g2m) = f.eval(x, y - step);
    let fx = ((f1p - f1m) / (2.0 * step), (f2p - f2m) / (2.0 * step));
    let fy = ((g1p - g1m) / (2.0 * step), (g2p - g2m) / (2.0 * step));
    fx.0 * fy.1 - fx.1 * fy.0
}

/// ∇h₀ at z, flagged with an error when z lies on the declared
/// non-differentiability locus.
pub fn lift_gradient(f: &PlanarMap, x: f64, y: f64) -> Result<(f64, f64)> {
    if f.on_non_smooth_locus(x, y) {
        return Err(Error::InvalidParameter(format!(
            "({x}, {y}) lies on the non-differentiability locus of {}",
            f.name()
        )));
    }
    Ok(lift_gradient_unchecked(f, x, y))
}

/// ∇h₀ evaluated without the locus flag; used by quadrature, where isolated
/// locus hits have measure zero.
pub fn lift_gradient_unchecked(f: &PlanarMap, x: f64, y: f64) -> (f64, f64) {
    let lambda = f.lambda();
    let (f1, f2) = f.eval(x, y);
    let j = f.jacobian_at(x, y);
    // Df* (−f₂, f₁)ᵀ with Df* the transpose of Df.
    let v = (-f2, f1);
    let dfs = (j[0][0] * v.0 + j[1][0] * v.1, j[0][1] * v.0 + j[1][1] * v.1);
    (-2.0 * lambda * y - 2.0 * dfs.0, 2.0 * lambda * x - 2.0 * dfs.1)
}

/// Discrete curl of ∇h₀ at (x, y): ∂x(∇h₀)_y − ∂y(∇h₀)_x by central
/// differences. Vanishes off the locus when det(Df) is constant.
pub fn discrete_curl(f: &PlanarMap, x: f64, y: f64, h: f64) -> f64 {
    let gy_xp = lift_gradient_unchecked(f, x + h, y).1;
    let gy_xm = lift_gradient_unchecked(f, x - h, y).1;
    let gx_yp = lift_gradient_unchecked(f, x, y + h).0;
    let gx_ym = lift_gradient_unchecked(f, x, y - h).0;
    (gy_xp - gy_xm) / (2.0 * h) - (gx_yp - gx_ym) / (2.0 * h)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureConfig {
    /// Absolute tolerance per integration segment.
    pub tol: f64,
    pub max_depth: u32,
    /// Allowed disagreement between the two axis-parallel paths before the
    /// field is declared non-integrable.
    pub path_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { tol: 1e-9, max_depth: 48, path_tol: 1e-6 }
    }
}

/// A planar map together with its lift F(z, t) = (f(z), λt + h₀(z)),
/// caching h₀ per queried point. The cache is read-mostly and idempotent:
/// concurrent fills recompute the same value.
pub struct LiftedMap {
    f: PlanarMap,
    quad: QuadratureConfig,
    cache: RwLock<HashMap<(u64, u64), f64>>,
}

impl LiftedMap {
    pub fn new(f: PlanarMap) -> Self {
        Self::with_config(f, QuadratureConfig::default())
    }

    pub fn with_config(f: PlanarMap, quad: QuadratureConfig) -> Self {
        LiftedMap { f, quad, cache: RwLock::new(HashMap::new()) }
    }

    pub fn planar(&self) -> &PlanarMap {
        &self.f
    }

    /// h₀(z) normalised to h₀(0) = 0: the average of the two axis-parallel
    /// path integrals of ∇h₀ from the origin, which must agree within
    /// `path_tol` (scaled) or the map is rejected as non-integrable.
    pub fn h0(&self, x: f64, y: f64) -> Result<f64> {
        let key = (x.to_bits(), y.to_bits());
        if let Some(v) = self.cache.read().expect("lift cache poisoned").get(&key) {
            return Ok(*v);
        }
        let f = &self.f;
        let quad = &self.quad;
        let gx = |xx: f64, yy: f64| lift_gradient_unchecked(f, xx, yy).0;
        let gy = |xx: f64, yy: f64| lift_gradient_unchecked(f, xx, yy).1;
        // Path A: (0,0) → (x,0) → (x,y); path B: (0,0) → (0,y) → (x,y).
        let seg = |g: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            adaptive_simpson(&|s| g(s), a, b, quad.tol, quad.max_depth).0
        };
        let path_a = seg(&|s| gx(s, 0.0), 0.0, x) + seg(&|s| gy(x, s), 0.0, y);
        let path_b = seg(&|s| gy(0.0, s), 0.0, y) + seg(&|s| gx(s, y), 0.0, x);
        let scale = 1.0 + path_a.abs().max(path_b.abs());
        if (path_a - path_b).abs() > self.quad.path_tol * scale {
            return Err(Error::NotIntegrable {
                disagreement: (path_a - path_b).abs(),
                tolerance: self.quad.path_tol * scale,
            });
        }
        let value = 0.5 * (path_a + path_b);
        self.cache
            .write()
            .expect("lift cache poisoned")
            .insert(key, value);
        Ok(value)
    }

    /// The lift F(z, t) = (f(z), λt + h₀(z)). π ∘ F = f ∘ π holds exactly
    /// by construction.
    pub fn apply(&self, p: &HPoint) -> Result<HPoint> {
        let (u, v) = self.f.eval(p.x, p.y);
        let h = self.h0(p.x, p.y)?;
        Ok(HPoint::new(u, v, self.f.lambda() * p.t + h))
    }

    /// The lift shifted vertically by τ — by uniqueness, every other
    /// Lipschitz lift of the same planar map.
    pub fn apply_shifted(&self, p: &HPoint, tau: f64) -> Result<HPoint> {
        let base = self.apply(p)?;
        Ok(HPoint::new(base.x, base.y, base.t + tau))
    }

    /// The inverse lift F⁻¹(w, s) = (f⁻¹(w), (s − h₀(f⁻¹(w))) / λ), when
    /// the planar map has an inverse.
    pub fn apply_inverse(&self, p: &HPoint) -> Result<HPoint> {
        let (u, v) = self.f.eval_inverse(p.x, p.y)?;
        let h = self.h0(u, v)?;
        Ok(HPoint::new(u, v, (p.t - h) / self.f.lambda()))
    }
}

struct GridData {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// f values in row-major (y-major) order: value[(iy, ix)].
    f1: Vec<f64>,
    f2: Vec<f64>,
    declared_lambda: Option<f64>,
}

impl GridData {
    fn parse(text: &str) -> Result<Self> {
        let mut declared_lambda = None;
        let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("lambda") {
                declared_lambda = Some(rest.trim().parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad lambda on line {}", lineno + 1))
                })?);
                continue;
            }
            let parts: Vec<f64> = line
                .split_whitespace()
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| {
                    Error::InvalidParameter(format!(
                        "grid line {} is not `x y f1 f2`",
                        lineno + 1
                    ))
                })?;
            if parts.len() != 4 {
                return Err(Error::InvalidParameter(format!(
                    "grid line {} has {} fields, expected 4",
                    lineno + 1,
                    parts.len()
                )));
            }
            rows.push((parts[0], parts[1], parts[2], parts[3]));
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput("planar grid file".into()));
        }
        let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ys.dedup();
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::InvalidParameter(
                "planar grid needs at least a 2x2 lattice".into(),
            ));
        }
        if rows.len() != xs.len() * ys.len() {
            return Err(Error::InvalidParameter(format!(
                "grid is not rectangular: {} rows for {} x {} lattice",
                rows.len(),
                xs.len(),
                ys.len()
            )));
        }
        let mut f1 = vec![f64::NAN; xs.len() * ys.len()];
        let mut f2 = vec![f64::NAN; xs.len() * ys.len()];
        for (x, y, a, b) in rows {
            let ix = xs.iter().position(|&v| v == x).unwrap();
            let iy = ys.iter().position(|&v| v == y).unwrap();
            f1[iy * xs.len() + ix] = a;
            f2[iy * xs.len() + ix] = b;
        }
        if f1.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter(
                "grid has duplicate or missing lattice points".into(),
            ));
        }
        Ok(GridData { xs, ys, f1, f2, declared_lambda })
    }

    fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.xs[0] + self.xs[self.xs.len() - 1]),
            0.5 * (self.ys[0] + self.ys[self.ys.len() - 1]),
        )
    }

    fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let ix = bracket_index(&self.xs, x);
        let iy = bracket_index(&self.ys, y);
        let (x0, x1) = (self.xs[ix], self.xs[ix + 1]);
        let (y0, y1) = (self.ys[iy], self.ys[iy + 1]);
        let tx = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        let ty = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
        let at = |grid: &[f64], jx: usize, jy: usize| grid[jy * self.xs.len() + jx];
        let lerp2 = |grid: &[f64]| {
            let a = at(grid, ix, iy) * (1.0 - tx) + at(grid, ix + 1, iy) * tx;
            let b = at(grid, ix, iy + 1) * (1.0 - tx) + at(grid, ix + 1, iy + 1) * tx;
            a * (1.0 - ty) + b * ty
        };
        (lerp2(&self.f1), lerp2(&self.f2))
    }
}

fn bracket_index(xs: &[f64], x: f64) -> usize {
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => i.saturating_sub(1).min(xs.len() - 2),
    }
}
