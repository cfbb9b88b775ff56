//! The 3-dimensional Heisenberg group ℍ = ℂ × ℝ.
//!
//! The coordinate product is
//!
//! ```text
//! (z₁, t₁) * (z₂, t₂) = (z₁ + z₂, t₁ + t₂ + 2 Im(z₁ z̄₂)),
//! ```
//!
//! which agrees bitwise with the CBH product of the `heisenberg3` builtin
//! under the identification (x, y, t) ↔ (x + iy, t). The module also houses
//! the inversion `j`, the stretch automorphisms `f_λ`, their inversion
//! conjugates `F_λ = j ∘ f_λ ∘ j` (biLipschitz maps that do not coarsely
//! preserve the vertical foliation), the boundary quasi-metric `d₂`, and
//! vertical-line image analysis.

use crate::algebra::GroupPoint;
use crate::error::{Error, Result};
use crate::exec;
use crate::metrics::{koranyi_distance, koranyi_gauge};
use crate::numeric::min_enclosing_circle;

/// A point of ℍ with z = x + iy and vertical coordinate t.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        HPoint { x, y, t }
    }

    pub fn zero() -> Self {
        HPoint { x: 0.0, y: 0.0, t: 0.0 }
    }

    pub fn is_origin(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.t == 0.0
    }

    /// The horizontal projection π(z, t) = z.
    pub fn pi(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    /// The dilation δ_a(z, t) = (a z, a² t).
    pub fn dilate(&self, a: f64) -> Self {
        assert!(a > 0.0, "dilation parameter must be positive, got {a}");
        HPoint { x: a * self.x, y: a * self.y, t: a * a * self.t }
    }

    /// Conversion from `heisenberg3` exponential coordinates.
    pub fn from_group_point(p: &GroupPoint) -> Self {
        assert!(p.dim() == 3, "expected a 3-dimensional point, got dim {}", p.dim());
        let c = p.coords();
        HPoint { x: c[0], y: c[1], t: c[2] }
    }

    pub fn to_group_point(self) -> GroupPoint {
        GroupPoint::new(vec![self.x, self.y, self.t])
    }
}

/// The group product (z₁ + z₂, t₁ + t₂ + 2 Im(z₁ z̄₂)).
pub fn h_mul(p: &HPoint, q: &HPoint) -> HPoint {
    HPoint {
        x: p.x + q.x,
        y: p.y + q.y,
        t: p.t + q.t + 2.0 * (p.y * q.x - p.x * q.y),
    }
}

/// The group inverse (−z, −t).
pub fn h_inv(p: &HPoint) -> HPoint {
    HPoint { x: -p.x, y: -p.y, t: -p.t }
}

/// The Heisenberg inversion
/// j(z, t) = (z / (it − |z|²), −t / (t² + |z|⁴)),
/// evaluated through its real component form
///
/// ```text
/// x₁ = (y t − x |z|²) / (t² + |z|⁴)
/// y₁ = −(x t + y |z|²) / (t² + |z|⁴)
/// t₁ = −t / (t² + |z|⁴)
/// ```
///
/// An involution away from the origin; it swaps 0 and ∞ on the one-point
/// compactification. Errors on the origin, where it is undefined.
pub fn inversion_j(p: &HPoint) -> Result<HPoint> {
    if p.is_origin() {
        return Err(Error::InvalidParameter(
            "the Heisenberg inversion is undefined at the origin".into(),
        ));
    }
    let z2 = p.x * p.x + p.y * p.y;
    let denom = p.t * p.t + z2 * z2;
    Ok(HPoint {
        x: (p.y * p.t - p.x * z2) / denom,
        y: -(p.x * p.t + p.y * z2) / denom,
        t: -p.t / denom,
    })
}

/// The stretch automorphism f_λ(x + iy, t) = (λx + i y/λ, t).
///
/// Area-preserving on ℂ and a group automorphism of ℍ for every λ > 0
/// (panics otherwise).
pub fn f_lambda(lambda: f64, p: &HPoint) -> HPoint {
    assert!(lambda > 0.0, "f_lambda requires λ > 0, got {lambda}");
    HPoint { x: lambda * p.x, y: p.y / lambda, t: p.t }
}

/// The inversion conjugate F_λ = j ∘ f_λ ∘ j with F_λ(0) = 0.
///
/// BiLipschitz for the Korányi metric and dilation-equivariant
/// (δ_a ∘ F_λ = F_λ ∘ δ_a); it maps each vertical line to within bounded
/// distance of a vertical line but with no uniform bound over base points.
pub fn inversion_conjugate(lambda: f64, p: &HPoint) -> HPoint {
    assert!(lambda > 0.0, "inversion conjugate requires λ > 0, got {lambda}");
    if p.is_origin() {
        return HPoint::zero();
    }
    let j1 = inversion_j(p).expect("nonzero point");
    let stretched = f_lambda(lambda, &j1);
    // f_λ is a linear isomorphism on ℂ fixing t, so it cannot map a nonzero
    // point to the origin.
    inversion_j(&stretched).expect("nonzero point")
}

/// A point of the compactified boundary ℍ ∪ {∞}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPoint {
    Finite(HPoint),
    Infinity,
}

/// The explicit boundary quasi-metric surrogate
///
/// ```text
/// d₂(∞, ∞) = 0
/// d₂(x, ∞) = 1 / (1 + d(x, 0))
/// d₂(x, y) = d(x, y) / [(1 + d(x, 0)) (1 + d(y, 0))]
/// ```
///
/// with d the Korányi distance. Symmetric and nonnegative.
pub fn boundary_d2(p: &BoundaryPoint, q: &BoundaryPoint) -> f64 {
    let gauge = |h: &HPoint| koranyi_gauge(h);
    match (p, q) {
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => 0.0,
        (BoundaryPoint::Finite(h), BoundaryPoint::Infinity)
        | (BoundaryPoint::Infinity, BoundaryPoint::Finite(h)) => 1.0 / (1.0 + gauge(h)),
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
            koranyi_distance(a, b) / ((1.0 + gauge(a)) * (1.0 + gauge(b)))
        }
    }
}

/// A sampled segment of the vertical line q_z = π⁻¹(z).
#[derive(Clone, Debug)]
pub struct VerticalLine {
    pub z: (f64, f64),
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl VerticalLine {
    pub fn new(z: (f64, f64), t_min: f64, t_max: f64, samples: usize) -> Result<Self> {
        if !(t_min < t_max) {
            return Err(Error::InvalidParameter(format!(
                "vertical line needs t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if samples < 2 {
            return Err(Error::InvalidParameter(
                "vertical line needs at least 2 samples".into(),
            ));
        }
        Ok(VerticalLine { z, t_min, t_max, samples })
    }

    /// Symmetric range |t| ≤ t_max.
    pub fn symmetric(z: (f64, f64), t_max: f64, samples: usize) -> Result<Self> {
        Self::new(z, -t_max, t_max, samples)
    }

    pub fn points(&self) -> Vec<HPoint> {
        let n = self.samples;
        (0..n)
            .map(|i| {
                let t = self.t_min + (self.t_max - self.t_min) * i as f64 / (n - 1) as f64;
                HPoint::new(self.z.0, self.z.1, t)
            })
            .collect()
    }
}

/// Exact Korányi distance from a point to the full (untruncated) vertical
/// line q_w: the infimum over t of the gauge of (−p)(w, t) is attained where
/// the vertical part cancels, leaving the horizontal offset |w − π(p)|.
pub fn distance_to_vertical_line(p: &HPoint, w: (f64, f64)) -> f64 {
    let dx = w.0 - p.x;
    let dy = w.1 - p.y;
    (dx * dx + dy * dy).sqrt()
}

/// Results of pushing a sampled vertical line through a map.
#[derive(Clone, Debug)]
pub struct LineImageReport {
    /// Euclidean diameter of the π-projection of the image.
    pub pi_diameter: f64,
    /// Base w minimising the one-sided deviation sup_p |w − π(p)| (the
    /// centre of the minimum enclosing circle of the projected image).
    pub best_base: (f64, f64),
    /// The minimised one-sided deviation (enclosing radius); distances to
    /// vertical lines are computed exactly, not against samples.
    pub one_sided_deviation: f64,
    /// Estimate of lim_{|t|→∞} π(image): the midpoint of the projections of
    /// the two range-end samples. For F_λ this approaches f_λ⁻¹(z) as the
    /// range grows.
    pub tail_base: (f64, f64),
    /// Sampled two-sided Hausdorff estimate between the image and q_w at
    /// `best_base`, truncated to the sampled range (reported with it).
    pub hausdorff_estimate: f64,
    pub t_range: (f64, f64),
    pub samples: usize,
}

/// Analyses the image of a vertical line under `map`: projection diameter,
/// best vertical base with its deviation, tail base, and a truncated-range
/// Hausdorff estimate in the Korányi metric.
pub fn line_image_analysis<F>(map: F, line: &VerticalLine) -> Result<LineImageReport>
where
    F: Fn(&HPoint) -> HPoint + Sync + Send,
{
    let pts = line.points();
    if pts.is_empty() {
        return Err(Error::EmptyInput("vertical line sample".into()));
    }
    let image: Vec<HPoint> = exec::indexed_map(pts.len(), |i| map(&pts[i]));
    let proj: Vec<(f64, f64)> = image.iter().map(|p| p.pi()).collect();

    // Diameter of the projection; O(n²) rows in parallel.
    let row_max = exec::indexed_map(proj.len(), |i| {
        let (xi, yi) = proj[i];
        proj[i + 1..]
            .iter()
            .map(|(x, y)| ((x - xi) * (x - xi) + (y - yi) * (y - yi)).sqrt())
            .fold(0.0f64, f64::max)
    });
    let pi_diameter = row_max.into_iter().fold(0.0f64, f64::max);

    let (best_base, one_sided_deviation) = min_enclosing_circle(&proj);
    let tail_base = (
        0.5 * (proj[0].0 + proj[proj.len() - 1].0),
        0.5 * (proj[0].1 + proj[proj.len() - 1].1),
    );

    let base_line = VerticalLine::new(best_base, line.t_min, line.t_max, line.samples)?;
    let base_pts = base_line.points();
    let hausdorff_estimate =
        crate::harness::hausdorff_estimate(&image, &base_pts, |a, b| koranyi_distance(a, b))?;

    Ok(LineImageReport {
        pi_diameter,
        best_base,
        one_sided_deviation,
        tail_base,
        hausdorff_estimate,
        t_range: (line.t_min, line.t_max),
        samples: line.samples,
    })
}
