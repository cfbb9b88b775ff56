//! Homogeneous quasi-norms and quasi-metrics.
//!
//! The homogeneous norm is `|n|_h = Σ_i |π_i(n)|^{1/i}` with the standard
//! Euclidean norm on each layer, and the left-invariant quasi-metric is
//! `d_h(n₁, n₂) = |(−n₁) * n₂|_h`. This is not a metric in general: it obeys
//! only a generalized triangle inequality
//! `d_h(n₁, n₃) ≤ M · [d_h(n₁, n₂) + d_h(n₂, n₃)]` for some constant M ≥ 1
//! depending on the group, which [`estimate_triangle_constant`] bounds from
//! below by sampling. On the 3-dimensional Heisenberg group the Korányi
//! gauge `(|z|⁴ + t²)^{1/4}` induces an honest metric
//! ([`koranyi_distance`]) used as the computable surrogate for the Carnot
//! metric in all Heisenberg experiments; homogeneous metrics on a fixed
//! group are pairwise biLipschitz equivalent, so this only rescales
//! empirical constants.

use std::sync::Arc;

use crate::algebra::{GradedLieAlgebra, GroupPoint};
use crate::error::{Error, Result};
use crate::exec;
use crate::heisenberg::{h_inv, h_mul, HPoint};
use crate::sample::PointSampler;

/// The homogeneous gauge of an algebra, with the Euclidean inner product
/// fixed on every layer.
#[derive(Clone)]
pub struct HomogeneousGauge {
    alg: Arc<GradedLieAlgebra>,
}

impl HomogeneousGauge {
    pub fn new(alg: Arc<GradedLieAlgebra>) -> Self {
        HomogeneousGauge { alg }
    }

    pub fn algebra(&self) -> &Arc<GradedLieAlgebra> {
        &self.alg
    }

    /// |n|_h = Σ_i |π_i(n)|^{1/i}; zero iff n = 0 and δ_λ-homogeneous of
    /// degree 1.
    pub fn norm(&self, n: &GroupPoint) -> f64 {
        let mut total = 0.0;
        for l in 0..self.alg.step() {
            let block = self.alg.layer_norm(n, l);
            total += match l {
                0 => block,
                1 => block.sqrt(),
                _ => block.powf(1.0 / (l as f64 + 1.0)),
            };
        }
        total
    }

    /// d_h(x, y) = |(−x) * y|_h. Left-invariant; symmetry is NOT asserted
    /// (quasi-metric).
    pub fn distance(&self, x: &GroupPoint, y: &GroupPoint) -> f64 {
        self.norm(&self.alg.left_difference(x, y))
    }
}

/// Lower bound on the generalized triangle constant, with the worst witness.
#[derive(Clone, Debug)]
pub struct TriangleConstantEstimate {
    pub m_hat: f64,
    pub sample_count: usize,
    /// Triple attaining the worst ratio, when a non-degenerate one was seen.
    pub witness: Option<[GroupPoint; 3]>,
    /// Set when every sampled triple had a degenerate denominator.
    pub degenerate: bool,
}

/// Estimates the triangle constant of a gauge by maximising
/// `d(n₁, n₃) / (d(n₁, n₂) + d(n₂, n₃))` over sampled triples.
///
/// The estimate starts at 1, which is always attained (take n₂ = n₃), so it
/// is a genuine lower bound for the true constant; it is nondecreasing under
/// sample union. Triples whose denominator falls below 1e−12 are skipped.
pub fn estimate_triangle_constant(
    gauge: &HomogeneousGauge,
    sampler: &PointSampler,
    n_triples: usize,
) -> Result<TriangleConstantEstimate> {
    if n_triples == 0 {
        return Err(Error::InvalidParameter("n_triples must be ≥ 1".into()));
    }
    let per = exec::indexed_map(n_triples, |i| {
        let [a, b, c] = sampler.triple(i as u64);
        let denom = gauge.distance(&a, &b) + gauge.distance(&b, &c);
        if denom < 1e-12 {
            None
        } else {
            Some((gauge.distance(&a, &c) / denom, [a, b, c]))
        }
    });
    let mut m_hat: f64 = 1.0;
    let mut witness = None;
    let mut valid = 0usize;
    for item in per.into_iter().flatten() {
        valid += 1;
        if item.0 > m_hat {
            m_hat = item.0;
            witness = Some(item.1);
        }
    }
    Ok(TriangleConstantEstimate {
        m_hat,
        sample_count: n_triples,
        witness,
        degenerate: valid == 0,
    })
}

/// The Korányi gauge (|z|⁴ + t²)^{1/4} on the 3-dimensional Heisenberg
/// group.
pub fn koranyi_gauge(p: &HPoint) -> f64 {
    let z2 = p.x * p.x + p.y * p.y;
    (z2 * z2 + p.t * p.t).powf(0.25)
}

/// Korányi distance: the gauge of (−p) * q. Symmetric, left-invariant,
/// homogeneous of degree 1 under δ_a, and a true metric.
pub fn koranyi_distance(p: &HPoint, q: &HPoint) -> f64 {
    koranyi_gauge(&h_mul(&h_inv(p), q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_builtin;
    use crate::sample::{DomainShape, PairMode, SamplerConfig};

    fn gp(coords: &[f64]) -> GroupPoint {
        GroupPoint::new(coords.to_vec())
    }

    fn heis() -> Arc<GradedLieAlgebra> {
        Arc::new(make_builtin("heisenberg3").unwrap())
    }

    #[test]
    fn norm_hand_value() {
        let gauge = HomogeneousGauge::new(heis());
        assert_eq!(gauge.norm(&gp(&[3.0, 4.0, 25.0])), 10.0);
        assert_eq!(gauge.norm(&GroupPoint::zeros(3)), 0.0);
    }

    #[test]
    fn norm_homogeneous_under_dilation() {
        let alg = heis();
        let gauge = HomogeneousGauge::new(alg.clone());
        let n = gp(&[0.3, -1.2, 4.5]);
        let scaled = alg.dilation(2.0, &n);
        assert!((gauge.norm(&scaled) - 2.0 * gauge.norm(&n)).abs() <= 1e-12);
    }

    #[test]
    fn dh_hand_value() {
        let gauge = HomogeneousGauge::new(heis());
        let x = gp(&[1.0, 0.0, 0.0]);
        let y = gp(&[1.0, 0.0, 5.0]);
        assert!((gauge.distance(&x, &y) - 5f64.sqrt()).abs() <= 1e-15);
        assert_eq!(gauge.distance(&x, &x), 0.0);
    }

    #[test]
    fn triangle_constant_abelian_is_one() {
        let alg = Arc::new(make_builtin("abelian(4)").unwrap());
        let gauge = HomogeneousGauge::new(alg.clone());
        let sampler = PointSampler::new(
            alg,
            SamplerConfig {
                seed: 11,
                domain: DomainShape::Box { radius: 10.0 },
                pair_mode: PairMode::Uniform,
                count: 2000,
            },
        );
        let est = estimate_triangle_constant(&gauge, &sampler, 2000).unwrap();
        assert!((est.m_hat - 1.0).abs() <= 1e-12, "m_hat = {}", est.m_hat);
        assert!(!est.degenerate);
    }

    #[test]
    fn triangle_constant_heisenberg_exceeds_one() {
        let alg = heis();
        let gauge = HomogeneousGauge::new(alg.clone());
        let sampler = PointSampler::new(
            alg,
            SamplerConfig {
                seed: 5,
                domain: DomainShape::Box { radius: 10.0 },
                pair_mode: PairMode::Uniform,
                count: 5000,
            },
        );
        let est = estimate_triangle_constant(&gauge, &sampler, 5000).unwrap();
        assert!(est.m_hat > 1.0);
        assert!(est.witness.is_some());
    }

    #[test]
    fn koranyi_hand_values() {
        let o = HPoint::zero();
        assert_eq!(koranyi_distance(&o, &HPoint::new(1.0, 0.0, 0.0)), 1.0);
        // (t²)^{1/4} = |t|^{1/2}
        assert_eq!(koranyi_distance(&o, &HPoint::new(0.0, 0.0, 16.0)), 4.0);
        assert_eq!(koranyi_distance(&o, &HPoint::new(0.0, 0.0, 4.0)), 2.0);
        let p = HPoint::new(0.3, 1.0, -2.0);
        assert_eq!(koranyi_distance(&p, &p), 0.0);
    }

    #[test]
    fn koranyi_homogeneous() {
        let o = HPoint::zero();
        let p = HPoint::new(0.7, -0.2, 1.9);
        for a in [0.01, 0.5, 3.0, 40.0] {
            let lhs = koranyi_distance(&o, &p.dilate(a));
            let rhs = a * koranyi_distance(&o, &p);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
