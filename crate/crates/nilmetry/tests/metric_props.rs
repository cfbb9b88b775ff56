//! Gauge, quasi-metric, and distance-estimator properties.

use std::sync::Arc;

use nilmetry::algebra::{make_builtin, GradedLieAlgebra, GroupPoint};
use nilmetry::distance::{
    distance_upper_bound, riemannian_path_length, DistanceMode, DistanceOptions, PathSpec,
};
use nilmetry::heisenberg::HPoint;
use nilmetry::metrics::{
    estimate_triangle_constant, koranyi_distance, HomogeneousGauge,
};
use nilmetry::sample::{DomainShape, PairMode, PointSampler, SamplerConfig};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn heis() -> Arc<GradedLieAlgebra> {
    Arc::new(make_builtin("heisenberg3").unwrap())
}

fn gp(coords: &[f64]) -> GroupPoint {
    GroupPoint::new(coords.to_vec())
}

fn box_sampler(alg: Arc<GradedLieAlgebra>, seed: u64, count: usize) -> PointSampler {
    PointSampler::new(
        alg,
        SamplerConfig {
            seed,
            domain: DomainShape::Box { radius: 10.0 },
            pair_mode: PairMode::Uniform,
            count,
        },
    )
}

proptest! {
    #[test]
    fn norm_is_homogeneous(coords in prop::collection::vec(-10.0..10.0f64, 3),
                           lambda in 0.01..100.0f64) {
        let alg = heis();
        let gauge = HomogeneousGauge::new(alg.clone());
        let n = gp(&coords);
        let lhs = gauge.norm(&alg.dilation(lambda, &n));
        let rhs = lambda * gauge.norm(&n);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn koranyi_is_homogeneous_and_symmetric(
        a in prop::collection::vec(-10.0..10.0f64, 3),
        b in prop::collection::vec(-10.0..10.0f64, 3),
        s in 0.01..100.0f64,
    ) {
        let p = HPoint::new(a[0], a[1], a[2]);
        let q = HPoint::new(b[0], b[1], b[2]);
        let d = koranyi_distance(&p, &q);
        prop_assert!((koranyi_distance(&q, &p) - d).abs() <= 1e-12 * d.max(1.0));
        let ds = koranyi_distance(&p.dilate(s), &q.dilate(s));
        prop_assert!((ds - s * d).abs() <= 1e-11 * (s * d).max(1.0));
    }
}

#[test]
fn dh_left_invariance_thousand_samples() {
    let alg = heis();
    let gauge = HomogeneousGauge::new(alg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut draw = || {
        gp(&[
            20.0 * rng.random::<f64>() - 10.0,
            20.0 * rng.random::<f64>() - 10.0,
            20.0 * rng.random::<f64>() - 10.0,
        ])
    };
    for _ in 0..1000 {
        let (g, x, y) = (draw(), draw(), draw());
        let base = gauge.distance(&x, &y);
        let moved = gauge.distance(&alg.bch_product(&g, &x), &alg.bch_product(&g, &y));
        assert!(
            (base - moved).abs() <= 1e-12 * base.max(1.0),
            "left-invariance residual {}",
            (base - moved).abs()
        );
    }
}

#[test]
fn koranyi_left_invariance_and_triangle_inequality() {
    use nilmetry::heisenberg::h_mul;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut draw = || {
        HPoint::new(
            20.0 * rng.random::<f64>() - 10.0,
            20.0 * rng.random::<f64>() - 10.0,
            20.0 * rng.random::<f64>() - 10.0,
        )
    };
    // Left invariance.
    for _ in 0..1000 {
        let (g, x, y) = (draw(), draw(), draw());
        let base = koranyi_distance(&x, &y);
        let moved = koranyi_distance(&h_mul(&g, &x), &h_mul(&g, &y));
        assert!((base - moved).abs() <= 1e-12 * base.max(1.0));
    }
    // The Korányi gauge is an honest metric: triangle inequality on 10⁵
    // sampled triples with violation tolerance 1e−9.
    for _ in 0..100_000 {
        let (a, b, c) = (draw(), draw(), draw());
        let direct = koranyi_distance(&a, &c);
        let via = koranyi_distance(&a, &b) + koranyi_distance(&b, &c);
        assert!(direct <= via + 1e-9, "triangle violation: {direct} > {via}");
    }
}

#[test]
fn triangle_estimate_nondecreasing_and_stable() {
    let alg = heis();
    let gauge = HomogeneousGauge::new(alg.clone());
    let sampler = box_sampler(alg, 31, 100_000);
    // Same seed: a larger sample is a superset, so the estimate is
    // nondecreasing under union.
    let small = estimate_triangle_constant(&gauge, &sampler, 25_000).unwrap();
    let mid = estimate_triangle_constant(&gauge, &sampler, 50_000).unwrap();
    let large = estimate_triangle_constant(&gauge, &sampler, 100_000).unwrap();
    assert!(mid.m_hat >= small.m_hat);
    assert!(large.m_hat >= mid.m_hat);
    // Doubling stability within ±5%.
    assert!(
        (large.m_hat - mid.m_hat) / mid.m_hat <= 0.05,
        "triangle constant unstable: {} -> {}",
        mid.m_hat,
        large.m_hat
    );
    assert!(large.m_hat >= 1.0);
}

#[test]
fn riemannian_length_examples() {
    let alg = make_builtin("abelian(2)").unwrap();
    let path = PathSpec::new(vec![GroupPoint::zeros(2), gp(&[3.0, 4.0])], 3).unwrap();
    assert!((riemannian_path_length(&alg, &path) - 5.0).abs() <= 1e-12);

    let heis = make_builtin("heisenberg3").unwrap();
    for c in [2.0, -11.0] {
        let path = PathSpec::new(vec![GroupPoint::zeros(3), gp(&[0.0, 0.0, c])], 6).unwrap();
        assert!((riemannian_path_length(&heis, &path) - c.abs()).abs() <= 1e-12);
    }
}

#[test]
fn riemannian_refinement_monotone_within_tolerance() {
    let alg = heis();
    let pts = vec![
        GroupPoint::zeros(3),
        gp(&[1.0, 2.0, 0.5]),
        gp(&[-1.0, 1.0, -2.0]),
    ];
    let mut prev = 0.0;
    for refinement in 0..8 {
        let len = riemannian_path_length(&alg, &PathSpec::new(pts.clone(), refinement).unwrap());
        if refinement > 0 {
            assert!(len >= prev - 1e-9, "refinement decreased length: {prev} -> {len}");
        }
        prev = len;
    }
}

#[test]
fn distance_upper_bound_carnot_dominates_projection_gap() {
    let alg = heis();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x = gp(&[
            4.0 * rng.random::<f64>() - 2.0,
            4.0 * rng.random::<f64>() - 2.0,
            4.0 * rng.random::<f64>() - 2.0,
        ]);
        let y = gp(&[
            4.0 * rng.random::<f64>() - 2.0,
            4.0 * rng.random::<f64>() - 2.0,
            4.0 * rng.random::<f64>() - 2.0,
        ]);
        let res = distance_upper_bound(
            &alg,
            &x,
            &y,
            DistanceMode::Carnot,
            &DistanceOptions { budget: 600, seed: 1, refinement: 4 },
        )
        .unwrap();
        let gap = ((y.coords()[0] - x.coords()[0]).powi(2)
            + (y.coords()[1] - x.coords()[1]).powi(2))
        .sqrt();
        assert!(res.value >= gap - 1e-9);
        // The Riemannian distance is dominated by the Carnot distance, so
        // its estimate should not exceed the horizontal one by much; a
        // loose sanity factor keeps this robust.
        let riem = distance_upper_bound(
            &alg,
            &x,
            &y,
            DistanceMode::Riemannian,
            &DistanceOptions { budget: 600, seed: 1, refinement: 4 },
        )
        .unwrap();
        assert!(riem.value <= res.value + 1e-9);
    }
}

#[test]
fn carnot_mode_rejects_ungraded_spans() {
    // dims (1, 1): [V1, V1] = 0 cannot span V2, so horizontal corrections
    // must fail.
    let alg = nilmetry::algebra::GradedLieAlgebra::from_parts("flat2", &[1, 1], &[]).unwrap();
    let err = distance_upper_bound(
        &alg,
        &GroupPoint::zeros(2),
        &gp(&[0.0, 1.0]),
        DistanceMode::Carnot,
        &DistanceOptions::default(),
    );
    assert!(err.is_err());
}
