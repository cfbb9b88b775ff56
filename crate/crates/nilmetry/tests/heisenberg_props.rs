//! Inversion, conjugate-map, boundary-metric, and lift properties on the
//! Heisenberg group.

use std::sync::Arc;

use nilmetry::algebra::{make_builtin, GradedLieAlgebra};
use nilmetry::heisenberg::{
    boundary_d2, f_lambda, h_mul, inversion_conjugate, inversion_j, line_image_analysis,
    BoundaryPoint, HPoint, VerticalLine,
};
use nilmetry::lift::{LiftedMap, PlanarMap};
use nilmetry::metrics::{koranyi_distance, koranyi_gauge};
use nilmetry::sample::{DomainShape, PairMode, PointSampler, SamplerConfig};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nonzero_point() -> impl Strategy<Value = HPoint> {
    prop::collection::vec(-10.0..10.0f64, 3)
        .prop_map(|c| HPoint::new(c[0], c[1], c[2]))
        .prop_filter("away from the origin", |p| {
            koranyi_gauge(p) > 1e-3
        })
}

proptest! {
    #[test]
    fn inversion_is_an_involution(p in nonzero_point()) {
        let back = inversion_j(&inversion_j(&p).unwrap()).unwrap();
        let err = (back.x - p.x).abs().max((back.y - p.y).abs()).max((back.t - p.t).abs());
        prop_assert!(err <= 1e-12 * koranyi_gauge(&p).max(1.0));
    }

    #[test]
    fn inversion_inverts_the_gauge(p in nonzero_point()) {
        let q = inversion_j(&p).unwrap();
        let product = koranyi_gauge(&p) * koranyi_gauge(&q);
        prop_assert!((product - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn stretch_is_an_automorphism(
        a in prop::collection::vec(-10.0..10.0f64, 3),
        b in prop::collection::vec(-10.0..10.0f64, 3),
        lambda in 0.1..10.0f64,
    ) {
        let p = HPoint::new(a[0], a[1], a[2]);
        let q = HPoint::new(b[0], b[1], b[2]);
        let lhs = f_lambda(lambda, &h_mul(&p, &q));
        let rhs = h_mul(&f_lambda(lambda, &p), &f_lambda(lambda, &q));
        let err = (lhs.x - rhs.x).abs().max((lhs.y - rhs.y).abs()).max((lhs.t - rhs.t).abs());
        prop_assert!(err <= 1e-12 * koranyi_gauge(&lhs).max(1.0));
    }

    #[test]
    fn conjugate_commutes_with_dilations(p in nonzero_point(), a in 0.01..100.0f64) {
        // Coordinate-relative equivariance. The Korányi gauge takes square
        // roots of vertical offsets, so it can only resolve this identity
        // down to √ε ≈ 1e-8; coordinates resolve it to ~1e-14.
        let lambda = 2.0;
        let lhs = inversion_conjugate(lambda, &p).dilate(a);
        let rhs = inversion_conjugate(lambda, &p.dilate(a));
        let scale = koranyi_gauge(&lhs);
        let rel_coord = (lhs.x - rhs.x)
            .abs()
            .max((lhs.y - rhs.y).abs())
            .max(((lhs.t - rhs.t).abs() / scale.max(1e-300)))
            / scale.max(1e-300);
        prop_assert!(rel_coord <= 1e-10, "coordinate equivariance defect {rel_coord}");
        let gauge_ratio = koranyi_distance(&lhs, &rhs)
            / koranyi_distance(&HPoint::zero(), &lhs).max(1e-300);
        prop_assert!(gauge_ratio <= 1e-6, "gauge-ratio defect {gauge_ratio}");
    }

    #[test]
    fn conjugate_equivariance_is_exact_for_dyadic_scales(
        p in nonzero_point(),
        k in -6i32..7,
    ) {
        // Dilations by powers of two are exact in floating point, and every
        // intermediate of j, f_λ, j is homogeneous, so the two routes agree
        // bitwise.
        let a = 2f64.powi(k);
        let lhs = inversion_conjugate(2.0, &p).dilate(a);
        let rhs = inversion_conjugate(2.0, &p.dilate(a));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn d2_swaps_zero_and_infinity_under_inversion(p in nonzero_point()) {
        // With the surrogate metric the two quantities agree exactly: the
        // Korányi gauge of j(p) is the reciprocal of the gauge of p.
        let lhs = boundary_d2(
            &BoundaryPoint::Finite(inversion_j(&p).unwrap()),
            &BoundaryPoint::Finite(HPoint::zero()),
        );
        let rhs = boundary_d2(&BoundaryPoint::Finite(p), &BoundaryPoint::Infinity);
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn conjugate_paper_values_along_the_diagonal() {
    // F₂(n + in, 0) has y-coordinate 4n/17.
    for n in [1.0, 10.0, 100.0] {
        let q = inversion_conjugate(2.0, &HPoint::new(n, n, 0.0));
        assert!((q.y - 4.0 * n / 17.0).abs() <= 1e-9 * n.max(1.0));
        assert!((q.x - 16.0 * n / 17.0).abs() <= 1e-9 * n.max(1.0));
    }
}

#[test]
fn conjugate_asymptotics_along_a_vertical_line() {
    // F₂ on q_{3+4i}: the horizontal part converges to (x/λ, λy) = (1.5, 8)
    // monotonically in error across decades, and t₃/t → 1.
    let lambda = 2.0;
    for sign in [1.0, -1.0] {
        let mut prev = f64::INFINITY;
        for k in 2..=6 {
            let t = sign * 10f64.powi(k);
            let q = inversion_conjugate(lambda, &HPoint::new(3.0, 4.0, t));
            let err = (q.x - 1.5).abs().max((q.y - 8.0).abs());
            assert!(err < prev, "error not decreasing at |t|=1e{k}: {err} vs {prev}");
            prev = err;
            if k == 6 {
                assert!(err <= 1e-2);
                assert!((q.t / t - 1.0).abs() <= 1e-2);
            }
        }
    }
}

#[test]
fn bilipschitz_band_is_stable_under_doubling() {
    // Ratios of F₂ in the Korányi metric over log-radial pairs stay in a
    // band [1/C, C] whose estimate moves < 10% when the sample doubles.
    let alg: Arc<GradedLieAlgebra> = Arc::new(make_builtin("heisenberg3").unwrap());
    let sampler = PointSampler::new(
        alg,
        SamplerConfig {
            seed: 51,
            domain: DomainShape::LogRadial { r_min: 1e-3, r_max: 1e3 },
            pair_mode: PairMode::Uniform,
            count: 100_000,
        },
    );
    let metric = |a: &nilmetry::algebra::GroupPoint, b: &nilmetry::algebra::GroupPoint| {
        koranyi_distance(&HPoint::from_group_point(a), &HPoint::from_group_point(b))
    };
    let band = |count: usize| {
        let mut c: f64 = 1.0;
        for i in 0..count {
            let (x, y) = sampler.pair(i as u64, metric);
            let u = metric(&x, &y);
            if u <= 0.0 {
                continue;
            }
            let fx = inversion_conjugate(2.0, &HPoint::from_group_point(&x));
            let fy = inversion_conjugate(2.0, &HPoint::from_group_point(&y));
            let ratio = koranyi_distance(&fx, &fy) / u;
            c = c.max(ratio).max(1.0 / ratio.max(1e-300));
        }
        c
    };
    let c_half = band(50_000);
    let c_full = band(100_000);
    assert!(c_full.is_finite() && c_full >= 1.0);
    assert!(
        (c_full - c_half) / c_half <= 0.10,
        "band estimate unstable: {c_half} -> {c_full}"
    );
}

#[test]
fn identity_and_lift_preserve_vertical_lines() {
    let line = VerticalLine::symmetric((2.0, -1.0), 1e4, 201).unwrap();
    let lift = LiftedMap::new(PlanarMap::shear_example());
    let report = line_image_analysis(|p| lift.apply(p).unwrap(), &line).unwrap();
    assert_eq!(report.pi_diameter, 0.0);
    // The best base is the planar image of the base point.
    let (fx, fy) = PlanarMap::shear_example().eval(2.0, -1.0);
    assert!((report.best_base.0 - fx).abs() <= 1e-9);
    assert!((report.best_base.1 - fy).abs() <= 1e-9);
}

#[test]
fn conjugate_spreads_vertical_lines_linearly() {
    // π-image diameter of F₂(q_{n+in}) ≥ 0.9 (λ − 2λ/(λ⁴+1)) n, and the
    // per-n one-sided deviations grow at least linearly with slope
    // ≥ 0.9 (λ − 2λ/(λ⁴+1)) / 2.
    let lambda = 2.0f64;
    let expected = lambda - 2.0 * lambda / (lambda.powi(4) + 1.0);
    let mut growth = Vec::new();
    for n in [4.0, 8.0, 16.0] {
        let line = VerticalLine::symmetric((n, n), 1e6, 801).unwrap();
        let report =
            line_image_analysis(|p| inversion_conjugate(lambda, p), &line).unwrap();
        assert!(
            report.pi_diameter >= 0.9 * expected * n,
            "diameter {} below 0.9·{expected}·{n}",
            report.pi_diameter
        );
        growth.push((n, report.one_sided_deviation));
    }
    let slope = nilmetry::harness::fitted_slope(&growth).unwrap();
    assert!(
        slope >= 0.9 * expected / 2.0,
        "one-sided deviation slope {slope} below {}",
        0.9 * expected / 2.0
    );
}

#[test]
fn tail_base_approaches_the_stretch_preimage() {
    // Lemma-style asymptote: the ends of F_λ(q_z) project near
    // f_λ⁻¹(z) = x/λ + iλy, with error shrinking as the range grows.
    let lambda = 2.0;
    let z = (4.0, 4.0);
    let target = (z.0 / lambda, lambda * z.1);
    let mut prev = f64::INFINITY;
    for k in [4, 5, 6] {
        let line = VerticalLine::symmetric(z, 10f64.powi(k), 801).unwrap();
        let report =
            line_image_analysis(|p| inversion_conjugate(lambda, p), &line).unwrap();
        let err = ((report.tail_base.0 - target.0).powi(2)
            + (report.tail_base.1 - target.1).powi(2))
        .sqrt();
        assert!(err < prev, "tail base error not shrinking: {err} vs {prev}");
        prev = err;
    }
    assert!(prev <= 0.1, "tail base error {prev}");
}

#[test]
fn one_sided_deviation_stabilises_across_ranges() {
    // Finite distance from a vertical line, operationalised: growing the
    // range by factors of 10 eventually changes the deviation estimate by
    // ≤ 5% (the tail of the image has closed onto its asymptote).
    let z = (4.0, 4.0);
    let mut values = Vec::new();
    for k in [4, 5, 6] {
        let line = VerticalLine::symmetric(z, 10f64.powi(k), 801).unwrap();
        let report =
            line_image_analysis(|p| inversion_conjugate(2.0, p), &line).unwrap();
        values.push(report.one_sided_deviation);
    }
    let last_change = (values[2] - values[1]).abs() / values[1];
    assert!(
        last_change <= 0.05,
        "deviation did not stabilise: {values:?}"
    );
}

#[test]
fn lift_uniqueness_up_to_vertical_shift() {
    let lift = LiftedMap::new(PlanarMap::shear_example());
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    for _ in 0..50 {
        let p = HPoint::new(
            10.0 * rng.random::<f64>() - 5.0,
            10.0 * rng.random::<f64>() - 5.0,
            10.0 * rng.random::<f64>() - 5.0,
        );
        let base = lift.apply(&p).unwrap();
        let shifted = lift.apply_shifted(&p, 2.5).unwrap();
        // Same projection, constant vertical gap.
        assert_eq!((base.x, base.y), (shifted.x, shifted.y));
        assert!((shifted.t - base.t - 2.5).abs() <= 1e-12);
    }
}

#[test]
fn rescaled_lift_closed_form() {
    // δ_a ∘ F ∘ δ_{1/a}(x + iy, t) = (x + a g(y/a) + iy, t + a² h₀(y/a))
    // for the worked example, with h₀ in the h₀(0) = 0 normalisation.
    let lift = LiftedMap::new(PlanarMap::shear_example());
    let g = |y: f64| {
        if y.abs() <= 1.0 {
            y
        } else {
            y.signum() * y.abs().powf(1.0 / 3.0)
        }
    };
    for a in [0.5, 2.0, 8.0] {
        for (x, y, t) in [(1.0, 2.0, 0.5), (-3.0, 0.25, 4.0), (0.0, -6.0, -2.0)] {
            let p = HPoint::new(x, y, t);
            let shrunk = p.dilate(1.0 / a);
            let lifted = lift.apply(&shrunk).unwrap().dilate(a);
            let expected_x = x + a * g(y / a);
            let expected_t = t + a * a * lift.h0(0.0, y / a).unwrap();
            assert!((lifted.x - expected_x).abs() <= 1e-8);
            assert!((lifted.y - y).abs() <= 1e-12);
            assert!((lifted.t - expected_t).abs() <= 1e-8);
        }
    }
}

#[test]
fn curl_grid_off_locus_is_flat() {
    let f = PlanarMap::shear_example();
    let mut worst = 0.0f64;
    for iy in 0..20 {
        for ix in 0..20 {
            let x = -9.5 + ix as f64;
            let y = -9.5 + iy as f64;
            worst = worst.max(nilmetry::lift::discrete_curl(&f, x, y, 1e-4).abs());
        }
    }
    assert!(worst <= 1e-6, "max |curl| = {worst}");
}
