//! Compares the rayon-backed execution seam against the sequential
//! fallback on the three workloads that dominate harness runtime: pair
//! distance batches, brute-force Hausdorff scans, and full envelope fits.
//!
//! `cargo bench -p nilmetry` runs with the default `parallel` feature; the
//! `*_serial` variants call the always-available sequential twin, so one
//! run yields both sides. (Building with `--no-default-features` makes the
//! library itself take the sequential path everywhere.)

use std::sync::Arc;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};

use nilmetry::algebra::make_builtin;
use nilmetry::exec::{indexed_map, indexed_map_serial};
use nilmetry::harness::fit_ls_envelope;
use nilmetry::heisenberg::VerticalLine;
use nilmetry::maps::{shear_apply, LsMap};
use nilmetry::metrics::{koranyi_distance, HomogeneousGauge};
use nilmetry::sample::{DomainShape, PairMode, PointSampler, SamplerConfig};

fn bench(c: &mut Criterion) {
    let alg = Arc::new(make_builtin("heisenberg3").unwrap());
    let gauge = HomogeneousGauge::new(alg.clone());
    let sampler = PointSampler::new(
        alg.clone(),
        SamplerConfig {
            seed: 7,
            domain: DomainShape::Box { radius: 10.0 },
            pair_mode: PairMode::UnitSeparated,
            count: 10_000,
        },
    );

    let mut g = c.benchmark_group("pair_distances");
    let pair_work = |i: usize| {
        let (x, y) = sampler.pair(i as u64, |a, b| gauge.distance(a, b));
        gauge.distance(&x, &y)
    };
    g.bench_function("parallel", |b| {
        b.iter(|| indexed_map(10_000, pair_work).iter().sum::<f64>())
    });
    g.bench_function("serial", |b| {
        b.iter(|| indexed_map_serial(10_000, pair_work).iter().sum::<f64>())
    });
    g.finish();

    let line_a = VerticalLine::symmetric((0.0, 0.0), 1e3, 400).unwrap().points();
    let line_b = VerticalLine::symmetric((1.0, 0.0), 1e3, 400).unwrap().points();
    let mut g = c.benchmark_group("hausdorff_directed");
    let directed = |i: usize| {
        line_b
            .iter()
            .map(|q| koranyi_distance(&line_a[i], q))
            .fold(f64::INFINITY, f64::min)
    };
    g.bench_function("parallel", |b| {
        b.iter(|| {
            indexed_map(line_a.len(), directed)
                .into_iter()
                .fold(0.0f64, f64::max)
        })
    });
    g.bench_function("serial", |b| {
        b.iter(|| {
            indexed_map_serial(line_a.len(), directed)
                .into_iter()
                .fold(0.0f64, f64::max)
        })
    });
    g.finish();

    // Whole-pipeline fit through the library entry point; which seam it
    // uses is decided by the feature flag the bench was built with.
    let mut g = c.benchmark_group("envelope_fit");
    let shear = LsMap::abs(2, 1);
    g.bench_function(
        if cfg!(feature = "parallel") { "library_parallel" } else { "library_serial" },
        |b| {
            b.iter(|| {
                let alg = alg.clone();
                let shear = shear.clone();
                let gauge = HomogeneousGauge::new(alg.clone());
                fit_ls_envelope(
                    move |n| shear_apply(&alg, &shear, n),
                    move |a, b| gauge.distance(a, b),
                    &sampler,
                )
                .unwrap()
                .l_hat
            })
        },
    );
    g.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(2))
        .sample_size(10);
    targets = bench
);

criterion_main!(benches);
