//! Experiment implementations behind the subcommands.

use std::path::Path;
use std::sync::Arc;

use nilmetry::algebra::{load_algebra, make_builtin, GradedLieAlgebra, GroupPoint};
use nilmetry::distance::{ball_box_diagnostic, DistanceOptions};
use nilmetry::expr::{parse_map_expr, parse_planar};
use nilmetry::harness::{cone_convergence, qi_verify};
use nilmetry::heisenberg::{line_image_analysis, HPoint, VerticalLine};
use nilmetry::lift::{det_estimate, discrete_curl, LiftedMap};
use nilmetry::maps::{cone_deviation_bound, qi_constants_bound};
use nilmetry::metrics::{estimate_triangle_constant, koranyi_distance, HomogeneousGauge};
use nilmetry::report::{
    fmt_f64, write_report, CsvReport, EstimatorReport, EstimatorRow, FoliationReport,
    FoliationRow, LiftReport, LiftRow,
};
use nilmetry::sample::{
    balanced_grid_counts, carnot_box_grid, DomainShape, PairMode, PointSampler, SamplerConfig,
};

use crate::config::{parse_complex, pick, require, FileConfig};
use crate::{
    BallboxArgs, CliError, ConeArgs, FoliationArgs, LiftArgs, QiArgs, TriangleArgs,
};

type Outcome = Result<u8, CliError>;

fn load_group(selector: &str) -> Result<Arc<GradedLieAlgebra>, CliError> {
    let alg = if let Some(path) = selector.strip_prefix('@') {
        load_algebra(Path::new(path))?
    } else {
        make_builtin(selector)?
    };
    Ok(Arc::new(alg))
}

/// A metric closure on group points, by name.
fn metric_fn(
    name: &str,
    alg: &Arc<GradedLieAlgebra>,
) -> Result<Box<dyn Fn(&GroupPoint, &GroupPoint) -> f64 + Sync + Send>, CliError> {
    match name {
        "dh" => {
            let gauge = HomogeneousGauge::new(alg.clone());
            Ok(Box::new(move |a, b| gauge.distance(a, b)))
        }
        "koranyi" => {
            let heis = make_builtin("heisenberg3").expect("builtin");
            if !alg.same_structure(&heis) {
                return Err(CliError::usage(
                    "metric `koranyi` needs the heisenberg3 group".into(),
                ));
            }
            Ok(Box::new(|a, b| {
                koranyi_distance(&HPoint::from_group_point(a), &HPoint::from_group_point(b))
            }))
        }
        other => Err(CliError::usage(format!(
            "unknown metric `{other}` (try `dh` or `koranyi`)"
        ))),
    }
}

fn pair_mode(name: &str) -> Result<PairMode, CliError> {
    match name {
        "uniform" => Ok(PairMode::Uniform),
        "unit" => Ok(PairMode::UnitSeparated),
        "near" => Ok(PairMode::NearPairs),
        other => Err(CliError::usage(format!(
            "unknown pair mode `{other}` (try `uniform`, `unit`, `near`)"
        ))),
    }
}

fn emit<R: CsvReport>(report: &R, out: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = out {
        write_report(report, path)?;
        println!("wrote {}", path.display());
    } else {
        print!("{}", report.to_csv());
    }
    Ok(())
}

pub fn run_qi(args: QiArgs) -> Outcome {
    let file = FileConfig::load(args.common.config.as_deref())?;
    file.check_kind("qi")?;
    let seed = require(args.common.seed, file.seed, "seed")?;
    let group = require(args.group, file.group, "group")?;
    let map_expr = require(args.map, file.map, "map")?;
    let metric_name = pick(args.metric, file.metric, "dh".into());
    let samples = pick(args.samples, file.samples, 20_000);
    let triples = pick(args.triples, file.triples, 20_000);
    let radius = pick(args.radius, file.radius, 10.0);
    let pairs = pair_mode(&pick(args.pairs, file.pairs, "unit".into()))?;
    let claim_spec = args.claim.or(file.claim);
    let out = args.common.out.or(file.out);

    let alg = load_group(&group)?;
    let map = Arc::new(parse_map_expr(&alg, &map_expr)?);
    map.precheck()?;
    let inverse = Arc::new(map.inverse().map_err(|e| {
        CliError::usage(format!("qi needs an invertible map: {e}"))
    })?);
    let metric = metric_fn(&metric_name, &alg)?;
    let sampler = PointSampler::new(
        alg.clone(),
        SamplerConfig {
            seed,
            domain: DomainShape::Box { radius },
            pair_mode: pairs,
            count: samples,
        },
    );

    let claimed = match claim_spec.as_deref() {
        None => None,
        Some("theorem") => {
            let g = map.as_pure_shear().ok_or_else(|| {
                CliError::usage(
                    "`--claim theorem` applies to pure shear maps only".into(),
                )
            })?;
            let gauge = HomogeneousGauge::new(alg.clone());
            let tri_sampler = PointSampler::new(
                alg.clone(),
                SamplerConfig {
                    seed: seed.wrapping_add(1),
                    domain: DomainShape::Box { radius },
                    pair_mode: PairMode::Uniform,
                    count: triples,
                },
            );
            let m_hat = estimate_triangle_constant(&gauge, &tri_sampler, triples)?.m_hat;
            let (l, a) = qi_constants_bound(g.lipschitz(), g.additive(), m_hat, alg.step())?;
            println!(
                "claimed from sampled triangle constant {}: L'={} A'={}",
                fmt_f64(m_hat),
                fmt_f64(l),
                fmt_f64(a)
            );
            Some((l, a))
        }
        Some(pair) => {
            let parts: Vec<&str> = pair.split(',').collect();
            if parts.len() != 2 {
                return Err(CliError::usage(format!(
                    "claim must be `theorem` or `L,A`, got `{pair}`"
                )));
            }
            let l: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad claimed L `{}`", parts[0])))?;
            let a: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad claimed A `{}`", parts[1])))?;
            Some((l, a))
        }
    };

    let fwd = map.applier();
    let inv = inverse.applier();
    let report = qi_verify(fwd, inv, &metric, &sampler, claimed, &metric_name)?;
    emit(&report, out.as_deref())?;
    println!(
        "forward envelope: L={} A={}",
        fmt_f64(report.forward.l_hat),
        fmt_f64(report.forward.a_hat)
    );
    if let Some(inv) = &report.inverse {
        println!(
            "inverse envelope: L={} A={}",
            fmt_f64(inv.l_hat),
            fmt_f64(inv.a_hat)
        );
    }
    if claimed.is_some() {
        let total = report.violations_forward + report.violations_inverse;
        println!("violations: {total}");
        if total > 0 {
            return Ok(2);
        }
    }
    Ok(0)
}

pub fn run_cone(args: ConeArgs) -> Outcome {
    let file = FileConfig::load(args.common.config.as_deref())?;
    file.check_kind("cone")?;
    let _seed = require(args.common.seed, file.seed, "seed")?;
    let group = require(args.group, file.group, "group")?;
    let map_expr = require(args.map, file.map, "map")?;
    let scales: Vec<f64> = match (args.scales, file.scales) {
        (Some(text), _) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::usage(format!("bad scale `{s}`")))
            })
            .collect::<Result<_, _>>()?,
        (None, Some(list)) => list,
        (None, None) => return Err(CliError::usage("missing required `scales`".into())),
    };
    let radius = pick(args.radius, file.radius, 1.0);
    let grid_budget = pick(args.grid, file.grid, 1000);
    let metric_name = pick(args.metric, file.metric, "dh".into());
    let out = args.common.out.or(file.out);

    let alg = load_group(&group)?;
    let map = Arc::new(parse_map_expr(&alg, &map_expr)?);
    map.precheck()?;
    let metric = metric_fn(&metric_name, &alg)?;
    let counts = balanced_grid_counts(&alg, grid_budget);
    let grid = carnot_box_grid(&alg, radius, &counts);

    let alg_fam = alg.clone();
    let map_fam = map.clone();
    let family = move |scale: f64, n: &GroupPoint| {
        let shrunk = alg_fam.dilation(1.0 / scale, n);
        let moved = map_fam
            .apply(&shrunk)
            .expect("map application failed after successful precheck");
        alg_fam.dilation(scale, &moved)
    };

    let report = if let Some(g) = map.as_pure_shear() {
        let g = g.clone();
        let alg_b = alg.clone();
        let bound = move |scale: f64, n: &GroupPoint| cone_deviation_bound(&alg_b, &g, scale, n);
        cone_convergence(family, &metric, &grid, &scales, Some(bound))?
    } else {
        cone_convergence(
            family,
            &metric,
            &grid,
            &scales,
            None::<fn(f64, &GroupPoint) -> f64>,
        )?
    };
    emit(&report, out.as_deref())?;
    if let Some(rate) = report.decay_rate {
        println!("decay rate: {}", fmt_f64(rate));
    }
    if !report.all_pass() {
        println!("bound violated");
        return Ok(2);
    }
    Ok(0)
}

pub fn run_foliation(args: FoliationArgs) -> Outcome {
    let file = FileConfig::load(args.common.config.as_deref())?;
    file.check_kind("foliation")?;
    let _seed = require(args.common.seed, file.seed, "seed")?;
    let map_expr = require(args.map, file.map, "map")?;
    let t_max = pick(args.t_max, file.t_max, 1e6);
    let samples = pick(args.samples, file.samples, 2001);
    let out = args.common.out.or(file.out);

    // Base points: explicit --z list, or q_{n+in} for an n list.
    let mut bases: Vec<(f64, (f64, f64))> = Vec::new();
    let z_spec = args.z.or(file.z);
    let n_spec: Option<Vec<f64>> = match args.n_list {
        Some(text) => Some(
            text.split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::usage(format!("bad n `{s}`")))
                })
                .collect::<Result<_, _>>()?,
        ),
        None => file.n_list,
    };
    match (z_spec, n_spec) {
        (Some(zs), None) => {
            for (i, part) in zs.split(',').enumerate() {
                bases.push(((i + 1) as f64, parse_complex(part)?));
            }
        }
        (None, Some(ns)) => {
            for n in ns {
                bases.push((n, (n, n)));
            }
        }
        (None, None) => {
            return Err(CliError::usage("one of `z` or `n_list` is required".into()))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::usage("`z` and `n_list` are mutually exclusive".into()))
        }
    }

    let alg = load_group("heisenberg3")?;
    let map = Arc::new(parse_map_expr(&alg, &map_expr)?);
    map.precheck()?;
    let apply = map.applier();

    let mut rows = Vec::new();
    for (param, z) in bases {
        let line = VerticalLine::symmetric(z, t_max, samples)?;
        let report = line_image_analysis(
            |p| HPoint::from_group_point(&apply(&p.to_group_point())),
            &line,
        )?;
        println!(
            "param {}: pi_diameter = {}, best base = ({}, {}), hausdorff = {}",
            fmt_f64(param),
            fmt_f64(report.pi_diameter),
            fmt_f64(report.best_base.0),
            fmt_f64(report.best_base.1),
            fmt_f64(report.hausdorff_estimate)
        );
        rows.push(FoliationRow {
            param,
            best_base: report.best_base,
            hausdorff: report.hausdorff_estimate,
            pi_diameter: report.pi_diameter,
            t_range: t_max,
        });
    }
    emit(&FoliationReport { rows }, out.as_deref())?;
    Ok(0)
}

pub fn run_lift(args: LiftArgs) -> Outcome {
    let file = FileConfig::load(args.common.config.as_deref())?;
    file.check_kind("lift")?;
    let _seed = require(args.common.seed, file.seed, "seed")?;
    let planar_name = require(args.planar, file.planar, "planar")?;
    let radius = pick(args.radius, file.radius, 10.0);
    let per_axis = pick(args.grid, file.grid, 9).max(2);
    let curl_tol = pick(args.curl_tol, file.curl_tol, 1e-6);
    let fd_step = pick(args.fd_step, file.fd_step, 1e-4);
    let out = args.common.out.or(file.out);

    let planar = parse_planar(&planar_name)?;
    let lift = LiftedMap::new(planar.clone());
    let mut rows = Vec::new();
    let mut worst_curl = 0.0f64;
    // Cell-centred probes never sit on an axis-aligned locus like |y| = 1.
    for iy in 0..per_axis {
        for ix in 0..per_axis {
            let x = radius * (2.0 * (ix as f64 + 0.5) / per_axis as f64 - 1.0);
            let y = radius * (2.0 * (iy as f64 + 0.5) / per_axis as f64 - 1.0);
            if planar.on_non_smooth_locus(x, y) {
                continue;
            }
            let (f1, f2) = planar.eval(x, y);
            let h0 = lift.h0(x, y)?;
            let det = det_estimate(&planar, x, y, fd_step);
            let curl = discrete_curl(&planar, x, y, fd_step);
            worst_curl = worst_curl.max(curl.abs());
            rows.push(LiftRow { x, y, f1, f2, h0, det, curl });
        }
    }
    emit(&LiftReport { rows }, out.as_deref())?;
    println!("max |curl| = {}", fmt_f64(worst_curl));
    if worst_curl > curl_tol {
        println!("curl tolerance exceeded");
        return Ok(2);
    }
    Ok(0)
}

pub fn run_ballbox(args: BallboxArgs) -> Outcome {
    let file = FileConfig::load(args.common.config.as_deref())?;
    file.check_kind("ballbox")?;
    let seed = require(args.common.seed, file.seed, "seed")?;
    let group = require(args.group, file.group, "group")?;
    let samples = pick(args.samples, file.samples, 120);
    let radius = pick(args.radius, file.radius, 6.0);
    let budget = pick(args.budget, file.budget, 400);
    let out = args.common.out.or(file.out);

    let alg = load_group(&group)?;
    let sampler = PointSampler::new(
        alg.clone(),
        SamplerConfig {
            seed,
            domain: DomainShape::Box { radius },
            pair_mode: PairMode::Uniform,
            count: samples,
        },
    );
    let report = ball_box_diagnostic(
        &alg,
        &sampler,
        samples,
        &DistanceOptions { budget, seed, refinement: 4 },
    )?;
    let witness = report
        .witness_norm_side
        .as_ref()
        .or(report.witness_distance_side.as_ref())
        .map(|w| w.coords().to_vec())
        .unwrap_or_default();
    let est = EstimatorReport {
        rows: vec![EstimatorRow {
            quantity: "ball_box_a".into(),
            value: report.a_hat,
            samples: report.used,
            seed,
            witness,
        }],
    };
    emit(&est, out.as_deref())?;
    println!(
        "fitted a = {} over {} of {} samples",
        fmt_f64(report.a_hat),
        report.used,
        report.total
    );
    Ok(0)
}

pub fn run_triangle(args: TriangleArgs) -> Outcome {
    let file = FileConfig::load(args.common.config.as_deref())?;
    file.check_kind("triangle")?;
    let seed = require(args.common.seed, file.seed, "seed")?;
    let group = require(args.group, file.group, "group")?;
    let metric_name = pick(args.metric, file.metric, "dh".into());
    let samples = pick(args.samples, file.samples, 20_000);
    let radius = pick(args.radius, file.radius, 10.0);
    let out = args.common.out.or(file.out);

    if metric_name != "dh" {
        return Err(CliError::usage(
            "triangle-constant estimation is defined for the `dh` gauge".into(),
        ));
    }
    let alg = load_group(&group)?;
    let gauge = HomogeneousGauge::new(alg.clone());
    let sampler = PointSampler::new(
        alg.clone(),
        SamplerConfig {
            seed,
            domain: DomainShape::Box { radius },
            pair_mode: PairMode::Uniform,
            count: samples,
        },
    );
    let est = estimate_triangle_constant(&gauge, &sampler, samples)?;
    let witness: Vec<f64> = est
        .witness
        .as_ref()
        .map(|[a, b, c]| {
            a.coords()
                .iter()
                .chain(b.coords())
                .chain(c.coords())
                .cloned()
                .collect()
        })
        .unwrap_or_default();
    let report = EstimatorReport {
        rows: vec![EstimatorRow {
            quantity: "triangle_m_hat".into(),
            value: est.m_hat,
            samples: est.sample_count,
            seed,
            witness,
        }],
    };
    emit(&report, out.as_deref())?;
    println!("M_hat = {}", fmt_f64(est.m_hat));
    if est.degenerate {
        println!("warning: every sampled triple was degenerate");
    }
    Ok(0)
}

pub fn run_list() -> Outcome {
    println!("GROUPS");
    println!("  abelian(n)             layers [n], step 1, dim n");
    println!("  filiform3              layers [2, 1, 1], step 3, dim 4");
    println!("  heisenberg3            layers [2, 1], step 2, dim 3");
    println!("  quaternion_heisenberg  layers [4, 3], step 2, dim 7");
    println!("MAPS");
    println!("  aut(@file)        automorphism from an ambient matrix file");
    println!("  dil(<l>)          dilation automorphism, l > 0");
    println!("  flambda:<l>       Heisenberg inversion conjugate of the stretch map (heisenberg3)");
    println!("  id                identity");
    println!("  lift(<planar>)    Lipschitz lift; planar: id | f_lambda:<l> | paper_example | @grid");
    println!("  ltrans(c1,...)    left translation by a point");
    println!("  shear(<g>)        g: abs | power:<a> | zero | const:v1;... | linear:@file");
    println!("METRICS");
    println!("  dh        homogeneous quasi-metric (any group)");
    println!("  koranyi   Koranyi gauge metric (heisenberg3)");
    Ok(0)
}
