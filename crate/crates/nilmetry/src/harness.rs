//! Sampling-based verification: large-scale Lipschitz envelopes,
//! quasiisometry checks against claimed constants, asymptotic-cone
//! convergence runs, and brute-force Hausdorff estimates.
//!
//! Everything here is an indexed map over sample indices followed by an
//! associative reduction, so reports are bitwise identical for a fixed
//! [`SamplerConfig`] regardless of worker count.

use crate::algebra::GroupPoint;
use crate::error::{Error, Result};
use crate::exec;
use crate::numeric::{log_log_slope, ls_slope};
use crate::sample::PointSampler;

pub use crate::sample::{carnot_box_grid, balanced_grid_counts, DomainShape, PairMode, SamplerConfig};

/// A fitted one-directional envelope: every sampled pair satisfies
/// `d(F x, F y) ≤ l_hat · d(x, y) + a_hat`, and the fit is minimal over the
/// sample (some pair attains equality; `a_hat` cannot go below zero).
///
/// The canonical fit takes `l_hat` as the largest sampled ratio and
/// `a_hat = 0`: the minimal additive part at that slope.
#[derive(Clone, Debug)]
pub struct EnvelopeFit {
    pub l_hat: f64,
    pub a_hat: f64,
    /// Pair attaining the fitted inequality with equality.
    pub witness: Option<(GroupPoint, GroupPoint)>,
    /// Pairs used (after exclusions).
    pub used: usize,
    /// Zero-distance pairs excluded from the fit.
    pub excluded: usize,
}

/// A sampled pair violating claimed constants.
#[derive(Clone, Debug)]
pub struct Violation {
    pub x: GroupPoint,
    pub y: GroupPoint,
    pub distance: f64,
    pub image_distance: f64,
}

/// Full quasiisometry report: forward and inverse envelopes plus violations
/// of claimed constants, when any were claimed.
#[derive(Clone, Debug)]
pub struct QIReport {
    pub forward: EnvelopeFit,
    pub inverse: Option<EnvelopeFit>,
    pub claimed: Option<(f64, f64)>,
    pub violations_forward: usize,
    pub violations_inverse: usize,
    /// Up to eight violating pairs for diagnosis.
    pub violation_witnesses: Vec<Violation>,
    pub metric_name: String,
    pub seed: u64,
}

fn fit_from_points(
    points: Vec<Option<(f64, f64, GroupPoint, GroupPoint)>>,
) -> Result<EnvelopeFit> {
    let mut l_hat = 0.0f64;
    let mut witness = None;
    let mut used = 0usize;
    let mut excluded = 0usize;
    for item in points {
        match item {
            None => excluded += 1,
            Some((u, v, x, y)) => {
                used += 1;
                let ratio = v / u;
                if ratio > l_hat {
                    l_hat = ratio;
                    witness = Some((x, y));
                }
            }
        }
    }
    if used == 0 {
        return Err(Error::AllPairsDegenerate);
    }
    Ok(EnvelopeFit { l_hat, a_hat: 0.0, witness, used, excluded })
}

/// Fits the minimal large-scale Lipschitz envelope of `map` over sampled
/// pairs. Pairs at zero distance are excluded; an all-excluded sample is an
/// error.
pub fn fit_ls_envelope<F, M>(map: F, metric: M, sampler: &PointSampler) -> Result<EnvelopeFit>
where
    F: Fn(&GroupPoint) -> GroupPoint + Sync + Send,
    M: Fn(&GroupPoint, &GroupPoint) -> f64 + Sync + Send,
{
    let n = sampler.count();
    let points = exec::indexed_map(n, |i| {
        let (x, y) = sampler.pair(i as u64, &metric);
        let u = metric(&x, &y);
        if u <= 0.0 {
            return None;
        }
        let v = metric(&map(&x), &map(&y));
        Some((u, v, x, y))
    });
    fit_from_points(points)
}

/// Runs [`fit_ls_envelope`] on the map and on its declared inverse (the
/// inverse is evaluated on the images of the forward pairs, so the two
/// envelopes compose: `L̂⁺ · L̂⁻ ≥ 1` up to inversion round-off), and counts
/// violations of claimed constants in both directions.
pub fn qi_verify<F, G, M>(
    map: F,
    inverse: G,
    metric: M,
    sampler: &PointSampler,
    claimed: Option<(f64, f64)>,
    metric_name: &str,
) -> Result<QIReport>
where
    F: Fn(&GroupPoint) -> GroupPoint + Sync + Send,
    G: Fn(&GroupPoint) -> GroupPoint + Sync + Send,
    M: Fn(&GroupPoint, &GroupPoint) -> f64 + Sync + Send,
{
    let n = sampler.count();
    let rows = exec::indexed_map(n, |i| {
        let (x, y) = sampler.pair(i as u64, &metric);
        let u = metric(&x, &y);
        let (fx, fy) = (map(&x), map(&y));
        let v = metric(&fx, &fy);
        let w = metric(&inverse(&fx), &inverse(&fy));
        (x, y, fx, fy, u, v, w)
    });

    let forward = fit_from_points(
        rows.iter()
            .map(|(x, y, _, _, u, v, _)| {
                if *u <= 0.0 {
                    None
                } else {
                    Some((*u, *v, x.clone(), y.clone()))
                }
            })
            .collect(),
    )?;
    let inverse_fit = fit_from_points(
        rows.iter()
            .map(|(_, _, fx, fy, _, v, w)| {
                if *v <= 0.0 {
                    None
                } else {
                    Some((*v, *w, fx.clone(), fy.clone()))
                }
            })
            .collect(),
    )?;

    let mut violations_forward = 0usize;
    let mut violations_inverse = 0usize;
    let mut violation_witnesses = Vec::new();
    if let Some((lc, ac)) = claimed {
        for (x, y, _, _, u, v, w) in &rows {
            if *v > lc * *u + ac + 1e-12 {
                violations_forward += 1;
                if violation_witnesses.len() < 8 {
                    violation_witnesses.push(Violation {
                        x: x.clone(),
                        y: y.clone(),
                        distance: *u,
                        image_distance: *v,
                    });
                }
            }
            if *w > lc * *v + ac + 1e-12 {
                violations_inverse += 1;
            }
        }
    }

    Ok(QIReport {
        forward,
        inverse: Some(inverse_fit),
        claimed,
        violations_forward,
        violations_inverse,
        violation_witnesses,
        metric_name: metric_name.to_string(),
        seed: sampler.seed(),
    })
}

/// Sup-distance decay of a map family over a fixed grid as the scale drops.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub scales: Vec<f64>,
    pub sup_distances: Vec<f64>,
    /// Per-scale sup of the supplied bound, when one was given.
    pub bound_values: Vec<Option<f64>>,
    /// Pointwise `distance ≤ bound + 1e-12` per scale (vacuously true
    /// without a bound).
    pub passes: Vec<bool>,
    /// Log-log slope of sup-distance against scale, when defined.
    pub decay_rate: Option<f64>,
}

impl ConvergenceReport {
    pub fn all_pass(&self) -> bool {
        self.passes.iter().all(|p| *p)
    }
}

/// Evaluates `sup_{n ∈ grid} d(n, family(scale, n))` per scale and checks a
/// pointwise bound if supplied. Scales must be strictly decreasing and the
/// grid nonempty.
pub fn cone_convergence<F, M, B>(
    family: F,
    metric: M,
    grid: &[GroupPoint],
    scales: &[f64],
    bound: Option<B>,
) -> Result<ConvergenceReport>
where
    F: Fn(f64, &GroupPoint) -> GroupPoint + Sync + Send,
    M: Fn(&GroupPoint, &GroupPoint) -> f64 + Sync + Send,
    B: Fn(f64, &GroupPoint) -> f64 + Sync + Send,
{
    if grid.is_empty() {
        return Err(Error::EmptyInput("convergence grid".into()));
    }
    if scales.is_empty() {
        return Err(Error::EmptyInput("scale list".into()));
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "scales must be strictly decreasing".into(),
        ));
    }
    let mut sups = Vec::with_capacity(scales.len());
    let mut bounds = Vec::with_capacity(scales.len());
    let mut passes = Vec::with_capacity(scales.len());
    for &scale in scales {
        let rows = exec::indexed_map(grid.len(), |i| {
            let n = &grid[i];
            let d = metric(n, &family(scale, n));
            let b = bound.as_ref().map(|b| b(scale, n));
            let ok = b.map(|b| d <= b + 1e-12).unwrap_or(true);
            (d, b, ok)
        });
        let sup = rows.iter().map(|r| r.0).fold(0.0f64, f64::max);
        let bval = if bound.is_some() {
            Some(rows.iter().filter_map(|r| r.1).fold(0.0f64, f64::max))
        } else {
            None
        };
        let pass = rows.iter().all(|r| r.2);
        sups.push(sup);
        bounds.push(bval);
        passes.push(pass);
    }
    let decay_rate = log_log_slope(
        &scales
            .iter()
            .cloned()
            .zip(sups.iter().cloned())
            .collect::<Vec<_>>(),
    );
    Ok(ConvergenceReport {
        scales: scales.to_vec(),
        sup_distances: sups,
        bound_values: bounds,
        passes,
        decay_rate,
    })
}

/// Brute-force Hausdorff distance between finite point sets: the larger of
/// the two directed sup-inf deviations, O(|A|·|B|).
pub fn hausdorff_estimate<P, M>(a: &[P], b: &[P], metric: M) -> Result<f64>
where
    P: Sync,
    M: Fn(&P, &P) -> f64 + Sync + Send,
{
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("hausdorff point set".into()));
    }
    let directed = |from: &[P], to: &[P]| -> f64 {
        exec::indexed_map(from.len(), |i| {
            to.iter()
                .map(|q| metric(&from[i], q))
                .fold(f64::INFINITY, f64::min)
        })
        .into_iter()
        .fold(0.0f64, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Least-squares slope helper re-exported for growth checks on report data.
pub fn fitted_slope(points: &[(f64, f64)]) -> Option<f64> {
    ls_slope(points)
}
