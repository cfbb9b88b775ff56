//! Deterministic seeded sampling.
//!
//! Work item `i` draws from a ChaCha8 substream selected by
//! `set_stream(role << 56 | i)`, so a sampler produces identical points for
//! identical configurations no matter how the work is scheduled or how many
//! workers run it.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{GradedLieAlgebra, GroupPoint};
use crate::metrics::HomogeneousGauge;

/// Domain from which points are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainShape {
    /// Uniform coordinates in [−radius, radius]^dim.
    Box { radius: f64 },
    /// Gauge-radial: a random direction normalised to homogeneous gauge 1 by
    /// a dilation, then dilated to a log-uniform radius in [r_min, r_max].
    LogRadial { r_min: f64, r_max: f64 },
}

/// How pairs are generated for envelope fitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    /// Two independent domain points.
    Uniform,
    /// Pairs at metric distance ≥ 1 (the large-scale branch).
    UnitSeparated,
    /// y = x · δ_ρ(ŵ) with ρ ≤ 1, exercising the d ≤ 1 branch.
    NearPairs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub domain: DomainShape,
    pub pair_mode: PairMode,
    pub count: usize,
}

/// Seeded point/pair/triple source over one algebra.
#[derive(Clone)]
pub struct PointSampler {
    alg: Arc<GradedLieAlgebra>,
    cfg: SamplerConfig,
}

mod role {
    pub const POINT: u64 = 1;
    pub const PAIR: u64 = 2;
    pub const TRIPLE: u64 = 3;
}

impl PointSampler {
    pub fn new(alg: Arc<GradedLieAlgebra>, cfg: SamplerConfig) -> Self {
        PointSampler { alg, cfg }
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn algebra(&self) -> &Arc<GradedLieAlgebra> {
        &self.alg
    }

    pub fn count(&self) -> usize {
        self.cfg.count
    }

    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }

    fn rng(&self, role: u64, idx: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream((role << 56) | (idx & ((1 << 56) - 1)));
        rng
    }

    fn draw_point(&self, rng: &mut ChaCha8Rng) -> GroupPoint {
        let dim = self.alg.dim();
        match self.cfg.domain {
            DomainShape::Box { radius } => {
                let coords = (0..dim)
                    .map(|_| (2.0 * rng.random::<f64>() - 1.0) * radius)
                    .collect();
                GroupPoint::new(coords)
            }
            DomainShape::LogRadial { r_min, r_max } => {
                let gauge = HomogeneousGauge::new(self.alg.clone());
                let dir = loop {
                    let cand = GroupPoint::new(
                        (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect(),
                    );
                    let g = gauge.norm(&cand);
                    if g > 1e-3 {
                        break self.alg.dilation(1.0 / g, &cand);
                    }
                };
                let u = rng.random::<f64>();
                let rho = (r_min.ln() + u * (r_max.ln() - r_min.ln())).exp();
                self.alg.dilation(rho, &dir)
            }
        }
    }

    /// A unit-gauge increment direction.
    fn draw_unit_increment(&self, rng: &mut ChaCha8Rng) -> GroupPoint {
        let dim = self.alg.dim();
        let gauge = HomogeneousGauge::new(self.alg.clone());
        loop {
            let cand =
                GroupPoint::new((0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect());
            let g = gauge.norm(&cand);
            if g > 1e-3 {
                return self.alg.dilation(1.0 / g, &cand);
            }
        }
    }

    /// The `idx`-th sample point.
    pub fn point(&self, idx: u64) -> GroupPoint {
        let mut rng = self.rng(role::POINT, idx);
        self.draw_point(&mut rng)
    }

    /// The `idx`-th sample triple.
    pub fn triple(&self, idx: u64) -> [GroupPoint; 3] {
        let mut rng = self.rng(role::TRIPLE, idx);
        [
            self.draw_point(&mut rng),
            self.draw_point(&mut rng),
            self.draw_point(&mut rng),
        ]
    }

    /// The `idx`-th sample pair under the configured pair mode, measured
    /// with `metric` where the mode requires it.
    pub fn pair<M>(&self, idx: u64, metric: M) -> (GroupPoint, GroupPoint)
    where
        M: Fn(&GroupPoint, &GroupPoint) -> f64,
    {
        let mut rng = self.rng(role::PAIR, idx);
        match self.cfg.pair_mode {
            PairMode::Uniform => {
                let x = self.draw_point(&mut rng);
                let y = self.draw_point(&mut rng);
                (x, y)
            }
            PairMode::UnitSeparated => {
                let x = self.draw_point(&mut rng);
                for _ in 0..64 {
                    let y = self.draw_point(&mut rng);
                    if metric(&x, &y) >= 1.0 {
                        return (x, y);
                    }
                }
                // Constructive fallback: push y away from x along a gauge
                // direction, doubling until the metric clears 1.
                let dir = self.draw_unit_increment(&mut rng);
                let mut s = 1.0;
                loop {
                    let y = self.alg.bch_product(&x, &self.alg.dilation(s, &dir));
                    if metric(&x, &y) >= 1.0 {
                        return (x, y);
                    }
                    s *= 2.0;
                }
            }
            PairMode::NearPairs => {
                let x = self.draw_point(&mut rng);
                let dir = self.draw_unit_increment(&mut rng);
                let rho = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let y = self.alg.bch_product(&x, &self.alg.dilation(rho, &dir));
                (x, y)
            }
        }
    }
}

/// Cell-centred grid over the Carnot box {n : |π_i(n)| ≤ radius^i}, the
/// natural compact set for sup-norm estimates on a graded group.
///
/// `counts[l]` is the target number of points for layer l; a layer of
/// dimension 1 uses a cell-centred line, dimension 2 a polar grid of
/// ⌊√k⌋ radii × ⌊k/⌊√k⌋⌋ angles, and higher dimensions a cell-centred
/// Cartesian grid on the inscribed box. The grid is the Cartesian product
/// across layers.
pub fn carnot_box_grid(
    alg: &GradedLieAlgebra,
    radius: f64,
    counts: &[usize],
) -> Vec<GroupPoint> {
    assert!(counts.len() == alg.step(), "one count per layer");
    let mut layer_grids: Vec<Vec<Vec<f64>>> = Vec::new();
    for (l, &k) in counts.iter().enumerate() {
        let r = radius.powi(l as i32 + 1);
        let d = alg.layer_dims()[l];
        layer_grids.push(layer_grid(d, r, k.max(1)));
    }
    let mut out = vec![GroupPoint::zeros(alg.dim())];
    for (l, grid) in layer_grids.iter().enumerate() {
        let range = alg.layer_range(l);
        let mut next = Vec::with_capacity(out.len() * grid.len());
        for base in &out {
            for block in grid {
                let mut p = base.clone();
                p.coords_mut()[range.clone()].copy_from_slice(block);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn layer_grid(dim: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => (0..count)
            .map(|i| vec![radius * (2.0 * (i as f64 + 0.5) / count as f64 - 1.0)])
            .collect(),
        2 => {
            let nr = (count as f64).sqrt().floor().max(1.0) as usize;
            let na = (count / nr).max(1);
            let mut pts = Vec::with_capacity(nr * na);
            for ir in 0..nr {
                let rho = radius * (ir as f64 + 0.5) / nr as f64;
                for ia in 0..na {
                    let theta = 2.0 * std::f64::consts::PI * ia as f64 / na as f64;
                    pts.push(vec![rho * theta.cos(), rho * theta.sin()]);
                }
            }
            pts
        }
        _ => {
            let per_axis = (count as f64).powf(1.0 / dim as f64).floor().max(1.0) as usize;
            let half = radius / (dim as f64).sqrt();
            let mut pts = vec![vec![]];
            for _ in 0..dim {
                let mut next = Vec::new();
                for p in &pts {
                    for i in 0..per_axis {
                        let mut q = p.clone();
                        q.push(half * (2.0 * (i as f64 + 0.5) / per_axis as f64 - 1.0));
                        next.push(q);
                    }
                }
                pts = next;
            }
            pts
        }
    }
}

/// Splits a total point budget into per-layer counts with roughly equal
/// resolution per coordinate axis.
pub fn balanced_grid_counts(alg: &GradedLieAlgebra, total: usize) -> Vec<usize> {
    let dim: usize = alg.dim();
    let per_axis = (total as f64).powf(1.0 / dim as f64).round().max(1.0) as usize;
    alg.layer_dims()
        .iter()
        .map(|&d| per_axis.pow(d as u32))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_builtin;
    use crate::metrics::HomogeneousGauge;

    fn sampler(mode: PairMode) -> PointSampler {
        let alg = Arc::new(make_builtin("heisenberg3").unwrap());
        PointSampler::new(
            alg,
            SamplerConfig {
                seed: 42,
                domain: DomainShape::Box { radius: 10.0 },
                pair_mode: mode,
                count: 100,
            },
        )
    }

    #[test]
    fn identical_config_identical_samples() {
        let a = sampler(PairMode::Uniform);
        let b = sampler(PairMode::Uniform);
        for i in 0..50 {
            assert_eq!(a.point(i), b.point(i));
        }
    }

    #[test]
    fn unit_separated_pairs_clear_one() {
        let s = sampler(PairMode::UnitSeparated);
        let gauge = HomogeneousGauge::new(s.algebra().clone());
        for i in 0..200 {
            let (x, y) = s.pair(i, |a, b| gauge.distance(a, b));
            assert!(gauge.distance(&x, &y) >= 1.0);
        }
    }

    #[test]
    fn near_pairs_stay_within_one() {
        let s = sampler(PairMode::NearPairs);
        let gauge = HomogeneousGauge::new(s.algebra().clone());
        for i in 0..200 {
            let (x, y) = s.pair(i, |a, b| gauge.distance(a, b));
            assert!(gauge.distance(&x, &y) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn log_radial_hits_requested_gauge_range() {
        let alg = Arc::new(make_builtin("heisenberg3").unwrap());
        let s = PointSampler::new(
            alg.clone(),
            SamplerConfig {
                seed: 3,
                domain: DomainShape::LogRadial { r_min: 1e-3, r_max: 1e3 },
                pair_mode: PairMode::Uniform,
                count: 100,
            },
        );
        let gauge = HomogeneousGauge::new(alg);
        for i in 0..100 {
            let g = gauge.norm(&s.point(i));
            assert!(g >= 1e-3 * (1.0 - 1e-9) && g <= 1e3 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn carnot_grid_respects_layer_bounds_and_count() {
        let alg = make_builtin("heisenberg3").unwrap();
        let grid = carnot_box_grid(&alg, 1.0, &[100, 10]);
        assert_eq!(grid.len(), 1000);
        for p in &grid {
            let z = (p.coords()[0].powi(2) + p.coords()[1].powi(2)).sqrt();
            assert!(z <= 1.0 && p.coords()[2].abs() <= 1.0);
        }
        // Cell-centred: strictly inside the box.
        assert!(grid
            .iter()
            .all(|p| (p.coords()[0].powi(2) + p.coords()[1].powi(2)).sqrt() < 1.0));
    }

    #[test]
    fn balanced_counts_heisenberg() {
        let alg = make_builtin("heisenberg3").unwrap();
        assert_eq!(balanced_grid_counts(&alg, 1000), vec![100, 10]);
    }
}
