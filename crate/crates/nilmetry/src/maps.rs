//! Shear maps, automorphisms, affine and generalized affine maps.
//!
//! A shear is `S_g(n) = n + g(π₁(n))` for `g : V₁ → V_r`; it is a
//! quasiisometry exactly when g is large-scale Lipschitz, with constants
//! `L' = M (L^{1/r} + 1)` and `A' = M (L^{1/r} + A^{1/r} + 1)` in terms of
//! the generalized triangle constant M ([`qi_constants_bound`]). Shears form
//! an abelian group: `S_{g₁} ∘ S_{g₂} = S_{g₁+g₂}` and `S_g⁻¹ = S_{−g}`.
//! Together with left translations and automorphisms they generate the
//! generalized affine maps, modelled by [`QuasiMap`].

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{GradedLieAlgebra, GroupPoint};
use crate::error::{Error, Result};
use crate::numeric::{log_log_slope, ls_slope};

/// One primitive term of a large-scale Lipschitz function.
#[derive(Clone)]
enum LsAtom {
    /// x ↦ M x.
    Linear(DMatrix<f64>),
    /// x ↦ |x| e₁ of the range.
    Abs,
    /// x ↦ |x|^α e₁ with 0 < α < 1.
    Power(f64),
    /// Constant vector.
    Const(DVector<f64>),
    /// Arbitrary rule with declared constants.
    Custom {
        f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
        lipschitz: f64,
        additive: f64,
        label: String,
    },
}

impl LsAtom {
    fn eval(&self, x: &[f64], range_dim: usize) -> Vec<f64> {
        match self {
            LsAtom::Linear(m) => {
                let v = m * DVector::from_column_slice(x);
                v.iter().cloned().collect()
            }
            LsAtom::Abs => {
                let mut out = vec![0.0; range_dim];
                out[0] = vec_norm(x);
                out
            }
            LsAtom::Power(alpha) => {
                let mut out = vec![0.0; range_dim];
                out[0] = vec_norm(x).powf(*alpha);
                out
            }
            LsAtom::Const(v) => v.iter().cloned().collect(),
            LsAtom::Custom { f, .. } => f(x),
        }
    }

    fn constants(&self) -> (f64, f64) {
        match self {
            LsAtom::Linear(m) => (spectral_norm(m), 0.0),
            LsAtom::Abs => (1.0, 0.0),
            // ||x|^α − |y|^α| ≤ |x−y|^α ≤ |x−y| + 1 for 0 < α < 1.
            LsAtom::Power(_) => (1.0, 1.0),
            LsAtom::Const(_) => (0.0, 0.0),
            LsAtom::Custom { lipschitz, additive, .. } => (*lipschitz, *additive),
        }
    }

    fn label(&self) -> String {
        match self {
            LsAtom::Linear(_) => "linear".into(),
            LsAtom::Abs => "abs".into(),
            LsAtom::Power(a) => format!("power:{a}"),
            LsAtom::Const(_) => "const".into(),
            LsAtom::Custom { label, .. } => label.clone(),
        }
    }
}

fn vec_norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values[0]
}

/// A large-scale Lipschitz function g : ℝ^{d₁} → ℝ^{d_r} with declared
/// constants `|g(x) − g(y)| ≤ L |x − y| + A`, stored as a signed sum of
/// primitive terms so that shear composition is pointwise addition.
///
/// Declared constants are trusted but spot-audited on 10³ seeded pairs at
/// construction.
#[derive(Clone)]
pub struct LsMap {
    domain_dim: usize,
    range_dim: usize,
    terms: Vec<(f64, LsAtom)>,
    lipschitz: f64,
    additive: f64,
}

impl fmt::Debug for LsMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LsMap({} : R^{} -> R^{}, L={}, A={})",
            self.label(),
            self.domain_dim,
            self.range_dim,
            self.lipschitz,
            self.additive
        )
    }
}

impl LsMap {
    fn from_terms(domain_dim: usize, range_dim: usize, terms: Vec<(f64, LsAtom)>) -> Result<Self> {
        let mut l = 0.0;
        let mut a = 0.0;
        for (coef, atom) in &terms {
            let (tl, ta) = atom.constants();
            l += coef.abs() * tl;
            a += coef.abs() * ta;
        }
        let map = LsMap { domain_dim, range_dim, terms, lipschitz: l, additive: a };
        map.audit()?;
        Ok(map)
    }

    /// g(x) = |x| into the first range coordinate; (L, A) = (1, 0).
    pub fn abs(domain_dim: usize, range_dim: usize) -> Self {
        Self::from_terms(domain_dim, range_dim, vec![(1.0, LsAtom::Abs)])
            .expect("abs audit cannot fail")
    }

    /// g(x) = |x|^α into the first range coordinate; (L, A) = (1, 1).
    pub fn power(alpha: f64, domain_dim: usize, range_dim: usize) -> Result<Self> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "power exponent must lie in (0, 1), got {alpha}"
            )));
        }
        Self::from_terms(domain_dim, range_dim, vec![(1.0, LsAtom::Power(alpha))])
    }

    /// Linear g with L its spectral norm and A = 0.
    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, d) = (matrix.nrows(), matrix.ncols());
        Self::from_terms(d, r, vec![(1.0, LsAtom::Linear(matrix))])
    }

    /// Constant g; (L, A) = (0, 0).
    pub fn constant(value: Vec<f64>, domain_dim: usize) -> Self {
        let r = value.len();
        Self::from_terms(
            domain_dim,
            r,
            vec![(1.0, LsAtom::Const(DVector::from_vec(value)))],
        )
        .expect("constant audit cannot fail")
    }

    /// The zero map.
    pub fn zero(domain_dim: usize, range_dim: usize) -> Self {
        LsMap { domain_dim, range_dim, terms: Vec::new(), lipschitz: 0.0, additive: 0.0 }
    }

    /// Arbitrary rule with declared constants, audited at construction.
    pub fn custom(
        label: &str,
        domain_dim: usize,
        range_dim: usize,
        f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
        lipschitz: f64,
        additive: f64,
    ) -> Result<Self> {
        Self::from_terms(
            domain_dim,
            range_dim,
            vec![(
                1.0,
                LsAtom::Custom { f, lipschitz, additive, label: label.to_string() },
            )],
        )
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn range_dim(&self) -> usize {
        self.range_dim
    }

    /// Declared Lipschitz constant L.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Declared additive constant A.
    pub fn additive(&self) -> f64 {
        self.additive
    }

    pub fn label(&self) -> String {
        if self.terms.is_empty() {
            return "zero".into();
        }
        self.terms
            .iter()
            .map(|(c, atom)| {
                if *c == 1.0 {
                    atom.label()
                } else {
                    format!("{c}*{}", atom.label())
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert!(
            x.len() == self.domain_dim,
            "dimension mismatch: expected {}, got {}",
            self.domain_dim,
            x.len()
        );
        let mut out = vec![0.0; self.range_dim];
        for (coef, atom) in &self.terms {
            for (o, v) in out.iter_mut().zip(atom.eval(x, self.range_dim)) {
                *o += coef * v;
            }
        }
        out
    }

    /// Pointwise sum g₁ + g₂ with constants (L₁ + L₂, A₁ + A₂); the
    /// composition law of the shear group.
    pub fn compose_add(&self, other: &LsMap) -> Result<LsMap> {
        if self.domain_dim != other.domain_dim || self.range_dim != other.range_dim {
            return Err(Error::DimensionMismatch {
                expected: self.domain_dim,
                actual: other.domain_dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.clone());
        Ok(LsMap {
            domain_dim: self.domain_dim,
            range_dim: self.range_dim,
            terms,
            lipschitz: self.lipschitz + other.lipschitz,
            additive: self.additive + other.additive,
        })
    }

    /// −g, with the same constants.
    pub fn negated(&self) -> LsMap {
        LsMap {
            domain_dim: self.domain_dim,
            range_dim: self.range_dim,
            terms: self.terms.iter().map(|(c, a)| (-c, a.clone())).collect(),
            lipschitz: self.lipschitz,
            additive: self.additive,
        }
    }

    /// Spot check of the declared constants on 10³ seeded pairs in a box of
    /// radius 10.
    fn audit(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA0D17);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..self.domain_dim)
                .map(|_| 20.0 * rng.random::<f64>() - 10.0)
                .collect();
            let y: Vec<f64> = (0..self.domain_dim)
                .map(|_| 20.0 * rng.random::<f64>() - 10.0)
                .collect();
            let gap = vec_norm(
                &self
                    .eval(&x)
                    .iter()
                    .zip(self.eval(&y))
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            );
            let sep: f64 = vec_norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
            if gap > self.lipschitz * sep + self.additive + 1e-9 {
                return Err(Error::DeclaredConstantsViolated {
                    l: self.lipschitz,
                    a: self.additive,
                    observed: gap,
                    separation: sep,
                });
            }
        }
        Ok(())
    }
}

/// The built-in shear-generator family used by group-law tests and the CLI.
pub fn builtin_ls_family(alg: &GradedLieAlgebra) -> Vec<LsMap> {
    let d1 = alg.layer_dims()[0];
    let dr = *alg.layer_dims().last().unwrap();
    let mut family = vec![
        LsMap::abs(d1, dr),
        LsMap::power(0.3, d1, dr).expect("valid exponent"),
        LsMap::power(0.5, d1, dr).expect("valid exponent"),
        LsMap::power(0.7, d1, dr).expect("valid exponent"),
        LsMap::zero(d1, dr),
        LsMap::constant(
            (0..dr).map(|i| if i == 0 { 2.5 } else { -1.0 }).collect(),
            d1,
        ),
    ];
    let mut m = DMatrix::zeros(dr, d1);
    for i in 0..dr.min(d1) {
        m[(i, i)] = 1.5;
    }
    if d1 > 1 {
        m[(0, 1)] = -0.5;
    }
    family.push(LsMap::linear(m).expect("audit of a linear map cannot fail"));
    family
}

/// Applies the shear S_g(n) = n + g(π₁(n)): only the top-layer block moves.
///
/// Bijective with inverse S_{−g}. Panics when g's dimensions do not match
/// the algebra's first and top layers.
pub fn shear_apply(alg: &GradedLieAlgebra, g: &LsMap, n: &GroupPoint) -> GroupPoint {
    let d1 = alg.layer_dims()[0];
    let dr = *alg.layer_dims().last().unwrap();
    assert!(
        g.domain_dim() == d1 && g.range_dim() == dr,
        "shear generator maps R^{} -> R^{}, algebra needs R^{d1} -> R^{dr}",
        g.domain_dim(),
        g.range_dim()
    );
    let add = g.eval(alg.layer_slice(n, 0));
    let mut out = n.clone();
    let top = alg.layer_range(alg.step() - 1);
    for (o, v) in out.coords_mut()[top].iter_mut().zip(add) {
        *o += v;
    }
    out
}

/// S_{g₁} ∘ S_{g₂} = S_{g₁+g₂}: composition in the shear group is pointwise
/// addition of generators.
pub fn shear_compose(g1: &LsMap, g2: &LsMap) -> Result<LsMap> {
    g1.compose_add(g2)
}

/// The rescaled shear δ_λ ∘ S_g ∘ δ_{1/λ} in closed form:
/// n + λ^r g(π₁(n)/λ). Exactly equal to the composition of the three maps.
///
/// Panics when λ ≤ 0.
pub fn cone_rescaled_shear(
    alg: &GradedLieAlgebra,
    g: &LsMap,
    lambda: f64,
    n: &GroupPoint,
) -> GroupPoint {
    assert!(lambda > 0.0, "scale must be positive, got {lambda}");
    let r = alg.step() as i32;
    let pi1: Vec<f64> = alg.layer_slice(n, 0).iter().map(|c| c / lambda).collect();
    let add = g.eval(&pi1);
    let factor = lambda.powi(r);
    let mut out = n.clone();
    let top = alg.layer_range(alg.step() - 1);
    for (o, v) in out.coords_mut()[top].iter_mut().zip(add) {
        *o += factor * v;
    }
    out
}

/// The closed-form sup bound for the deviation of a rescaled shear from the
/// identity: `(L λ^{r−1} |π₁(n)| + λ^r A)^{1/r} + λ |g(0)|^{1/r}`.
pub fn cone_deviation_bound(alg: &GradedLieAlgebra, g: &LsMap, lambda: f64, n: &GroupPoint) -> f64 {
    let r = alg.step() as f64;
    let pi1_norm = alg.layer_norm(n, 0);
    let g0 = vec_norm(&g.eval(&vec![0.0; g.domain_dim()]));
    (g.lipschitz() * lambda.powf(r - 1.0) * pi1_norm + lambda.powf(r) * g.additive())
        .powf(1.0 / r)
        + lambda * g0.powf(1.0 / r)
}

/// A composable self-map of a group: shears, left translations,
/// automorphisms given by ambient matrices, and composites (applied
/// right-to-left).
#[derive(Clone, Debug)]
pub enum QuasiMap {
    Shear(LsMap),
    LeftTranslation(GroupPoint),
    Automorphism(DMatrix<f64>),
    Composite(Vec<QuasiMap>),
}

impl QuasiMap {
    /// Composite of a nonempty list.
    pub fn composite(list: Vec<QuasiMap>) -> Result<QuasiMap> {
        if list.is_empty() {
            return Err(Error::InvalidParameter(
                "composite quasi-map needs at least one factor".into(),
            ));
        }
        Ok(QuasiMap::Composite(list))
    }

    /// Applies the map; composites apply right-to-left.
    pub fn apply(&self, alg: &GradedLieAlgebra, n: &GroupPoint) -> GroupPoint {
        match self {
            QuasiMap::Shear(g) => shear_apply(alg, g, n),
            QuasiMap::LeftTranslation(v) => alg.bch_product(v, n),
            QuasiMap::Automorphism(m) => apply_matrix(m, n),
            QuasiMap::Composite(list) => {
                let mut p = n.clone();
                for map in list.iter().rev() {
                    p = map.apply(alg, &p);
                }
                p
            }
        }
    }

    /// The exact inverse: S_{−g}, translation by −v, the matrix inverse, or
    /// the reversed composite of inverses. Errors when an automorphism
    /// matrix is singular.
    pub fn inverse(&self) -> Result<QuasiMap> {
        Ok(match self {
            QuasiMap::Shear(g) => QuasiMap::Shear(g.negated()),
            QuasiMap::LeftTranslation(v) => QuasiMap::LeftTranslation(v.inverse()),
            QuasiMap::Automorphism(m) => QuasiMap::Automorphism(
                m.clone()
                    .try_inverse()
                    .ok_or_else(|| Error::NoInverse("singular automorphism matrix".into()))?,
            ),
            QuasiMap::Composite(list) => {
                let mut inv = Vec::with_capacity(list.len());
                for map in list.iter().rev() {
                    inv.push(map.inverse()?);
                }
                QuasiMap::Composite(inv)
            }
        })
    }
}

fn apply_matrix(m: &DMatrix<f64>, n: &GroupPoint) -> GroupPoint {
    assert!(
        m.ncols() == n.dim(),
        "dimension mismatch: matrix is {}x{}, point has dim {}",
        m.nrows(),
        m.ncols(),
        n.dim()
    );
    let v = m * DVector::from_column_slice(n.coords());
    GroupPoint::new(v.iter().cloned().collect())
}

/// Outcome of checking a matrix against the automorphism axioms.
#[derive(Clone, Debug)]
pub struct AutomorphismReport {
    /// Residuals |A[e_i, e_j] − [A e_i, A e_j]|∞ above 1e−10, by basis pair.
    pub failures: Vec<(usize, usize, f64)>,
    pub invertible: bool,
    /// Whether the matrix is block-diagonal with respect to the gradation.
    pub graded: bool,
}

impl AutomorphismReport {
    pub fn is_valid(&self) -> bool {
        self.invertible && self.failures.is_empty()
    }
}

/// Checks invertibility and A[e_i, e_j] = [A e_i, A e_j] on all basis
/// pairs (tolerance 1e−10), and reports whether A is graded.
pub fn automorphism_validate(alg: &GradedLieAlgebra, m: &DMatrix<f64>) -> AutomorphismReport {
    let dim = alg.dim();
    assert!(
        m.nrows() == dim && m.ncols() == dim,
        "automorphism matrix must be {dim}x{dim}"
    );
    let invertible = m.clone().try_inverse().is_some();
    let mut failures = Vec::new();
    let columns: Vec<GroupPoint> = (0..dim)
        .map(|j| GroupPoint::new(m.column(j).iter().cloned().collect()))
        .collect();
    for i in 0..dim {
        for j in (i + 1)..dim {
            let lhs = apply_matrix(m, &alg.bracket(
                &GroupPoint::basis(dim, i, 1.0),
                &GroupPoint::basis(dim, j, 1.0),
            ));
            let rhs = alg.bracket(&columns[i], &columns[j]);
            let residual = lhs.sub(&rhs).norm_inf();
            if residual > 1e-10 {
                failures.push((i, j, residual));
            }
        }
    }
    let mut graded = true;
    for row in 0..dim {
        for col in 0..dim {
            if alg.layer_of(row) != alg.layer_of(col) && m[(row, col)] != 0.0 {
                graded = false;
            }
        }
    }
    AutomorphismReport { failures, invertible, graded }
}

/// The dilation δ_λ as an ambient matrix (a graded automorphism).
pub fn dilation_matrix(alg: &GradedLieAlgebra, lambda: f64) -> DMatrix<f64> {
    assert!(lambda > 0.0, "dilation parameter must be positive, got {lambda}");
    let dim = alg.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = lambda.powi(alg.layer_of(i) as i32 + 1);
    }
    m
}

/// The shear S_L of a linear generator as an ambient matrix: identity plus
/// the L-block mapping V₁ into V_r. An automorphism of the group.
pub fn linear_shear_matrix(alg: &GradedLieAlgebra, g: &LsMap) -> Result<DMatrix<f64>> {
    let dim = alg.dim();
    let d1 = alg.layer_dims()[0];
    let dr = *alg.layer_dims().last().unwrap();
    if g.domain_dim() != d1 || g.range_dim() != dr {
        return Err(Error::DimensionMismatch { expected: d1, actual: g.domain_dim() });
    }
    let mut m = DMatrix::identity(dim, dim);
    let top = alg.layer_range(alg.step() - 1);
    for col in 0..d1 {
        let mut unit = vec![0.0; d1];
        unit[col] = 1.0;
        let img = g.eval(&unit);
        for (row_off, v) in img.iter().enumerate() {
            m[(top.start + row_off, col)] += v;
        }
    }
    Ok(m)
}

/// The quasiisometry constants of a shear from the generator's constants
/// and the triangle constant: `(M (L^{1/r} + 1), M (L^{1/r} + A^{1/r} + 1))`.
pub fn qi_constants_bound(l: f64, a: f64, m: f64, r: usize) -> Result<(f64, f64)> {
    if l < 0.0 || a < 0.0 {
        return Err(Error::InvalidParameter("L and A must be nonnegative".into()));
    }
    if m < 1.0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if r < 1 {
        return Err(Error::InvalidParameter("step must be at least 1".into()));
    }
    let inv_r = 1.0 / r as f64;
    let lr = l.powf(inv_r);
    Ok((m * (lr + 1.0), m * (lr + a.powf(inv_r) + 1.0)))
}

/// The V_r block of `(−S_g(n)) * G₁(n)` for each sample n ∈ V₁, where G₁
/// is an automorphism: the polynomial defect separating a shear from an
/// affine map. Vanishes identically when g is the linear part of G₁.
pub fn shear_affine_defect(
    alg: &GradedLieAlgebra,
    g: &LsMap,
    automorphism: &DMatrix<f64>,
    samples: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let report = automorphism_validate(alg, automorphism);
    if !report.is_valid() {
        return Err(Error::InvalidParameter(format!(
            "matrix is not an automorphism ({} bracket failures, invertible: {})",
            report.failures.len(),
            report.invertible
        )));
    }
    let top = alg.layer_range(alg.step() - 1);
    Ok(samples
        .iter()
        .map(|v| {
            let n = alg.embed_layer(0, v);
            let sheared = shear_apply(alg, g, &n);
            let affine = apply_matrix(automorphism, &n);
            let diff = alg.bch_product(&sheared.inverse(), &affine);
            diff.coords()[top.clone()].to_vec()
        })
        .collect())
}

/// Growth of the best-linear-fit deviation of g over balls of increasing
/// radius. A log-log slope near zero suggests finite distance from a linear
/// map, a positive slope suggests not. This is a heuristic, not a decision
/// procedure.
#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    /// Max deviation from the least-squares linear fit on each ball.
    pub deviations: Vec<f64>,
    /// Log-log slope of deviation against radius; `None` when every
    /// deviation vanishes (g is linear on the sampled grid).
    pub slope: Option<f64>,
}

/// Least-squares linear fit of g on a grid in the ball of radius R for each
/// R, reporting max deviations and their growth exponent.
pub fn linear_distance_classifier(g: &LsMap, radii: &[f64]) -> Result<GrowthReport> {
    if radii.len() < 2 {
        return Err(Error::InvalidParameter(
            "classifier needs at least two radii".into(),
        ));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "radii must be positive and increasing".into(),
        ));
    }
    let d = g.domain_dim();
    let per_axis: usize = match d {
        1 => 41,
        2 => 21,
        3 => 9,
        _ => 5,
    };
    let mut deviations = Vec::with_capacity(radii.len());
    for &radius in radii {
        let grid = ball_grid(d, radius, per_axis);
        let n = grid.len();
        let mut x = DMatrix::zeros(n, d);
        let mut y = DMatrix::zeros(n, g.range_dim());
        for (row, point) in grid.iter().enumerate() {
            for (col, v) in point.iter().enumerate() {
                x[(row, col)] = *v;
            }
            for (col, v) in g.eval(point).iter().enumerate() {
                y[(row, col)] = *v;
            }
        }
        // Minimal-norm least squares W with G ≈ X Wᵀ.
        let svd = x.clone().svd(true, true);
        let w_t = svd.solve(&y, 1e-12).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let fitted = &x * &w_t;
        let mut dev = 0.0f64;
        for row in 0..n {
            let mut err2 = 0.0;
            for col in 0..g.range_dim() {
                let e = y[(row, col)] - fitted[(row, col)];
                err2 += e * e;
            }
            dev = dev.max(err2.sqrt());
        }
        deviations.push(dev);
    }
    let pts: Vec<(f64, f64)> = radii.iter().cloned().zip(deviations.iter().cloned()).collect();
    let slope = if deviations.iter().all(|&d| d <= 1e-12) {
        None
    } else {
        log_log_slope(&pts)
    };
    Ok(GrowthReport { radii: radii.to_vec(), deviations, slope })
}

fn ball_grid(dim: usize, radius: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for p in &pts {
            for i in 0..per_axis {
                let mut q = p.clone();
                q.push(radius * (2.0 * i as f64 / (per_axis - 1) as f64 - 1.0));
                next.push(q);
            }
        }
        pts = next;
    }
    pts.retain(|p| vec_norm(p) <= radius * (1.0 + 1e-12));
    pts
}

/// Least-squares slope re-export used by growth assertions.
pub fn deviation_slope(points: &[(f64, f64)]) -> Option<f64> {
    ls_slope(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_builtin;

    fn gp(coords: &[f64]) -> GroupPoint {
        GroupPoint::new(coords.to_vec())
    }

    #[test]
    fn shear_abs_hand_value() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g = LsMap::abs(2, 1);
        assert_eq!(
            shear_apply(&alg, &g, &gp(&[3.0, 4.0, 7.0])),
            gp(&[3.0, 4.0, 12.0])
        );
    }

    #[test]
    fn zero_shear_is_identity() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g = LsMap::zero(2, 1);
        let n = gp(&[0.2, -0.8, 1.0]);
        assert_eq!(shear_apply(&alg, &g, &n), n);
    }

    #[test]
    fn shear_inverse_law() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g = LsMap::abs(2, 1);
        let neg = g.negated();
        for i in 0..100 {
            let n = gp(&[i as f64 * 0.1 - 5.0, 1.3, -2.0]);
            let back = shear_apply(&alg, &neg, &shear_apply(&alg, &g, &n));
            assert!(back.sub(&n).norm_inf() <= 1e-12);
        }
    }

    #[test]
    fn shear_composition_law() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g1 = LsMap::abs(2, 1);
        let g2 = LsMap::power(0.5, 2, 1).unwrap();
        let sum = shear_compose(&g1, &g2).unwrap();
        assert_eq!(sum.lipschitz(), 2.0);
        assert_eq!(sum.additive(), 1.0);
        let n = gp(&[3.0, -4.0, 0.5]);
        let a = shear_apply(&alg, &g1, &shear_apply(&alg, &g2, &n));
        let b = shear_apply(&alg, &sum, &n);
        assert!(a.sub(&b).norm_inf() <= 1e-12);
    }

    #[test]
    fn abs_plus_minus_abs_is_zero_map() {
        let g = LsMap::abs(2, 1);
        let sum = shear_compose(&g, &g.negated()).unwrap();
        for x in [[0.0, 0.0], [3.0, 4.0], [-1.0, 2.0]] {
            assert_eq!(sum.eval(&x), vec![0.0]);
        }
    }

    #[test]
    fn dilation_matrix_is_valid_automorphism() {
        for name in ["heisenberg3", "filiform3", "quaternion_heisenberg"] {
            let alg = make_builtin(name).unwrap();
            let report = automorphism_validate(&alg, &dilation_matrix(&alg, 2.0));
            assert!(report.is_valid(), "{name}");
            assert!(report.graded);
        }
    }

    #[test]
    fn identity_matrix_is_valid_automorphism() {
        let alg = make_builtin("heisenberg3").unwrap();
        let report = automorphism_validate(&alg, &DMatrix::identity(3, 3));
        assert!(report.is_valid());
    }

    #[test]
    fn linear_shear_matrix_is_automorphism_but_not_graded() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g = LsMap::linear(DMatrix::from_row_slice(1, 2, &[1.5, -0.5])).unwrap();
        let m = linear_shear_matrix(&alg, &g).unwrap();
        let report = automorphism_validate(&alg, &m);
        assert!(report.is_valid());
        assert!(!report.graded);
        // The matrix agrees with the shear on all points.
        let n = gp(&[2.0, 3.0, -1.0]);
        assert!(apply_matrix(&m, &n).sub(&shear_apply(&alg, &g, &n)).norm_inf() <= 1e-12);
    }

    #[test]
    fn broken_matrix_fails_validation() {
        let alg = make_builtin("heisenberg3").unwrap();
        let mut m = DMatrix::identity(3, 3);
        m[(2, 2)] = 3.0; // scales the centre without scaling V1: breaks brackets
        let report = automorphism_validate(&alg, &m);
        assert!(!report.is_valid());
    }

    #[test]
    fn quasimap_left_translation_matches_product() {
        let alg = make_builtin("heisenberg3").unwrap();
        let map = QuasiMap::LeftTranslation(gp(&[1.0, 0.0, 0.0]));
        assert_eq!(map.apply(&alg, &gp(&[0.0, 1.0, 0.0])), gp(&[1.0, 1.0, -2.0]));
        let id = QuasiMap::LeftTranslation(GroupPoint::zeros(3));
        let n = gp(&[0.4, 0.5, 0.6]);
        assert_eq!(id.apply(&alg, &n), n);
    }

    #[test]
    fn composite_of_shear_and_its_inverse_is_identity() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g = LsMap::abs(2, 1);
        let map = QuasiMap::composite(vec![
            QuasiMap::Shear(g.negated()),
            QuasiMap::Shear(g.clone()),
        ])
        .unwrap();
        let n = gp(&[1.0, 2.0, 3.0]);
        assert!(map.apply(&alg, &n).sub(&n).norm_inf() <= 1e-12);
        assert!(QuasiMap::composite(vec![]).is_err());
    }

    #[test]
    fn quasimap_inverse_round_trips() {
        let alg = make_builtin("heisenberg3").unwrap();
        let map = QuasiMap::Composite(vec![
            QuasiMap::Shear(LsMap::abs(2, 1)),
            QuasiMap::LeftTranslation(gp(&[1.0, -2.0, 0.5])),
            QuasiMap::Automorphism(dilation_matrix(&alg, 3.0)),
        ]);
        let inv = map.inverse().unwrap();
        let n = gp(&[0.3, 0.7, -4.0]);
        let back = inv.apply(&alg, &map.apply(&alg, &n));
        assert!(back.sub(&n).norm_inf() <= 1e-10);
    }

    #[test]
    fn qi_constants_hand_values() {
        assert_eq!(qi_constants_bound(1.0, 0.0, 1.0, 2).unwrap(), (2.0, 2.0));
        assert_eq!(qi_constants_bound(0.0, 0.0, 1.0, 1).unwrap(), (1.0, 1.0));
        assert!(qi_constants_bound(-1.0, 0.0, 1.0, 2).is_err());
        assert!(qi_constants_bound(1.0, 0.0, 0.5, 2).is_err());
    }

    #[test]
    fn qi_constants_monotone() {
        let base = qi_constants_bound(1.0, 1.0, 1.5, 2).unwrap();
        for (l, a, m) in [(2.0, 1.0, 1.5), (1.0, 2.0, 1.5), (1.0, 1.0, 2.0)] {
            let other = qi_constants_bound(l, a, m, 2).unwrap();
            assert!(other.1 >= base.1);
        }
    }

    #[test]
    fn defect_zero_for_matching_linear_shear() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g = LsMap::linear(DMatrix::from_row_slice(1, 2, &[2.0, 1.0])).unwrap();
        let m = linear_shear_matrix(&alg, &g).unwrap();
        let samples: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64 - 10.0, 2.0 * i as f64 - 20.0])
            .collect();
        let defects = shear_affine_defect(&alg, &g, &m, &samples).unwrap();
        for d in defects {
            assert!(d.iter().all(|v| v.abs() <= 1e-10));
        }
    }

    #[test]
    fn defect_of_abs_against_identity_is_minus_g() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g = LsMap::abs(2, 1);
        let id = DMatrix::identity(3, 3);
        let defects = shear_affine_defect(&alg, &g, &id, &[vec![3.0, 4.0]]).unwrap();
        assert!((defects[0][0] - (-5.0)).abs() <= 1e-12);
    }

    #[test]
    fn classifier_slopes() {
        let linear = LsMap::linear(DMatrix::from_row_slice(1, 1, &[2.0])).unwrap();
        let radii = [1.0, 2.0, 4.0, 8.0, 16.0];
        let report = linear_distance_classifier(&linear, &radii).unwrap();
        assert!(report.deviations.iter().all(|&d| d <= 1e-9));
        assert!(report.slope.is_none());

        let abs = LsMap::abs(1, 1);
        let report = linear_distance_classifier(&abs, &radii).unwrap();
        let slope = report.slope.unwrap();
        assert!((slope - 1.0).abs() <= 0.1, "slope {slope}");

        let root = LsMap::power(0.5, 1, 1).unwrap();
        let report = linear_distance_classifier(&root, &radii).unwrap();
        let slope = report.slope.unwrap();
        assert!((slope - 0.5).abs() <= 0.1, "slope {slope}");

        assert!(linear_distance_classifier(&abs, &[1.0]).is_err());
    }

    #[test]
    fn rescaled_shear_closed_form_and_hand_value() {
        let alg = make_builtin("heisenberg3").unwrap();
        let g = LsMap::abs(2, 1);
        // λ = 0.1: 0.01 · |(30, 40)| = 0.5.
        let out = cone_rescaled_shear(&alg, &g, 0.1, &gp(&[3.0, 4.0, 0.0]));
        assert!(out.sub(&gp(&[3.0, 4.0, 0.5])).norm_inf() <= 1e-12);
        // λ = 1 is the plain shear.
        let n = gp(&[1.0, -2.0, 0.3]);
        assert_eq!(cone_rescaled_shear(&alg, &g, 1.0, &n), shear_apply(&alg, &g, &n));
    }

    #[test]
    fn rescaled_shear_matches_composition() {
        let alg = make_builtin("filiform3").unwrap();
        let g = LsMap::power(0.5, 2, 1).unwrap();
        for (lambda, coords) in [
            (0.25, [1.0, 2.0, -0.5, 3.0]),
            (2.0, [-4.0, 0.1, 0.0, 1.0]),
            (0.01, [0.5, 0.5, 0.5, 0.5]),
        ] {
            let n = gp(&coords);
            let closed = cone_rescaled_shear(&alg, &g, lambda, &n);
            let composed = alg.dilation(
                lambda,
                &shear_apply(&alg, &g, &alg.dilation(1.0 / lambda, &n)),
            );
            assert!(closed.sub(&composed).norm_inf() <= 1e-12 * composed.norm_inf().max(1.0));
        }
    }

    #[test]
    fn power_exponent_validation() {
        assert!(LsMap::power(0.0, 2, 1).is_err());
        assert!(LsMap::power(1.0, 2, 1).is_err());
    }

    #[test]
    fn audit_rejects_false_declaration() {
        let err = LsMap::custom(
            "liar",
            1,
            1,
            Arc::new(|x: &[f64]| vec![x[0] * x[0]]),
            0.1,
            0.0,
        );
        assert!(matches!(err, Err(Error::DeclaredConstantsViolated { .. })));
    }
}
