//! Graded nilpotent Lie algebras over ℝ in exponential coordinates.
//!
//! An algebra is described by the dimensions of its layers V₁ ⊕ … ⊕ V_r and a
//! sparse table of structure constants `c[i][j][k]` with
//! `[e_i, e_j] = Σ_k c[i][j][k] e_k` over the concatenated basis. Points of
//! the associated simply connected group are identified with algebra elements
//! through the exponential map, so a [`GroupPoint`] is simultaneously a group
//! element and a tangent vector. The group product is the
//! Campbell–Baker–Hausdorff series, which terminates because every bracket of
//! weight above the step vanishes:
//!
//! ```text
//! x * y = x + y + ½[x,y] + 1/12 [x,[x,y]] − 1/12 [y,[x,y]] − 1/24 [y,[x,[x,y]]]
//! ```
//!
//! The coefficients are hardcoded exactly through weight 4; algebras of step
//! 5 or higher are rejected at construction. Gradation compatibility
//! ([V_a, V_b] ⊆ V_{a+b}) is required of every algebra, which makes the
//! dilations δ_λ automorphisms by construction.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// A point in exponential coordinates, usable both as a Lie algebra element
/// and as a group element.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint {
    coords: Vec<f64>,
}

impl GroupPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        GroupPoint { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        GroupPoint {
            coords: vec![0.0; dim],
        }
    }

    /// Basis vector e_i scaled by `c` (0-based index).
    pub fn basis(dim: usize, i: usize, c: f64) -> Self {
        let mut coords = vec![0.0; dim];
        coords[i] = c;
        GroupPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    /// The group inverse; in exponential coordinates this is −x for any
    /// nilpotent group, so no algebra is needed.
    pub fn inverse(&self) -> Self {
        GroupPoint {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_dims(self.dim(), other.dim());
        GroupPoint {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_dims(self.dim(), other.dim());
        GroupPoint {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        GroupPoint {
            coords: self.coords.iter().map(|x| c * x).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.coords.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

impl From<Vec<f64>> for GroupPoint {
    fn from(coords: Vec<f64>) -> Self {
        GroupPoint { coords }
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn assert_dims(expected: usize, actual: usize) {
    assert!(
        expected == actual,
        "dimension mismatch: expected {expected}, got {actual}"
    );
}

/// A single structure constant as supplied by the user, 0-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

/// Canonical sparse entry with `i < j`; the bracket is evaluated as
/// `out[k] += c * (x[i] y[j] − x[j] y[i])`, which makes antisymmetry and
/// `[x, x] = 0` exact in floating point.
#[derive(Clone, Copy, Debug)]
struct FoldedEntry {
    i: usize,
    j: usize,
    k: usize,
    c: f64,
}

/// One failed axiom found by validation, with witness basis indices.
#[derive(Clone, Debug, PartialEq)]
pub enum ValidationIssue {
    /// c[i][j][k] + c[j][i][k] ≠ 0 for explicitly supplied constants.
    Antisymmetry { i: usize, j: usize, k: usize, residual: f64 },
    /// A nonzero [e_i, e_i] component was supplied.
    DiagonalBracket { i: usize, k: usize, value: f64 },
    /// [V_a, V_b] escaped V_{a+b}.
    Gradation { i: usize, j: usize, k: usize, expected_layer: Option<usize>, actual_layer: usize },
    /// Jacobi identity failed on the basis triple (i, j, k).
    Jacobi { i: usize, j: usize, k: usize, residual: f64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Antisymmetry { i, j, k, residual } => write!(
                f,
                "antisymmetry violated at ({i}, {j}): c[{i}][{j}][{k}] + c[{j}][{i}][{k}] = {residual}"
            ),
            ValidationIssue::DiagonalBracket { i, k, value } => {
                write!(f, "nonzero diagonal bracket c[{i}][{i}][{k}] = {value}")
            }
            ValidationIssue::Gradation { i, j, k, expected_layer, actual_layer } => match expected_layer {
                Some(l) => write!(
                    f,
                    "gradation violated: [e_{i}, e_{j}] has a component on e_{k} (layer {actual_layer}, expected layer {l})"
                ),
                None => write!(
                    f,
                    "gradation violated: [e_{i}, e_{j}] has weight above the step but a component on e_{k} (layer {actual_layer})"
                ),
            },
            ValidationIssue::Jacobi { i, j, k, residual } => write!(
                f,
                "Jacobi identity violated on ({i}, {j}, {k}): residual {residual:.3e}"
            ),
        }
    }
}

/// The outcome of [`validate_algebra`]; empty ⇔ valid.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "ok");
        }
        for issue in &self.issues {
            writeln!(f, "- {issue}")?;
        }
        Ok(())
    }
}

/// A graded nilpotent Lie algebra given by layer dimensions and sparse
/// structure constants.
#[derive(Clone, Debug)]
pub struct GradedLieAlgebra {
    name: String,
    layer_dims: Vec<usize>,
    /// Entries exactly as supplied (retained so validation can report
    /// inconsistent input rather than silently folding it).
    raw: Vec<RawEntry>,
    /// Canonicalised table used for evaluation.
    folded: Vec<FoldedEntry>,
    /// 0-based layer index of each basis vector.
    layer_of: Vec<usize>,
    /// Prefix offsets of the layers; `layer_starts[i]..layer_starts[i+1]`
    /// slices layer i out of a coordinate vector.
    layer_starts: Vec<usize>,
}

impl GradedLieAlgebra {
    /// Builds an algebra without checking the Lie axioms, so that invalid
    /// input can be inspected with [`validate_algebra`]. Dimensions and
    /// indices must still be structurally sound.
    pub fn from_parts(name: &str, layer_dims: &[usize], entries: &[RawEntry]) -> Result<Self> {
        if layer_dims.is_empty() || layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidAlgebraFile(
                "layer_dims must be a non-empty list of positive integers".into(),
            ));
        }
        if layer_dims.len() > 4 {
            return Err(Error::StepTooLarge(layer_dims.len()));
        }
        let dim: usize = layer_dims.iter().sum();
        let mut layer_of = Vec::with_capacity(dim);
        let mut layer_starts = vec![0usize];
        for (l, &d) in layer_dims.iter().enumerate() {
            layer_of.extend(std::iter::repeat(l).take(d));
            layer_starts.push(layer_starts[l] + d);
        }
        for e in entries {
            if e.i >= dim || e.j >= dim || e.k >= dim {
                return Err(Error::InvalidAlgebraFile(format!(
                    "structure constant index out of range: ({}, {}, {}) with dim {}",
                    e.i, e.j, e.k, dim
                )));
            }
        }
        let folded = fold_entries(entries);
        Ok(GradedLieAlgebra {
            name: name.to_string(),
            layer_dims: layer_dims.to_vec(),
            raw: entries.to_vec(),
            folded,
            layer_of,
            layer_starts,
        })
    }

    /// Builds and validates; the usual constructor for programmatic use.
    pub fn new(name: &str, layer_dims: &[usize], entries: &[RawEntry]) -> Result<Self> {
        let alg = Self::from_parts(name, layer_dims, entries)?;
        let report = validate_algebra(&alg);
        if report.is_valid() {
            Ok(alg)
        } else {
            Err(Error::InvalidAlgebra(report.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        *self.layer_starts.last().unwrap()
    }

    pub fn step(&self) -> usize {
        self.layer_dims.len()
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// 0-based layer index of basis vector `i`.
    pub fn layer_of(&self, i: usize) -> usize {
        self.layer_of[i]
    }

    /// Coordinate range of layer `l` (0-based).
    pub fn layer_range(&self, l: usize) -> std::ops::Range<usize> {
        self.layer_starts[l]..self.layer_starts[l + 1]
    }

    /// The projection π_{l+1}(n) as a raw slice (0-based layer index).
    pub fn layer_slice<'a>(&self, n: &'a GroupPoint, l: usize) -> &'a [f64] {
        &n.coords()[self.layer_range(l)]
    }

    /// Euclidean norm of the layer-`l` block.
    pub fn layer_norm(&self, n: &GroupPoint, l: usize) -> f64 {
        self.layer_slice(n, l)
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// π₁(n) as an owned vector.
    pub fn pi1(&self, n: &GroupPoint) -> Vec<f64> {
        self.layer_slice(n, 0).to_vec()
    }

    /// Embeds a first-layer vector into the ambient coordinates.
    pub fn embed_layer(&self, l: usize, v: &[f64]) -> GroupPoint {
        let range = self.layer_range(l);
        assert_dims(range.len(), v.len());
        let mut p = GroupPoint::zeros(self.dim());
        p.coords_mut()[range].copy_from_slice(v);
        p
    }

    /// The Lie bracket [x, y].
    ///
    /// Bilinear and exactly antisymmetric; the output's V_k block only
    /// receives contributions from blocks of x and y whose weights sum to k.
    ///
    /// Panics on dimension mismatch.
    pub fn bracket(&self, x: &GroupPoint, y: &GroupPoint) -> GroupPoint {
        assert_dims(self.dim(), x.dim());
        assert_dims(self.dim(), y.dim());
        let xs = x.coords();
        let ys = y.coords();
        let mut out = vec![0.0; self.dim()];
        for e in &self.folded {
            out[e.k] += e.c * (xs[e.i] * ys[e.j] - xs[e.j] * ys[e.i]);
        }
        GroupPoint::new(out)
    }

    /// The group product in exponential coordinates via the CBH series,
    /// exact for step ≤ 4.
    ///
    /// The identity is 0 and the inverse of x is −x. Panics on dimension
    /// mismatch.
    pub fn bch_product(&self, x: &GroupPoint, y: &GroupPoint) -> GroupPoint {
        let mut acc = x.add(y);
        if self.step() >= 2 {
            let b_xy = self.bracket(x, y);
            for (a, b) in acc.coords_mut().iter_mut().zip(b_xy.coords()) {
                *a += 0.5 * b;
            }
            if self.step() >= 3 {
                let b_xxy = self.bracket(x, &b_xy);
                let b_yxy = self.bracket(y, &b_xy);
                for ((a, bx), by) in acc
                    .coords_mut()
                    .iter_mut()
                    .zip(b_xxy.coords())
                    .zip(b_yxy.coords())
                {
                    *a += (bx - by) / 12.0;
                }
                if self.step() >= 4 {
                    let b_yxxy = self.bracket(y, &b_xxy);
                    for (a, b) in acc.coords_mut().iter_mut().zip(b_yxxy.coords()) {
                        *a -= b / 24.0;
                    }
                }
            }
        }
        acc
    }

    /// Left-invariant difference log((−x) * y).
    pub fn left_difference(&self, x: &GroupPoint, y: &GroupPoint) -> GroupPoint {
        self.bch_product(&x.inverse(), y)
    }

    /// The dilation δ_λ, scaling the V_j block by λ^j.
    ///
    /// A group automorphism for every λ > 0 thanks to gradation
    /// compatibility; δ_λ ∘ δ_μ = δ_{λμ}. Panics if λ ≤ 0 or on dimension
    /// mismatch.
    pub fn dilation(&self, lambda: f64, x: &GroupPoint) -> GroupPoint {
        assert!(lambda > 0.0, "dilation parameter must be positive, got {lambda}");
        assert_dims(self.dim(), x.dim());
        let mut out = x.clone();
        for l in 0..self.step() {
            let factor = lambda.powi(l as i32 + 1);
            for c in &mut out.coords_mut()[self.layer_range(l)] {
                *c *= factor;
            }
        }
        out
    }

    /// True when the structure constants match `other`'s exactly and the
    /// layer dimensions agree.
    pub fn same_structure(&self, other: &GradedLieAlgebra) -> bool {
        if self.layer_dims != other.layer_dims {
            return false;
        }
        let key = |e: &FoldedEntry| (e.i, e.j, e.k);
        let mut a: Vec<_> = self.folded.iter().map(|e| (key(e), e.c)).collect();
        let mut b: Vec<_> = other.folded.iter().map(|e| (key(e), e.c)).collect();
        a.sort_by_key(|(k, _)| *k);
        b.sort_by_key(|(k, _)| *k);
        a == b
    }
}

/// Folds raw entries into canonical `i < j` form. A lone entry defines the
/// constant outright (its mirror is implied by antisymmetric closure); when
/// both orientations are supplied they are averaged, so consistent mirrors
/// collapse to the shared value and inconsistent ones are neutralised here
/// and reported by validation.
fn fold_entries(entries: &[RawEntry]) -> Vec<FoldedEntry> {
    use std::collections::BTreeMap;
    let mut table: BTreeMap<(usize, usize, usize), (f64, usize)> = BTreeMap::new();
    for e in entries {
        if e.i == e.j {
            continue; // diagonal handled by validation
        }
        let (i, j, c) = if e.i < e.j { (e.i, e.j, e.c) } else { (e.j, e.i, -e.c) };
        let slot = table.entry((i, j, e.k)).or_insert((0.0, 0));
        slot.0 += c;
        slot.1 += 1;
    }
    table
        .into_iter()
        .filter_map(|((i, j, k), (sum, n))| {
            let c = sum / n as f64;
            if c == 0.0 {
                None
            } else {
                Some(FoldedEntry { i, j, k, c })
            }
        })
        .collect()
}

/// Checks antisymmetry, gradation compatibility and the Jacobi identity on
/// all basis triples; failures are returned as report entries rather than
/// errors, so deliberately broken tables can be inspected.
pub fn validate_algebra(alg: &GradedLieAlgebra) -> ValidationReport {
    let mut issues = Vec::new();
    let scale = alg
        .raw
        .iter()
        .fold(1.0f64, |m, e| m.max(e.c.abs()));
    let tol = 1e-12 * scale.max(1.0);

    // Antisymmetry over the raw table: an explicit (i, j, k) either has no
    // explicit mirror (the closure −c is implied) or the mirror must cancel.
    use std::collections::BTreeMap;
    let mut raw_table: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for e in &alg.raw {
        *raw_table.entry((e.i, e.j, e.k)).or_insert(0.0) += e.c;
    }
    let mut seen = std::collections::BTreeSet::new();
    for (&(i, j, k), &c) in &raw_table {
        if i == j {
            if c != 0.0 {
                issues.push(ValidationIssue::DiagonalBracket { i, k, value: c });
            }
            continue;
        }
        if let Some(&mirror) = raw_table.get(&(j, i, k)) {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if seen.insert((a, b, k)) && (c + mirror).abs() > tol {
                issues.push(ValidationIssue::Antisymmetry {
                    i: a,
                    j: b,
                    k,
                    residual: c + mirror,
                });
            }
        }
    }

    // Gradation containment.
    for e in &alg.folded {
        let want = alg.layer_of(e.i) + alg.layer_of(e.j) + 1;
        let got = alg.layer_of(e.k);
        if want >= alg.step() || got != want {
            issues.push(ValidationIssue::Gradation {
                i: e.i,
                j: e.j,
                k: e.k,
                expected_layer: if want < alg.step() { Some(want) } else { None },
                actual_layer: got,
            });
        }
    }

    // Jacobi on distinct basis triples; repeated indices reduce to
    // antisymmetry, which the folded evaluation makes exact.
    let dim = alg.dim();
    let jac_tol = 1e-12 * scale.max(1.0).powi(2);
    for i in 0..dim {
        let ei = GroupPoint::basis(dim, i, 1.0);
        for j in (i + 1)..dim {
            let ej = GroupPoint::basis(dim, j, 1.0);
            for k in (j + 1)..dim {
                let ek = GroupPoint::basis(dim, k, 1.0);
                let a = alg.bracket(&ei, &alg.bracket(&ej, &ek));
                let b = alg.bracket(&ej, &alg.bracket(&ek, &ei));
                let c = alg.bracket(&ek, &alg.bracket(&ei, &ej));
                let residual = a.add(&b).add(&c).norm_inf();
                if residual > jac_tol {
                    issues.push(ValidationIssue::Jacobi { i, j, k, residual });
                }
            }
        }
    }

    ValidationReport { issues }
}

/// Builds one of the named algebras.
///
/// * `abelian(n)` — ℝⁿ with the zero bracket, step 1.
/// * `heisenberg3` — layers (2, 1) with [X, Y] = −4T, normalised so the CBH
///   product reproduces the coordinate product
///   `(z₁, t₁) · (z₂, t₂) = (z₁ + z₂, t₁ + t₂ + 2 Im(z₁ z̄₂))` exactly.
///   Other sources use other factors; all values in this crate assume this
///   one.
/// * `quaternion_heisenberg` — layers (4, 3) with [p, q] = Im(p̄ q) on ℍ.
/// * `filiform3` — layers (2, 1, 1) with [e₁, e₂] = e₃, [e₁, e₃] = e₄.
pub fn make_builtin(name: &str) -> Result<GradedLieAlgebra> {
    if let Some(rest) = name.strip_prefix("abelian(").and_then(|r| r.strip_suffix(')')) {
        let n: usize = rest
            .trim()
            .parse()
            .map_err(|_| Error::UnknownBuiltin(name.to_string()))?;
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!(
                "abelian dimension must be in 1..=64, got {n}"
            )));
        }
        return GradedLieAlgebra::new(name, &[n], &[]);
    }
    match name {
        "heisenberg3" => GradedLieAlgebra::new(
            "heisenberg3",
            &[2, 1],
            &[RawEntry { i: 0, j: 1, k: 2, c: -4.0 }],
        ),
        "quaternion_heisenberg" => {
            // Basis 1, i, j, k on V₁ and i, j, k on V₂; [p, q] = Im(p̄ q).
            let e = |i, j, k, c| RawEntry { i, j, k, c };
            GradedLieAlgebra::new(
                "quaternion_heisenberg",
                &[4, 3],
                &[
                    e(0, 1, 4, 1.0),
                    e(0, 2, 5, 1.0),
                    e(0, 3, 6, 1.0),
                    e(1, 2, 6, -1.0),
                    e(1, 3, 5, 1.0),
                    e(2, 3, 4, -1.0),
                ],
            )
        }
        "filiform3" => GradedLieAlgebra::new(
            "filiform3",
            &[2, 1, 1],
            &[
                RawEntry { i: 0, j: 1, k: 2, c: 1.0 },
                RawEntry { i: 0, j: 2, k: 3, c: 1.0 },
            ],
        ),
        _ => Err(Error::UnknownBuiltin(name.to_string())),
    }
}

/// Names accepted by [`make_builtin`], alphabetical.
pub const BUILTIN_NAMES: [&str; 4] = [
    "abelian(n)",
    "filiform3",
    "heisenberg3",
    "quaternion_heisenberg",
];

#[derive(Debug, Deserialize)]
struct AlgebraFile {
    name: Option<String>,
    layer_dims: Vec<usize>,
    step: Option<usize>,
    entries: Vec<(usize, usize, usize, f64)>,
}

/// Parses an algebra definition document.
///
/// The format is TOML with fields `layer_dims`, optional `step` and `name`,
/// and `entries` as a list of `[i, j, k, value]` quadruples with 1-based
/// basis indices. Specifying `(i, j, k, v)` implies `(j, i, k, −v)`; if both
/// orientations are given they must agree, and the loaded algebra must pass
/// validation.
pub fn parse_algebra(text: &str) -> Result<GradedLieAlgebra> {
    let file: AlgebraFile =
        toml::from_str(text).map_err(|e| Error::InvalidAlgebraFile(e.to_string()))?;
    if let Some(step) = file.step {
        if step != file.layer_dims.len() {
            return Err(Error::InvalidAlgebraFile(format!(
                "step {} does not match the {} declared layers",
                step,
                file.layer_dims.len()
            )));
        }
    }
    let dim: usize = file.layer_dims.iter().sum();
    let mut raw = Vec::new();
    use std::collections::BTreeMap;
    let mut explicit: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for &(i1, j1, k1, v) in &file.entries {
        if i1 == 0 || j1 == 0 || k1 == 0 {
            return Err(Error::InvalidAlgebraFile(
                "entry indices are 1-based; 0 is out of range".into(),
            ));
        }
        let (i, j, k) = (i1 - 1, j1 - 1, k1 - 1);
        if i >= dim || j >= dim || k >= dim {
            return Err(Error::InvalidAlgebraFile(format!(
                "entry ({i1}, {j1}, {k1}) exceeds dimension {dim}"
            )));
        }
        if i == j && v != 0.0 {
            return Err(Error::InvalidAlgebraFile(format!(
                "entry ({i1}, {i1}, {k1}) must be zero by antisymmetry"
            )));
        }
        if let Some(&prev) = explicit.get(&(i, j, k)) {
            if prev != v {
                return Err(Error::InvalidAlgebraFile(format!(
                    "entry ({i1}, {j1}, {k1}) given twice with different values {prev} and {v}"
                )));
            }
            continue;
        }
        if let Some(&mirror) = explicit.get(&(j, i, k)) {
            if mirror != -v {
                return Err(Error::InvalidAlgebraFile(format!(
                    "entries ({j1}, {i1}, {k1}) = {mirror} and ({i1}, {j1}, {k1}) = {v} break antisymmetric closure"
                )));
            }
            continue;
        }
        explicit.insert((i, j, k), v);
        raw.push(RawEntry { i, j, k, c: v });
    }
    let name = file.name.as_deref().unwrap_or("custom");
    GradedLieAlgebra::new(name, &file.layer_dims, &raw)
}

/// Loads an algebra definition file; see [`parse_algebra`].
pub fn load_algebra(path: &Path) -> Result<GradedLieAlgebra> {
    let text = std::fs::read_to_string(path)?;
    parse_algebra(&text)
}
