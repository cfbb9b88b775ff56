//! Textual map expressions.
//!
//! An expression is a `.`-separated chain of terms applied right-to-left,
//! for example `shear(abs) . ltrans(1,0,0) . aut(@auto.txt)`. Terms:
//!
//! * `id`
//! * `shear(<g>)` with `<g>` one of `abs`, `power:<α>`, `zero`,
//!   `const:v1;v2;…`, `linear:@<matrix file>`
//! * `ltrans(c1,c2,…)` — left translation
//! * `aut(@<matrix file>)` — automorphism from an ambient matrix
//! * `dil(<λ>)` — dilation automorphism
//! * `flambda:<λ>` — the Heisenberg inversion conjugate F_λ (heisenberg3
//!   only)
//! * `lift(<planar>)` with `<planar>` one of `id`, `f_lambda:<λ>`,
//!   `paper_example`, `@<grid file>` (heisenberg3 only)
//!
//! A `.` splits terms only outside parentheses and never between two
//! digits, so scale parameters like `flambda:0.5` parse unharmed.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::{make_builtin, GradedLieAlgebra, GroupPoint};
use crate::error::{Error, Result};
use crate::heisenberg::{inversion_conjugate, HPoint};
use crate::lift::{LiftedMap, PlanarMap};
use crate::maps::{dilation_matrix, LsMap, QuasiMap};

/// One term of a compiled expression.
#[derive(Clone)]
pub enum MapTerm {
    Identity,
    Quasi(QuasiMap),
    /// F_λ on the Heisenberg group.
    InversionConjugate(f64),
    Lift(Arc<LiftedMap>),
    /// Inverse of a lift (arises only from [`CompiledMap::inverse`]).
    LiftInverse(Arc<LiftedMap>),
}

/// A parsed, composable self-map bound to one algebra.
#[derive(Clone)]
pub struct CompiledMap {
    alg: Arc<GradedLieAlgebra>,
    terms: Vec<MapTerm>,
    label: String,
}

impl CompiledMap {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn algebra(&self) -> &Arc<GradedLieAlgebra> {
        &self.alg
    }

    /// Applies terms right-to-left. Lift terms can fail with an
    /// integrability error; everything else is total.
    pub fn apply(&self, n: &GroupPoint) -> Result<GroupPoint> {
        let mut p = n.clone();
        for term in self.terms.iter().rev() {
            p = match term {
                MapTerm::Identity => p,
                MapTerm::Quasi(q) => q.apply(&self.alg, &p),
                MapTerm::InversionConjugate(lambda) => {
                    inversion_conjugate(*lambda, &HPoint::from_group_point(&p)).to_group_point()
                }
                MapTerm::Lift(l) => l.apply(&HPoint::from_group_point(&p))?.to_group_point(),
                MapTerm::LiftInverse(l) => {
                    l.apply_inverse(&HPoint::from_group_point(&p))?.to_group_point()
                }
            };
        }
        Ok(p)
    }

    /// The exact inverse expression, when every term has one.
    pub fn inverse(&self) -> Result<CompiledMap> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for term in self.terms.iter().rev() {
            terms.push(match term {
                MapTerm::Identity => MapTerm::Identity,
                MapTerm::Quasi(q) => MapTerm::Quasi(q.inverse()?),
                MapTerm::InversionConjugate(lambda) => {
                    MapTerm::InversionConjugate(1.0 / *lambda)
                }
                MapTerm::Lift(l) => {
                    if !l.planar().has_inverse() {
                        return Err(Error::NoInverse(format!(
                            "lift of {} (planar map has no inverse)",
                            l.planar().name()
                        )));
                    }
                    MapTerm::LiftInverse(l.clone())
                }
                MapTerm::LiftInverse(l) => MapTerm::Lift(l.clone()),
            });
        }
        Ok(CompiledMap {
            alg: self.alg.clone(),
            terms,
            label: format!("inverse({})", self.label),
        })
    }

    /// The generator when the expression is a single shear term.
    pub fn as_pure_shear(&self) -> Option<&LsMap> {
        match self.terms.as_slice() {
            [MapTerm::Quasi(QuasiMap::Shear(g))] => Some(g),
            _ => None,
        }
    }

    /// Probes the map at a few points so later bulk application cannot hit
    /// a latent integrability error.
    pub fn precheck(&self) -> Result<()> {
        let dim = self.alg.dim();
        for i in 0..3 {
            let p = GroupPoint::new((0..dim).map(|d| 0.37 * (i + d + 1) as f64).collect());
            self.apply(&p)?;
        }
        Ok(())
    }

    /// A panicking closure for samplers, valid after a successful
    /// [`CompiledMap::precheck`].
    pub fn applier(self: &Arc<Self>) -> impl Fn(&GroupPoint) -> GroupPoint + Sync + Send {
        let map = self.clone();
        move |n| {
            map.apply(n)
                .expect("map application failed after successful precheck")
        }
    }
}

fn requires_heisenberg(alg: &GradedLieAlgebra, what: &str) -> Result<()> {
    let builtin = make_builtin("heisenberg3").expect("builtin");
    if alg.same_structure(&builtin) {
        Ok(())
    } else {
        Err(Error::MapExpr(format!(
            "`{what}` needs the heisenberg3 group, got {}",
            alg.name()
        )))
    }
}

/// Splits at top-level dots that do not sit between two digits.
fn split_terms(expr: &str) -> Vec<String> {
    let bytes = expr.as_bytes();
    let mut depth = 0usize;
    let mut parts = Vec::new();
    let mut start = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth = depth.saturating_sub(1),
            b'.' if depth == 0 => {
                let prev_digit = i > 0 && bytes[i - 1].is_ascii_digit();
                let next_digit = i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit();
                if !(prev_digit && next_digit) {
                    parts.push(expr[start..i].to_string());
                    start = i + 1;
                }
            }
            _ => {}
        }
    }
    parts.push(expr[start..].to_string());
    parts
}

/// Parses a map expression against an algebra. Files referenced with `@`
/// are resolved relative to the working directory.
pub fn parse_map_expr(alg: &Arc<GradedLieAlgebra>, expr: &str) -> Result<CompiledMap> {
    let trimmed = expr.trim();
    if trimmed.is_empty() {
        return Err(Error::MapExpr("empty map expression".into()));
    }
    let mut terms = Vec::new();
    for raw in split_terms(trimmed) {
        let term = raw.trim();
        if term.is_empty() {
            return Err(Error::MapExpr(format!("empty term in `{expr}`")));
        }
        terms.push(parse_term(alg, term)?);
    }
    Ok(CompiledMap {
        alg: alg.clone(),
        terms,
        label: trimmed.to_string(),
    })
}

fn parse_term(alg: &Arc<GradedLieAlgebra>, term: &str) -> Result<MapTerm> {
    if term == "id" {
        return Ok(MapTerm::Identity);
    }
    if let Some(body) = strip_call(term, "shear") {
        let g = parse_shear_generator(alg, body)?;
        return Ok(MapTerm::Quasi(QuasiMap::Shear(g)));
    }
    if let Some(body) = strip_call(term, "ltrans") {
        let coords: Vec<f64> = body
            .split(',')
            .map(|c| {
                c.trim()
                    .parse()
                    .map_err(|_| Error::MapExpr(format!("bad coordinate `{c}` in `{term}`")))
            })
            .collect::<Result<_>>()?;
        if coords.len() != alg.dim() {
            return Err(Error::MapExpr(format!(
                "ltrans needs {} coordinates, got {}",
                alg.dim(),
                coords.len()
            )));
        }
        return Ok(MapTerm::Quasi(QuasiMap::LeftTranslation(GroupPoint::new(coords))));
    }
    if let Some(body) = strip_call(term, "aut") {
        let path = body
            .strip_prefix('@')
            .ok_or_else(|| Error::MapExpr(format!("aut takes `@file`, got `{body}`")))?;
        let matrix = parse_matrix_file(Path::new(path), alg.dim(), alg.dim())?;
        return Ok(MapTerm::Quasi(QuasiMap::Automorphism(matrix)));
    }
    if let Some(body) = strip_call(term, "dil") {
        let lambda: f64 = body
            .trim()
            .parse()
            .map_err(|_| Error::MapExpr(format!("bad dilation scale `{body}`")))?;
        if lambda <= 0.0 {
            return Err(Error::MapExpr("dilation scale must be positive".into()));
        }
        return Ok(MapTerm::Quasi(QuasiMap::Automorphism(dilation_matrix(alg, lambda))));
    }
    if let Some(rest) = term
        .strip_prefix("flambda:")
        .or_else(|| term.strip_prefix("Flambda:"))
    {
        requires_heisenberg(alg, term)?;
        let lambda: f64 = rest
            .trim()
            .parse()
            .map_err(|_| Error::MapExpr(format!("bad λ in `{term}`")))?;
        if lambda <= 0.0 {
            return Err(Error::MapExpr("flambda needs λ > 0".into()));
        }
        return Ok(MapTerm::InversionConjugate(lambda));
    }
    if let Some(body) = strip_call(term, "lift") {
        requires_heisenberg(alg, term)?;
        let planar = parse_planar(body)?;
        return Ok(MapTerm::Lift(Arc::new(LiftedMap::new(planar))));
    }
    Err(Error::MapExpr(format!("unrecognised term `{term}`")))
}

fn strip_call<'a>(term: &'a str, name: &str) -> Option<&'a str> {
    term.strip_prefix(name)
        .and_then(|rest| rest.strip_prefix('('))
        .and_then(|rest| rest.strip_suffix(')'))
}

fn parse_shear_generator(alg: &GradedLieAlgebra, body: &str) -> Result<LsMap> {
    let d1 = alg.layer_dims()[0];
    let dr = *alg.layer_dims().last().unwrap();
    let body = body.trim();
    if body == "abs" {
        return Ok(LsMap::abs(d1, dr));
    }
    if body == "zero" {
        return Ok(LsMap::zero(d1, dr));
    }
    if let Some(alpha) = body.strip_prefix("power:") {
        let alpha: f64 = alpha
            .trim()
            .parse()
            .map_err(|_| Error::MapExpr(format!("bad power exponent `{alpha}`")))?;
        return LsMap::power(alpha, d1, dr);
    }
    if let Some(values) = body.strip_prefix("const:") {
        let v: Vec<f64> = values
            .split(';')
            .map(|c| {
                c.trim()
                    .parse()
                    .map_err(|_| Error::MapExpr(format!("bad constant `{c}`")))
            })
            .collect::<Result<_>>()?;
        if v.len() != dr {
            return Err(Error::MapExpr(format!(
                "const generator needs {dr} components, got {}",
                v.len()
            )));
        }
        return Ok(LsMap::constant(v, d1));
    }
    if let Some(path) = body.strip_prefix("linear:@") {
        let matrix = parse_matrix_file(Path::new(path), dr, d1)?;
        return LsMap::linear(matrix);
    }
    Err(Error::MapExpr(format!("unrecognised shear generator `{body}`")))
}

/// Parses `id`, `f_lambda:<λ>`, `paper_example`, or `@<grid file>`.
pub fn parse_planar(body: &str) -> Result<PlanarMap> {
    let body = body.trim();
    if body == "id" {
        return Ok(PlanarMap::identity());
    }
    if body == "paper_example" {
        return Ok(PlanarMap::shear_example());
    }
    if let Some(lambda) = body.strip_prefix("f_lambda:") {
        let lambda: f64 = lambda
            .trim()
            .parse()
            .map_err(|_| Error::MapExpr(format!("bad λ in `{body}`")))?;
        return PlanarMap::stretch(lambda);
    }
    if let Some(path) = body.strip_prefix('@') {
        let text = std::fs::read_to_string(path)?;
        return PlanarMap::from_grid_text(path, &text);
    }
    Err(Error::MapExpr(format!("unrecognised planar map `{body}`")))
}

fn parse_matrix_file(path: &Path, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_text(&text, rows, cols)
}

/// Whitespace-separated matrix rows, `#` comments allowed.
pub fn parse_matrix_text(text: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let mut data = Vec::new();
    let mut row_count = 0usize;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|c| {
                c.parse()
                    .map_err(|_| Error::MapExpr(format!("bad matrix entry `{c}`")))
            })
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(Error::MapExpr(format!(
                "matrix row has {} entries, expected {cols}",
                row.len()
            )));
        }
        data.extend(row);
        row_count += 1;
    }
    if row_count != rows {
        return Err(Error::MapExpr(format!(
            "matrix has {row_count} rows, expected {rows}"
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}
