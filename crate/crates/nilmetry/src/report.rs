//! CSV serialization of estimator reports.
//!
//! Every decimal is written with 17 significant digits, so values survive a
//! round trip through the reader bit-for-bit, and byte-identical inputs
//! produce byte-identical files.

use std::path::Path;

use crate::algebra::GroupPoint;
use crate::error::{Error, Result};
use crate::harness::{ConvergenceReport, EnvelopeFit, QIReport};

/// 17-significant-digit decimal form; parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::ReportParse(format!("bad {what}: `{field}`")))
}

fn parse_opt(field: &str, what: &str) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(field, what).map(Some)
    }
}

/// Semicolon-joined coordinates, the witness field format.
pub fn fmt_coords(p: &GroupPoint) -> String {
    p.coords()
        .iter()
        .map(|c| fmt_f64(*c))
        .collect::<Vec<_>>()
        .join(";")
}

/// Report types that serialize to a fixed CSV schema and read back.
pub trait CsvReport: Sized {
    fn to_csv(&self) -> String;
    fn from_csv(text: &str) -> Result<Self>;
}

/// Writes any report to a file.
pub fn write_report<R: CsvReport>(report: &R, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_csv())?;
    Ok(())
}

pub const QI_HEADER: &str = "direction,L_hat,A_hat,claimed_L,claimed_A,violations,samples,seed";

impl CsvReport for QIReport {
    fn to_csv(&self) -> String {
        let mut out = String::from(QI_HEADER);
        out.push('\n');
        let row = |dir: &str, fit: &EnvelopeFit, violations: usize| {
            format!(
                "{dir},{},{},{},{},{violations},{},{}\n",
                fmt_f64(fit.l_hat),
                fmt_f64(fit.a_hat),
                fmt_opt(self.claimed.map(|c| c.0)),
                fmt_opt(self.claimed.map(|c| c.1)),
                fit.used + fit.excluded,
                self.seed,
            )
        };
        out.push_str(&row("forward", &self.forward, self.violations_forward));
        if let Some(inv) = &self.inverse {
            out.push_str(&row("inverse", inv, self.violations_inverse));
        }
        out
    }

    fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::ReportParse("empty file".into()))?;
        if header.trim() != QI_HEADER {
            return Err(Error::ReportParse(format!("unexpected header `{header}`")));
        }
        let mut forward = None;
        let mut inverse = None;
        let mut claimed = None;
        let mut violations_forward = 0;
        let mut violations_inverse = 0;
        let mut seed = 0u64;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(Error::ReportParse(format!("row has {} fields", fields.len())));
            }
            let fit = EnvelopeFit {
                l_hat: parse_f64(fields[1], "L_hat")?,
                a_hat: parse_f64(fields[2], "A_hat")?,
                witness: None,
                used: fields[6]
                    .trim()
                    .parse()
                    .map_err(|_| Error::ReportParse("bad samples".into()))?,
                excluded: 0,
            };
            let cl = parse_opt(fields[3], "claimed_L")?;
            let ca = parse_opt(fields[4], "claimed_A")?;
            claimed = cl.zip(ca);
            let violations: usize = fields[5]
                .trim()
                .parse()
                .map_err(|_| Error::ReportParse("bad violations".into()))?;
            seed = fields[7]
                .trim()
                .parse()
                .map_err(|_| Error::ReportParse("bad seed".into()))?;
            match fields[0].trim() {
                "forward" => {
                    violations_forward = violations;
                    forward = Some(fit);
                }
                "inverse" => {
                    violations_inverse = violations;
                    inverse = Some(fit);
                }
                other => {
                    return Err(Error::ReportParse(format!("unknown direction `{other}`")));
                }
            }
        }
        Ok(QIReport {
            forward: forward.ok_or_else(|| Error::ReportParse("missing forward row".into()))?,
            inverse,
            claimed,
            violations_forward,
            violations_inverse,
            violation_witnesses: Vec::new(),
            metric_name: String::new(),
            seed,
        })
    }
}

pub const CONVERGENCE_HEADER: &str = "scale,sup_distance,bound_value,pass";

impl CsvReport for ConvergenceReport {
    fn to_csv(&self) -> String {
        let mut out = String::from(CONVERGENCE_HEADER);
        out.push('\n');
        for i in 0..self.scales.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(self.scales[i]),
                fmt_f64(self.sup_distances[i]),
                fmt_opt(self.bound_values[i]),
                self.passes[i],
            ));
        }
        out
    }

    fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::ReportParse("empty file".into()))?;
        if header.trim() != CONVERGENCE_HEADER {
            return Err(Error::ReportParse(format!("unexpected header `{header}`")));
        }
        let mut scales = Vec::new();
        let mut sups = Vec::new();
        let mut bounds = Vec::new();
        let mut passes = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::ReportParse(format!("row has {} fields", fields.len())));
            }
            scales.push(parse_f64(fields[0], "scale")?);
            sups.push(parse_f64(fields[1], "sup_distance")?);
            bounds.push(parse_opt(fields[2], "bound_value")?);
            passes.push(match fields[3].trim() {
                "true" => true,
                "false" => false,
                other => return Err(Error::ReportParse(format!("bad pass flag `{other}`"))),
            });
        }
        let decay_rate = crate::numeric::log_log_slope(
            &scales.iter().cloned().zip(sups.iter().cloned()).collect::<Vec<_>>(),
        );
        Ok(ConvergenceReport {
            scales,
            sup_distances: sups,
            bound_values: bounds,
            passes,
            decay_rate,
        })
    }
}

/// One vertical-line experiment row.
#[derive(Clone, Debug, PartialEq)]
pub struct FoliationRow {
    pub param: f64,
    pub best_base: (f64, f64),
    pub hausdorff: f64,
    pub pi_diameter: f64,
    pub t_range: f64,
}

/// Table of vertical-line image analyses.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FoliationReport {
    pub rows: Vec<FoliationRow>,
}

pub const FOLIATION_HEADER: &str = "param,best_base_re,best_base_im,hausdorff,pi_diameter,t_range";

impl CsvReport for FoliationReport {
    fn to_csv(&self) -> String {
        let mut out = String::from(FOLIATION_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f64(row.param),
                fmt_f64(row.best_base.0),
                fmt_f64(row.best_base.1),
                fmt_f64(row.hausdorff),
                fmt_f64(row.pi_diameter),
                fmt_f64(row.t_range),
            ));
        }
        out
    }

    fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::ReportParse("empty file".into()))?;
        if header.trim() != FOLIATION_HEADER {
            return Err(Error::ReportParse(format!("unexpected header `{header}`")));
        }
        let mut rows = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::ReportParse(format!("row has {} fields", fields.len())));
            }
            rows.push(FoliationRow {
                param: parse_f64(fields[0], "param")?,
                best_base: (
                    parse_f64(fields[1], "best_base_re")?,
                    parse_f64(fields[2], "best_base_im")?,
                ),
                hausdorff: parse_f64(fields[3], "hausdorff")?,
                pi_diameter: parse_f64(fields[4], "pi_diameter")?,
                t_range: parse_f64(fields[5], "t_range")?,
            });
        }
        Ok(FoliationReport { rows })
    }
}

/// A named scalar estimate with witness coordinates, the schema shared by
/// the triangle-constant and ball-box estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorRow {
    pub quantity: String,
    pub value: f64,
    pub samples: usize,
    pub seed: u64,
    /// Witness coordinates, semicolon-joined when serialized.
    pub witness: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimatorReport {
    pub rows: Vec<EstimatorRow>,
}

pub const ESTIMATOR_HEADER: &str = "quantity,value,samples,seed,witness";

impl CsvReport for EstimatorReport {
    fn to_csv(&self) -> String {
        let mut out = String::from(ESTIMATOR_HEADER);
        out.push('\n');
        for row in &self.rows {
            let witness = row
                .witness
                .iter()
                .map(|c| fmt_f64(*c))
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.quantity,
                fmt_f64(row.value),
                row.samples,
                row.seed,
                witness,
            ));
        }
        out
    }

    fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::ReportParse("empty file".into()))?;
        if header.trim() != ESTIMATOR_HEADER {
            return Err(Error::ReportParse(format!("unexpected header `{header}`")));
        }
        let mut rows = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::ReportParse(format!("row has {} fields", fields.len())));
            }
            let witness = if fields[4].trim().is_empty() {
                Vec::new()
            } else {
                fields[4]
                    .split(';')
                    .map(|c| parse_f64(c, "witness coordinate"))
                    .collect::<Result<_>>()?
            };
            rows.push(EstimatorRow {
                quantity: fields[0].trim().to_string(),
                value: parse_f64(fields[1], "value")?,
                samples: fields[2]
                    .trim()
                    .parse()
                    .map_err(|_| Error::ReportParse("bad samples".into()))?,
                seed: fields[3]
                    .trim()
                    .parse()
                    .map_err(|_| Error::ReportParse("bad seed".into()))?,
                witness,
            });
        }
        Ok(EstimatorReport { rows })
    }
}

/// One probe of a lifted planar map.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftRow {
    pub x: f64,
    pub y: f64,
    pub f1: f64,
    pub f2: f64,
    pub h0: f64,
    pub det: f64,
    pub curl: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LiftReport {
    pub rows: Vec<LiftRow>,
}

pub const LIFT_HEADER: &str = "x,y,f1,f2,h0,det,curl";

impl CsvReport for LiftReport {
    fn to_csv(&self) -> String {
        let mut out = String::from(LIFT_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(row.x),
                fmt_f64(row.y),
                fmt_f64(row.f1),
                fmt_f64(row.f2),
                fmt_f64(row.h0),
                fmt_f64(row.det),
                fmt_f64(row.curl),
            ));
        }
        out
    }

    fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::ReportParse("empty file".into()))?;
        if header.trim() != LIFT_HEADER {
            return Err(Error::ReportParse(format!("unexpected header `{header}`")));
        }
        let mut rows = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(Error::ReportParse(format!("row has {} fields", fields.len())));
            }
            let v: Vec<f64> = fields
                .iter()
                .enumerate()
                .map(|(i, f)| parse_f64(f, LIFT_HEADER.split(',').nth(i).unwrap()))
                .collect::<Result<_>>()?;
            rows.push(LiftRow {
                x: v[0],
                y: v[1],
                f1: v[2],
                f2: v[3],
                h0: v[4],
                det: v[5],
                curl: v[6],
            });
        }
        Ok(LiftReport { rows })
    }
}
