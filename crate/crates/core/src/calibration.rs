//! Measured filler-fraction → property tables and their inversion to recipes.
//!
//! Interpolation is linear in (fraction, log10 value), since conductivity
//! spans many decades over a few weight percent.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest filler weight fraction the material system tolerates.
pub const MAX_WEIGHT_FRACTION: f64 = 0.28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyKind {
    ConductivitySPerM,
    RemanenceT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub kind: PropertyKind,
    /// (weight fraction, property value), fractions strictly increasing.
    points: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct Row {
    weight_fraction: f64,
    value: f64,
}

impl CalibrationTable {
    pub fn new(kind: PropertyKind, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("calibration table needs >= 2 points"));
        }
        for (i, &(f, v)) in points.iter().enumerate() {
            check_point(f, v).map_err(Error::Domain)?;
            if i > 0 && !(f > points[i - 1].0) {
                return Err(Error::Domain(format!("fraction {f} does not increase")));
            }
        }
        Ok(Self { kind, points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn value_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| {
                (lo.min(v), hi.max(v))
            })
    }
}

fn check_point(f: f64, v: f64) -> std::result::Result<(), String> {
    if !(0.0..=MAX_WEIGHT_FRACTION).contains(&f) {
        return Err(format!("weight fraction {f} outside [0, {MAX_WEIGHT_FRACTION}]"));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("property value {v} must be positive"));
    }
    Ok(())
}

/// Reads a `weight_fraction,value` CSV; `#` starts a comment line.
///
/// Fractions must already be strictly increasing; every violation is reported
/// with the offending line number.
pub fn load_table(path: impl AsRef<Path>, kind: PropertyKind) -> Result<CalibrationTable> {
    parse_table(std::fs::File::open(path)?, kind)
}

/// [`load_table`] over any reader.
pub fn parse_table<R: Read>(input: R, kind: PropertyKind) -> Result<CalibrationTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(Error::csv_at)?.clone();
    if headers.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty file".into(),
        });
    }
    if headers.iter().collect::<Vec<_>>() != ["weight_fraction", "value"] {
        return Err(Error::Parse {
            line: headers.position().map_or(1, |p| p.line()),
            message: format!(
                "expected header weight_fraction,value, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut last_line = headers.position().map_or(1, |p| p.line());
    for record in reader.records() {
        let record = record.map_err(Error::csv_at)?;
        let line = record.position().map_or(0, |p| p.line());
        last_line = line;
        let row: Row = record.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        check_point(row.weight_fraction, row.value).map_err(|message| Error::Parse { line, message })?;
        if let Some(&(prev, _)) = points.last() {
            if !(row.weight_fraction > prev) {
                return Err(Error::Parse {
                    line,
                    message: format!("fraction {} is not above the previous {prev}", row.weight_fraction),
                });
            }
        }
        points.push((row.weight_fraction, row.value));
    }
    if points.len() < 2 {
        return Err(Error::Parse {
            line: last_line + 1,
            message: format!("table has {} data rows, need >= 2", points.len()),
        });
    }
    CalibrationTable::new(kind, points)
}

pub fn save_table(path: impl AsRef<Path>, table: &CalibrationTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["weight_fraction", "value"])?;
    for (f, v) in &table.points {
        w.write_record([f.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Log-linear interpolation; exact at the knots.
pub fn property_for_fraction(table: &CalibrationTable, fraction: f64) -> Result<f64> {
    let pts = &table.points;
    let (first, last) = (pts[0].0, pts[pts.len() - 1].0);
    if !(first..=last).contains(&fraction) {
        return Err(Error::Extrapolation { target: fraction });
    }
    let i = pts.partition_point(|&(f, _)| f <= fraction);
    if i == 0 {
        return Ok(pts[0].1);
    }
    let (f0, v0) = pts[i - 1];
    if fraction == f0 {
        return Ok(v0);
    }
    let (f1, v1) = pts[i];
    let t = (fraction - f0) / (f1 - f0);
    Ok(10f64.powf(v0.log10() + t * (v1.log10() - v0.log10())))
}

/// Fraction whose interpolated property equals `target`.
///
/// The table must be strictly monotone in value; a target outside the
/// tabulated range is reported with the nearest achievable value.
pub fn fraction_for_property(table: &CalibrationTable, target: f64) -> Result<f64> {
    let pts = &table.points;
    let rising = pts.windows(2).all(|w| w[1].1 > w[0].1);
    let falling = pts.windows(2).all(|w| w[1].1 < w[0].1);
    if !(rising || falling) {
        return Err(Error::domain(
            "table is not strictly monotone in value; inversion is ambiguous",
        ));
    }
    let (lo, hi) = table.value_range();
    if !(target > 0.0) || target < lo || target > hi {
        let nearest = if target < lo { lo } else { hi };
        return Err(Error::Unreachable { target, nearest });
    }
    for w in pts.windows(2) {
        let ((f0, v0), (f1, v1)) = (w[0], w[1]);
        if target == v0 {
            return Ok(f0);
        }
        if target == v1 {
            return Ok(f1);
        }
        if (v0 < target) == (target < v1) {
            let t = (target.log10() - v0.log10()) / (v1.log10() - v0.log10());
            return Ok(f0 + t * (f1 - f0));
        }
    }
    unreachable!("target lies within the tabulated range")
}

/// Adjacent-point interval with the steepest rise in log10(value) per unit
/// fraction; the first interval wins ties. `None` when nothing rises.
pub fn percolation_threshold(table: &CalibrationTable) -> Result<Option<(f64, f64)>> {
    let pts = &table.points;
    if pts.len() < 3 {
        return Err(Error::Domain(format!(
            "percolation search needs >= 3 points, got {}",
            pts.len()
        )));
    }
    let slopes: Vec<f64> = pts
        .windows(2)
        .map(|w| (w[1].1.log10() - w[0].1.log10()) / (w[1].0 - w[0].0))
        .collect();
    let max = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Ok(None);
    }
    // slopes equal up to rounding count as ties
    let i = slopes
        .iter()
        .position(|&s| s >= max - 1e-9 * max.abs())
        .expect("max is attained");
    Ok(Some((pts[i].0, pts[i + 1].0)))
}
