//! `dump-curvature`: curvature data at listed points, as JSON.

use std::path::Path;

use serde::Serialize;
use staticgeo_core::curvature::{curvature_at, Backend};
use staticgeo_core::pointwise_identities::{eigenframe_from, Distinctness, DEFAULT_EIG_TOL};
use staticgeo_core::{Mat3, MetricField, Point3, Vec3};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct CurvatureRow {
    pub point: Vec3,
    #[serde(flatten)]
    pub data: RowData,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum RowData {
    Ok {
        metric: Mat3,
        ricci: Mat3,
        scalar: f64,
        eigenvalues: Vec3,
        distinctness: Distinctness,
    },
    Err {
        error: String,
    },
}

/// Points as three numbers per line, separated by commas or whitespace.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Point3>, CliError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Result<Vec<f64>, _> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse::<f64>)
            .collect();
        match nums {
            Ok(v) if v.len() == 3 => out.push(Point3::new(v[0], v[1], v[2])),
            _ => {
                return Err(CliError::Config(format!(
                    "points line {}: expected three numbers, got '{line}'",
                    no + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn dump_curvature(metric_spec: &str, points: &Path) -> Result<Vec<CurvatureRow>, CliError> {
    let metric = MetricField::from_spec(metric_spec).map_err(|e| CliError::Config(format!("metric: {e}")))?;
    let text = std::fs::read_to_string(points)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", points.display())))?;
    Ok(parse_points(&text)?
        .into_iter()
        .map(|p| {
            let data = curvature_at(&metric, &p, Backend::DualNumber)
                .and_then(|b| {
                    let frame = eigenframe_from(&b, &p, DEFAULT_EIG_TOL)?;
                    Ok(RowData::Ok {
                        metric: b.metric,
                        ricci: b.ricci,
                        scalar: b.scalar,
                        eigenvalues: frame.eigenvalues,
                        distinctness: frame.distinctness,
                    })
                })
                .unwrap_or_else(|e| RowData::Err {
                    error: format!("{}: {e}", e.kind()),
                });
            CurvatureRow { point: p.coords(), data }
        })
        .collect())
}
