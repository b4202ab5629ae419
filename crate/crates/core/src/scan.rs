//! Tabular sweep output.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Rows of `f64` with named columns. Column names carry their unit in brackets,
/// e.g. `delta_a [kappa]`; the first `axes` columns are the swept coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub axes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

impl ScanResult {
    pub fn new(axes: &[&str], observables: &[&str]) -> Self {
        Self {
            axes: axes.iter().map(|s| s.to_string()).collect(),
            columns: axes.iter().chain(observables).map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name || c.split(" [").next() == Some(name))
            .ok_or_else(|| Error::InvalidGrid(format!("no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn has_nan(&self) -> bool {
        self.rows.iter().flatten().any(|v| v.is_nan())
    }
}

/// Maximum and median relative deviation between matching observables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub column: String,
    pub max_rel: f64,
    pub median_rel: f64,
    pub per_point: Vec<f64>,
}

/// Compares `observable` of two scans over identical axes.
pub fn compare(analytic: &ScanResult, numeric: &ScanResult, observable: &str) -> Result<Comparison> {
    if analytic.axes != numeric.axes || analytic.rows.len() != numeric.rows.len() {
        return Err(Error::InvalidGrid("axis mismatch".into()));
    }
    let na = analytic.axes.len();
    for (ra, rn) in analytic.rows.iter().zip(&numeric.rows) {
        let same = ra[..na]
            .iter()
            .zip(&rn[..na])
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0));
        if !same {
            return Err(Error::InvalidGrid("axis values differ".into()));
        }
    }
    let a = analytic.column(observable)?;
    let n = numeric.column(observable)?;
    let per_point: Vec<f64> = a
        .iter()
        .zip(&n)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() / y.abs() })
        .collect();
    let mut sorted = per_point.clone();
    sorted.sort_by(f64::total_cmp);
    let median_rel = if sorted.is_empty() {
        0.0
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    Ok(Comparison {
        column: observable.to_string(),
        max_rel: sorted.last().copied().unwrap_or(0.0),
        median_rel,
        per_point,
    })
}
