//! CSV and JSON persistence. Output carries no timestamps so repeated runs are
//! byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use omx_core::scan::ScanResult;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lines shared by every output file: version, scenario, unit, resolved inputs
/// and the verbatim configuration.
fn provenance(cfg: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    let mut lines = vec![
        format!("omx {VERSION}"),
        format!("scenario: {}", cfg.scenario.name()),
        format!("rate unit: {}", cfg.unit.label()),
        format!("params: {}", serde_json::to_string(&cfg.params)?),
        format!("truncations: {}", serde_json::to_string(&cfg.truncations)?),
        format!("options: {}", serde_json::to_string(&cfg.options)?),
    ];
    lines.extend(cfg.source.lines().map(|l| format!("config| {l}")));
    Ok(lines)
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
fn number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn write_csv(path: &Path, cfg: &ExperimentConfig, scan: &ScanResult) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    for line in provenance(cfg)? {
        writeln!(file, "# {line}")?;
    }
    for (k, v) in &scan.metadata {
        writeln!(file, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&scan.columns)?;
    for row in &scan.rows {
        w.write_record(row.iter().map(|&x| number(x)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::number;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -1.5, 3.3e-18, 0.1 + 0.2, 2.5e20, -7e-5, f64::MIN_POSITIVE] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(number(3.3e-18), "3.3e-18");
        assert_eq!(number(f64::NAN), "NaN");
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    omx_version: &'a str,
    scenario: &'a str,
    rate_unit: &'a str,
    config: &'a str,
    params: &'a omx_core::models::SystemParams,
    truncations: &'a Option<omx_core::models::Truncations>,
    options: &'a crate::config::Options,
    summary: &'a BTreeMap<String, serde_json::Value>,
    tables: BTreeMap<&'a str, &'a ScanResult>,
}

pub fn write_json(
    path: &Path,
    cfg: &ExperimentConfig,
    tables: &[(String, ScanResult)],
    summary: &BTreeMap<String, serde_json::Value>,
) -> Result<(), CliError> {
    let doc = JsonDoc {
        omx_version: VERSION,
        scenario: cfg.scenario.name(),
        rate_unit: cfg.unit.label(),
        config: &cfg.source,
        params: &cfg.params,
        truncations: &cfg.truncations,
        options: &cfg.options,
        summary,
        tables: tables.iter().map(|(n, s)| (n.as_str(), s)).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
