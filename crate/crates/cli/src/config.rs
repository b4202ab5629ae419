//! Experiment configuration.
//!
//! TOML with four tables: `[params]`, `[truncations]`, `[grid.<axis>]` and
//! `[options]`, plus the top-level `scenario` key. Dimensional values are
//! strings carrying a unit, e.g. `"5 MHz"`, `"-0.5 g0"`, `"0.1 K"`, `"2 us"`.
//! Rates are stored in a single internal unit: κ, unless `kappa` itself is
//! given in units of g₀, in which case g₀ is the unit.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use omx_core::models::{SystemParams, Truncations};
use omx_core::parallel::Execution;
use serde::{Deserialize, Serialize};
use toml::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Spectrum,
    G2scan,
    Ming2,
    Transistor,
    GateError,
    PhononEigen,
    CompareEffective,
    Sweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spectrum => "spectrum",
            Scenario::G2scan => "g2scan",
            Scenario::Ming2 => "ming2",
            Scenario::Transistor => "transistor",
            Scenario::GateError => "gate-error",
            Scenario::PhononEigen => "phonon-eigen",
            Scenario::CompareEffective => "compare-effective",
            Scenario::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<Scenario>,
    #[serde(default)]
    params: BTreeMap<String, Value>,
    truncations: Option<RawTruncations>,
    #[serde(default)]
    grid: BTreeMap<String, RawAxis>,
    #[serde(default)]
    options: Options,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruncations {
    a: usize,
    s: usize,
    m: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    start: Option<Value>,
    stop: Option<Value>,
    points: Option<usize>,
    #[serde(default)]
    scale: Scale,
    values: Option<Vec<Value>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Lin,
    Log,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareKind {
    #[default]
    PhononEigen,
    G2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    G2,
    G2Full,
    MinG2,
    TransistorEpsilon,
    GateEpsilon,
    Lambda,
    GammaPhi,
    GammaPrime,
}

/// Scenario switches; every field has a default.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub execution: Execution,
    /// Occupations of the pinned mechanical state (`spectrum`).
    pub n_m: Vec<usize>,
    /// Add full master-equation columns (`g2scan`).
    pub full_me: bool,
    /// Evolve the effective master equation for the gate error (`gate-error`, `sweep`).
    pub exact: bool,
    /// Phonon truncation per mode for the exact gate evolution.
    pub gate_dim: usize,
    /// Highest phonon number reported (`phonon-eigen`, `compare-effective`).
    pub levels: usize,
    /// Use the per-Fock corrected rates in predictions.
    pub corrected: bool,
    pub kind: CompareKind,
    /// Maximum allowed relative deviation (`compare-effective`).
    pub tolerance: Option<f64>,
    pub observable: Option<Observable>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            execution: Execution::Parallel,
            n_m: vec![0, 1],
            full_me: false,
            exact: false,
            gate_dim: 4,
            levels: 3,
            corrected: true,
            kind: CompareKind::default(),
            tolerance: None,
            observable: None,
        }
    }
}

/// The internal rate unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    Kappa,
    G0,
}

impl RateUnit {
    pub fn label(self) -> &'static str {
        match self {
            RateUnit::Kappa => "kappa",
            RateUnit::G0 => "g0",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Base parameters in internal units, as given (not resolved).
    pub params: SystemParams,
    pub truncations: Option<Truncations>,
    /// Axes sorted by name.
    pub axes: Vec<Axis>,
    pub options: Options,
    pub unit: RateUnit,
    /// Verbatim configuration text, embedded in every output.
    pub source: String,
}

impl ExperimentConfig {
    pub fn axis(&self, name: &str) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Rate,
    Time,
    Temperature,
    Plain,
}

fn kind_of(name: &str) -> Option<Kind> {
    Some(match name {
        "kappa" | "g0" | "omega_m" | "omega_m2" | "omega_c" | "omega_l" | "j" | "gamma"
        | "gamma_m" | "drive_s" | "drive_a" | "drive_1" | "drive_2" | "delta_s" | "delta_a"
        | "delta" | "frame_delta" | "detuning" => Kind::Rate,
        "tau_p" => Kind::Time,
        "temperature" => Kind::Temperature,
        "n_th" | "alpha" | "q" => Kind::Plain,
        _ => return None,
    })
}

/// A parsed quantity before conversion to internal units.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Quantity {
    /// rad/s, s or K.
    Si(f64),
    PerKappa(f64),
    PerG0(f64),
    /// Time in units of the inverse of the named rate.
    InvKappa(f64),
    InvG0(f64),
    Plain(f64),
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_quantity(name: &str, v: &Value) -> Result<Quantity, CliError> {
    let kind = kind_of(name).ok_or_else(|| config_err(format!("unknown parameter `{name}`")))?;
    let number = |v: &Value| match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    if let Some(x) = number(v) {
        return if kind == Kind::Plain {
            Ok(Quantity::Plain(x))
        } else {
            Err(config_err(format!("`{name}` is dimensional and needs a unit, e.g. \"{x} kappa\"")))
        };
    }
    let text = v
        .as_str()
        .ok_or_else(|| config_err(format!("`{name}` must be a number or a string with unit")))?
        .trim();
    let (num, unit) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    let x: f64 = num
        .parse()
        .map_err(|_| config_err(format!("`{name}`: cannot parse number in `{text}`")))?;
    let unit = unit.trim();
    let q = match (kind, unit) {
        (Kind::Plain, "") => Quantity::Plain(x),
        (Kind::Rate, "kappa") => Quantity::PerKappa(x),
        (Kind::Rate, "g0") => Quantity::PerG0(x),
        (Kind::Rate, "rad/s") => Quantity::Si(x),
        (Kind::Rate, "Hz") => Quantity::Si(2.0 * PI * x),
        (Kind::Rate, "kHz") => Quantity::Si(2.0 * PI * x * 1e3),
        (Kind::Rate, "MHz") => Quantity::Si(2.0 * PI * x * 1e6),
        (Kind::Rate, "GHz") => Quantity::Si(2.0 * PI * x * 1e9),
        (Kind::Time, "1/kappa") => Quantity::InvKappa(x),
        (Kind::Time, "1/g0") => Quantity::InvG0(x),
        (Kind::Time, "s") => Quantity::Si(x),
        (Kind::Time, "ms") => Quantity::Si(x * 1e-3),
        (Kind::Time, "us") => Quantity::Si(x * 1e-6),
        (Kind::Time, "ns") => Quantity::Si(x * 1e-9),
        (Kind::Temperature, "K") => Quantity::Si(x),
        (Kind::Temperature, "mK") => Quantity::Si(x * 1e-3),
        _ => {
            return Err(config_err(format!(
                "`{name}`: unit `{unit}` is not valid for this quantity"
            )))
        }
    };
    Ok(q)
}

/// Conversion of parsed quantities to internal units.
struct Units {
    unit: RateUnit,
    /// rad/s per internal unit, when known.
    si: Option<f64>,
    kappa: f64,
    g0: Option<f64>,
}

impl Units {
    fn from_params(raw: &BTreeMap<String, Quantity>) -> Result<Self, CliError> {
        let kappa = raw.get("kappa").copied().unwrap_or(Quantity::PerKappa(1.0));
        let g0 = raw.get("g0").copied();
        match kappa {
            Quantity::PerKappa(x) if x != 1.0 => {
                Err(config_err("`kappa` in kappa units must be 1"))
            }
            Quantity::PerKappa(_) | Quantity::Si(_) => {
                let si = match kappa {
                    Quantity::Si(k) => Some(k),
                    _ => None,
                };
                let g0 = match g0 {
                    None => None,
                    Some(Quantity::PerKappa(x)) => Some(x),
                    Some(Quantity::Si(x)) => Some(
                        x / si.ok_or_else(|| config_err("`g0` in SI units needs `kappa` in SI units"))?,
                    ),
                    Some(_) => return Err(config_err("`g0` cannot be given in units of itself")),
                };
                Ok(Self { unit: RateUnit::Kappa, si, kappa: 1.0, g0 })
            }
            Quantity::PerG0(x) => {
                let si = match g0 {
                    Some(Quantity::Si(g)) => Some(g),
                    None => None,
                    Some(_) => {
                        return Err(config_err(
                            "with `kappa` in g0 units, `g0` must be absent or in SI units",
                        ))
                    }
                };
                Ok(Self { unit: RateUnit::G0, si, kappa: x, g0: Some(1.0) })
            }
            _ => Err(config_err("`kappa` must be a rate")),
        }
    }

    fn convert(&self, name: &str, q: Quantity) -> Result<f64, CliError> {
        let need_si = || {
            self.si.ok_or_else(|| {
                config_err(format!("`{name}` uses SI units; give `kappa` (or `g0`) in SI units too"))
            })
        };
        let need_g0 = || self.g0.ok_or_else(|| config_err(format!("`{name}` is relative to g0, which is not set")));
        Ok(match q {
            Quantity::Plain(x) => x,
            Quantity::PerKappa(x) => x * self.kappa,
            Quantity::PerG0(x) => x * need_g0()?,
            Quantity::InvKappa(x) => x / self.kappa,
            Quantity::InvG0(x) => x / need_g0()?,
            Quantity::Si(x) => match kind_of(name) {
                Some(Kind::Rate) => x / need_si()?,
                Some(Kind::Time) => x * need_si()?,
                _ => x,
            },
        })
    }
}

/// Writes `value` into the parameter field `name`.
pub fn set_param(p: &mut SystemParams, name: &str, value: f64) -> Result<(), CliError> {
    let slot = match name {
        "kappa" => {
            p.kappa = value;
            return Ok(());
        }
        "g0" => &mut p.g0,
        "omega_m" => &mut p.omega_m,
        "omega_m2" => &mut p.omega_m2,
        "omega_c" => &mut p.omega_c,
        "omega_l" => &mut p.omega_l,
        "j" => &mut p.j,
        "gamma" => &mut p.gamma,
        "gamma_m" => &mut p.gamma_m,
        "drive_s" => &mut p.drive_s,
        "drive_a" => &mut p.drive_a,
        "drive_1" => &mut p.drive_1,
        "drive_2" => &mut p.drive_2,
        "delta_s" => &mut p.delta_s,
        "delta_a" => &mut p.delta_a,
        "delta" => &mut p.delta,
        "frame_delta" => &mut p.frame_delta,
        "tau_p" => &mut p.tau_p,
        "temperature" => &mut p.temperature,
        "n_th" => &mut p.n_th,
        "alpha" => &mut p.alpha,
        "q" => &mut p.q,
        _ => return Err(config_err(format!("unknown parameter `{name}`"))),
    };
    *slot = Some(value);
    Ok(())
}

/// Unit label of a parameter column, e.g. `kappa`, `1/kappa`, `K` or `1`.
pub fn unit_label(name: &str, unit: RateUnit) -> String {
    match kind_of(name) {
        Some(Kind::Rate) => unit.label().to_string(),
        Some(Kind::Time) => format!("1/{}", unit.label()),
        Some(Kind::Temperature) => "K".to_string(),
        _ => "1".to_string(),
    }
}

fn expand(name: &str, raw: &RawAxis, units: &Units) -> Result<Vec<f64>, CliError> {
    let conv = |v: &Value| -> Result<f64, CliError> {
        let q = match kind_of(name) {
            Some(_) => parse_quantity(name, v)?,
            None => return Err(config_err(format!("unknown grid axis `{name}`"))),
        };
        units.convert(name, q)
    };
    if let Some(values) = &raw.values {
        if raw.start.is_some() || raw.stop.is_some() || raw.points.is_some() {
            return Err(config_err(format!("grid `{name}`: give either `values` or start/stop/points")));
        }
        return values.iter().map(conv).collect();
    }
    let (Some(start), Some(stop), Some(points)) = (&raw.start, &raw.stop, raw.points) else {
        return Err(config_err(format!("grid `{name}` needs start, stop and points (or values)")));
    };
    let (a, b) = (conv(start)?, conv(stop)?);
    if points == 0 {
        return Ok(Vec::new());
    }
    if points == 1 {
        return Ok(vec![a]);
    }
    let t = |k: usize| k as f64 / (points - 1) as f64;
    match raw.scale {
        Scale::Lin => Ok((0..points).map(|k| a + (b - a) * t(k)).collect()),
        Scale::Log => {
            if !(a > 0.0 && b > 0.0) && !(a < 0.0 && b < 0.0) {
                return Err(config_err(format!("grid `{name}`: log scale needs endpoints of equal sign")));
            }
            let (la, lb) = (a.abs().ln(), b.abs().ln());
            Ok((0..points).map(|k| a.signum() * (la + (lb - la) * t(k)).exp()).collect())
        }
    }
}

/// Parses a configuration. `scenario` overrides the file's `scenario` key, which
/// must agree with it when present.
pub fn parse(text: &str, scenario: Scenario) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
    if let Some(s) = raw.scenario {
        if s != scenario {
            return Err(config_err(format!(
                "config is for scenario `{}`, not `{}`",
                s.name(),
                scenario.name()
            )));
        }
    }
    let parsed: BTreeMap<String, Quantity> = raw
        .params
        .iter()
        .map(|(k, v)| Ok((k.clone(), parse_quantity(k, v)?)))
        .collect::<Result<_, CliError>>()?;
    let units = Units::from_params(&parsed)?;
    let mut params = SystemParams {
        kappa: units.kappa,
        g0: units.g0,
        kappa_si: units.si,
        ..Default::default()
    };
    for (name, q) in &parsed {
        if name == "kappa" || name == "g0" {
            continue;
        }
        set_param(&mut params, name, units.convert(name, *q)?)?;
    }
    let axes = raw
        .grid
        .iter()
        .map(|(name, a)| {
            Ok(Axis {
                name: name.clone(),
                values: expand(name, a, &units)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if let Some(a) = axes.iter().find(|a| a.values.is_empty()) {
        return Err(config_err(format!("grid `{}` is empty", a.name)));
    }
    let opts = &raw.options;
    if opts.gate_dim < 2 || opts.levels == 0 {
        return Err(config_err("`gate_dim` must be at least 2 and `levels` at least 1"));
    }
    if opts.tolerance.is_some_and(|t| !(t >= 0.0)) {
        return Err(config_err("`tolerance` must be non-negative"));
    }
    Ok(ExperimentConfig {
        scenario,
        params,
        truncations: raw.truncations.map(|t| Truncations::new(t.a, t.s, t.m)),
        axes,
        options: raw.options,
        unit: units.unit,
        source: text.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<ExperimentConfig, CliError> {
        parse(text, Scenario::Sweep)
    }

    #[test]
    fn physical_units_scale_by_kappa() {
        let c = cfg("[params]\nkappa = \"5 MHz\"\ng0 = \"50 MHz\"\ntau_p = \"1 us\"\ntemperature = \"100 mK\"\n").unwrap();
        assert_eq!(c.unit, RateUnit::Kappa);
        assert!((c.params.g0.unwrap() - 10.0).abs() < 1e-12);
        assert!((c.params.tau_p.unwrap() - 2.0 * PI * 5.0).abs() < 1e-9);
        assert!((c.params.temperature.unwrap() - 0.1).abs() < 1e-15);
        assert!((c.params.kappa_si.unwrap() - 2.0 * PI * 5e6).abs() < 1e-6);
    }

    #[test]
    fn g0_becomes_the_unit_when_kappa_refers_to_it() {
        let c = cfg("[params]\nkappa = \"0.01 g0\"\ndelta_s = \"-0.5 g0\"\ngamma = \"0.02 kappa\"\n").unwrap();
        assert_eq!(c.unit, RateUnit::G0);
        assert_eq!(c.params.kappa, 0.01);
        assert_eq!(c.params.delta_s, Some(-0.5));
        assert!((c.params.gamma.unwrap() - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn dimensional_values_need_units() {
        assert!(matches!(cfg("[params]\ng0 = 8\n"), Err(CliError::Config(_))));
        assert!(matches!(cfg("[params]\ng0 = \"8 furlongs\"\n"), Err(CliError::Config(_))));
        assert!(matches!(cfg("[params]\ng0 = \"8 MHz\"\n"), Err(CliError::Config(_))));
        assert!(cfg("[params]\nn_th = 0.5\nalpha = 1\n").is_ok());
    }

    #[test]
    fn grids_expand_linearly_and_logarithmically() {
        let c = cfg("[grid.delta_a]\nstart = \"-1 kappa\"\nstop = \"1 kappa\"\npoints = 5\n\
                     [grid.gamma_m]\nstart = \"1e-4 kappa\"\nstop = \"1e-2 kappa\"\npoints = 3\nscale = \"log\"\n")
            .unwrap();
        assert_eq!(c.axis("delta_a").unwrap().values, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g = &c.axis("gamma_m").unwrap().values;
        assert!((g[1] - 1e-3).abs() < 1e-15);
        // Axes are kept in name order.
        assert_eq!(c.axes[0].name, "delta_a");
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let r = cfg("[grid.delta_a]\nstart = \"0 kappa\"\nstop = \"1 kappa\"\npoints = 0\n");
        assert!(matches!(r, Err(CliError::Config(m)) if m.contains("empty")));
    }

    #[test]
    fn scenario_key_must_match_the_subcommand() {
        assert!(parse("scenario = \"g2scan\"\n", Scenario::G2scan).is_ok());
        assert!(parse("scenario = \"g2scan\"\n", Scenario::Ming2).is_err());
    }
}
