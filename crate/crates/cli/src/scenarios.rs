//! Named experiments. Each evaluates its grid points in parallel and assembles
//! rows in grid order; the first failing point stops assembly, and the rows
//! before it are still written.

use std::collections::BTreeMap;

use omx_core::analytics::{
    eigenvalue_prediction_with, min_g2, phase_gate_error, phonon_nonlinearity, six_state_g2,
    thermal_levels, transistor_error, GateOptions, DEFAULT_DRIVE,
};
use omx_core::dynamics::{g2_zero, nonhermitian_eigs, reflection_spectrum, steady_state};
use omx_core::hilbert::{expect, number_op, FockState, THERMAL_TAIL_TOL};
use omx_core::models::{build_nonhermitian, build_rwa, hybrid_b_mode, hybridize, SystemParams, Truncations};
use omx_core::parallel::{par_map, Execution};
use omx_core::scan::{compare, ScanResult};
use omx_core::{Error, Result};
use serde_json::{json, Value};

use crate::config::{set_param, unit_label, Axis, CompareKind, ExperimentConfig, Observable, Scenario};
use crate::CliError;

/// Tables to write (file stem, table), a JSON summary and the failure, if any.
pub struct Run {
    pub tables: Vec<(String, ScanResult)>,
    pub summary: BTreeMap<String, Value>,
    pub failure: Option<CliError>,
}

impl Run {
    fn single(name: &str, scan: ScanResult, failure: Option<CliError>) -> Self {
        let mut run = Run {
            tables: vec![(name.to_string(), scan)],
            summary: BTreeMap::new(),
            failure: None,
        };
        run.fail(failure);
        run
    }

    fn fail(&mut self, failure: Option<CliError>) {
        if let Some(e) = failure {
            self.summary.insert("error".into(), json!(e.to_string()));
            if let CliError::Point { point, .. } = &e {
                self.summary.insert("failed_point".into(), json!(point));
                for (_, t) in &mut self.tables {
                    t.meta("failed_point", point);
                    t.meta("error", &e);
                }
            }
            self.failure = Some(e);
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Run {
    let result = match cfg.scenario {
        Scenario::Spectrum => spectrum(cfg),
        Scenario::G2scan => g2scan(cfg),
        Scenario::Ming2 => ming2(cfg),
        Scenario::Transistor => transistor(cfg),
        Scenario::GateError => gate_error(cfg),
        Scenario::PhononEigen => phonon_eigen(cfg),
        Scenario::CompareEffective => compare_effective(cfg),
        Scenario::Sweep => sweep(cfg),
    };
    result.unwrap_or_else(|e| Run {
        tables: Vec::new(),
        summary: BTreeMap::from([("error".to_string(), json!(e.to_string()))]),
        failure: Some(e),
    })
}

fn col(name: &str, unit: &str) -> String {
    format!("{name} [{unit}]")
}

fn table(axes: &[String], observables: &[String]) -> ScanResult {
    let a: Vec<&str> = axes.iter().map(String::as_str).collect();
    let o: Vec<&str> = observables.iter().map(String::as_str).collect();
    ScanResult::new(&a, &o)
}

fn only_axes(cfg: &ExperimentConfig, allowed: &[&str]) -> std::result::Result<(), CliError> {
    match cfg.axes.iter().find(|a| !allowed.contains(&a.name.as_str())) {
        Some(a) => Err(CliError::Config(format!(
            "grid axis `{}` is not used by `{}` (allowed: {})",
            a.name,
            cfg.scenario.name(),
            allowed.join(", ")
        ))),
        None => Ok(()),
    }
}

fn required_axis<'a>(cfg: &'a ExperimentConfig, name: &str) -> std::result::Result<&'a Axis, CliError> {
    cfg.axis(name)
        .ok_or_else(|| CliError::Config(format!("`{}` needs a `[grid.{name}]` axis", cfg.scenario.name())))
}

/// Cartesian product, first axis outermost.
fn product(axes: &[&Axis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

fn describe(names: &[&str], values: &[f64]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Evaluates every point and appends its rows in point order, stopping at the first failure.
fn fill<P, F>(
    scan: &mut ScanResult,
    exec: Execution,
    points: &[P],
    label: impl Fn(&P) -> String,
    f: F,
) -> Option<CliError>
where
    P: Sync,
    F: Fn(&P) -> Result<Vec<Vec<f64>>> + Sync + Send,
{
    for (p, r) in points.iter().zip(par_map(exec, points, f)) {
        match r {
            Ok(rows) => rows.into_iter().for_each(|row| scan.push(row)),
            Err(source) => {
                return Some(CliError::Point {
                    point: label(p),
                    source,
                })
            }
        }
    }
    None
}

/// Parameter axes of a generic scenario, with their grid points.
struct ParamGrid<'a> {
    axes: Vec<&'a Axis>,
    points: Vec<Vec<f64>>,
}

impl<'a> ParamGrid<'a> {
    fn new(cfg: &'a ExperimentConfig, skip: &[&str]) -> std::result::Result<Self, CliError> {
        let axes: Vec<&Axis> = cfg.axes.iter().filter(|a| !skip.contains(&a.name.as_str())).collect();
        let mut probe = cfg.params.clone();
        for a in &axes {
            set_param(&mut probe, &a.name, a.values[0])?;
        }
        Ok(Self {
            points: product(&axes),
            axes,
        })
    }

    fn names(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.name.as_str()).collect()
    }

    fn columns(&self, cfg: &ExperimentConfig) -> Vec<String> {
        self.axes
            .iter()
            .map(|a| col(&a.name, &unit_label(&a.name, cfg.unit)))
            .collect()
    }

    fn params_at(&self, base: &SystemParams, values: &[f64]) -> SystemParams {
        let mut p = base.clone();
        for (a, &v) in self.axes.iter().zip(values) {
            // Names were validated in `new`.
            set_param(&mut p, &a.name, v).expect("validated axis");
        }
        p
    }

    fn label(&self, values: &[f64]) -> String {
        describe(&self.names(), values)
    }
}

fn weak_drive(given: Option<f64>, kappa: f64) -> f64 {
    given.unwrap_or(DEFAULT_DRIVE * kappa)
}

fn spectrum(cfg: &ExperimentConfig) -> std::result::Result<Run, CliError> {
    only_axes(cfg, &["detuning"])?;
    let grid = required_axis(cfg, "detuning")?.values.clone();
    let n_list = cfg.options.n_m.clone();
    if n_list.is_empty() {
        return Err(CliError::Config("`n_m` list is empty".into()));
    }
    let u = cfg.unit.label();
    let omega = weak_drive(cfg.params.drive_s, cfg.params.kappa);
    let trunc = cfg
        .truncations
        .unwrap_or_else(|| Truncations::new(2, 2, n_list.iter().max().unwrap() + 2));
    let base = SystemParams {
        drive_s: None,
        drive_a: None,
        ..cfg.params.clone()
    };
    let mut scan = table(
        &[col("n_m", "1"), col("detuning", u)],
        &["re_r [1]", "im_r [1]", "abs_r [1]", "phase_r [rad]", "occupation [1]"].map(String::from),
    );
    scan.meta("drive_s", format!("{omega} {u}"));
    scan.meta("truncations", format!("a={} s={} m={}", trunc.a, trunc.s, trunc.m));
    let failure = fill(
        &mut scan,
        cfg.options.execution,
        &n_list,
        |n| format!("n_m = {n}"),
        |&n| {
            let model = build_rwa(&base, trunc)?;
            let pinned = FockState::with(model.space(), &[("m", n)])?;
            let pts = reflection_spectrum(&model, "s", &pinned, &grid, omega)?;
            Ok(pts
                .iter()
                .map(|p| vec![n as f64, p.delta, p.r.re, p.r.im, p.amplitude(), p.phase(), p.occupation])
                .collect())
        },
    );
    Ok(Run::single("spectrum", scan, failure))
}

/// Full-model parameters at `Δ_a` with the pump detuning following it at fixed `J`.
fn full_me_point(base: &SystemParams, delta_a: f64, omega: f64) -> Result<SystemParams> {
    let r = base.resolve()?;
    let j = match r.j {
        Some(j) => j,
        None => r.omega_m()? / 2.0,
    };
    Ok(SystemParams {
        delta_a: Some(delta_a),
        delta_s: Some(delta_a + 2.0 * j),
        drive_a: Some(omega),
        j: None,
        delta: None,
        frame_delta: None,
        omega_l: None,
        omega_c: None,
        ..base.clone()
    })
}

/// Six-state and (optionally) full-model photon statistics at one `Δ_a`:
/// `[⟨n_a⟩/n₀, g²]` followed by `[⟨n_a⟩/n₀, g², residual]` for the full model.
fn g2_point(base: &SystemParams, delta_a: f64, full: Option<Truncations>) -> Result<Vec<f64>> {
    let omega = weak_drive(base.drive_a, base.kappa);
    let n0 = omega * omega / (base.kappa * base.kappa);
    let p = SystemParams {
        delta_a: Some(delta_a),
        drive_a: Some(omega),
        ..base.clone()
    };
    let six = six_state_g2(&p, thermal_levels(p.resolve()?.n_th()))?;
    let mut row = vec![six.mean_na / n0, six.g2_zero];
    if let Some(trunc) = full {
        let model = build_rwa(&full_me_point(base, delta_a, omega)?, trunc)?;
        let ss = steady_state(&model)?;
        let na = expect(&ss.state, &number_op(model.space(), "a")?)?.re;
        row.extend([na / n0, g2_zero(&ss.state, "a")?, ss.residual]);
    }
    Ok(row)
}

fn full_truncations(cfg: &ExperimentConfig) -> Truncations {
    cfg.truncations
        .unwrap_or_else(|| Truncations::defaults_for(cfg.params.n_th.unwrap_or(0.0)))
}

fn g2scan(cfg: &ExperimentConfig) -> std::result::Result<Run, CliError> {
    only_axes(cfg, &["delta_a"])?;
    let grid = required_axis(cfg, "delta_a")?.values.clone();
    let u = cfg.unit.label();
    let full = cfg.options.full_me.then(|| full_truncations(cfg));
    let mut obs = vec!["na_over_n0 [1]".to_string(), "g2 [1]".to_string()];
    if full.is_some() {
        obs.extend(["na_over_n0_full [1]", "g2_full [1]", "residual [1]"].map(String::from));
    }
    let mut scan = table(&[col("delta_a", u)], &obs);
    scan.meta("drive_a", format!("{} {u}", weak_drive(cfg.params.drive_a, cfg.params.kappa)));
    scan.meta("thermal_tail_tol", THERMAL_TAIL_TOL);
    if let Some(t) = full {
        scan.meta("truncations", format!("a={} s={} m={}", t.a, t.s, t.m));
    }
    let failure = fill(
        &mut scan,
        cfg.options.execution,
        &grid,
        |x| format!("delta_a = {x}"),
        |&x| {
            let mut row = vec![x];
            row.extend(g2_point(&cfg.params, x, full)?);
            Ok(vec![row])
        },
    );
    if full.is_some() {
        let worst = scan.column("residual").unwrap_or_default().into_iter().fold(0.0, f64::max);
        scan.meta("max_steady_residual", worst);
    }
    Ok(Run::single("g2scan", scan, failure))
}

fn ming2(cfg: &ExperimentConfig) -> std::result::Result<Run, CliError> {
    only_axes(cfg, &["g0", "n_th"])?;
    let g0s = required_axis(cfg, "g0")?.values.clone();
    let nths = match cfg.axis("n_th") {
        Some(a) => a.values.clone(),
        None => vec![cfg.params.n_th.unwrap_or(0.0)],
    };
    let u = cfg.unit.label();
    let points: Vec<(f64, f64)> = g0s.iter().flat_map(|&g| nths.iter().map(move |&n| (g, n))).collect();
    let mut scan = table(
        &[col("g0", u), col("n_th", "1")],
        &[col("argmin_delta_a", u), col("min_g2", "1")],
    );
    scan.meta("drive_a", format!("{} {u}", weak_drive(cfg.params.drive_a, cfg.params.kappa)));
    scan.meta("thermal_tail_tol", THERMAL_TAIL_TOL);
    let failure = fill(
        &mut scan,
        cfg.options.execution,
        &points,
        |(g, n)| format!("g0 = {g}, n_th = {n}"),
        |&(g0, n_th)| {
            let p = SystemParams {
                g0: Some(g0),
                n_th: Some(n_th),
                gamma_m: None,
                temperature: None,
                ..cfg.params.clone()
            };
            let m = min_g2(&p)?;
            Ok(vec![vec![g0, n_th, m.delta_a, m.g2]])
        },
    );
    Ok(Run::single("ming2", scan, failure))
}

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn transistor(cfg: &ExperimentConfig) -> std::result::Result<Run, CliError> {
    let grid = ParamGrid::new(cfg, &[])?;
    let u = cfg.unit.label();
    let mut scan = table(
        &grid.columns(cfg),
        &[
            col("tau", &format!("1/{u}")),
            col("tau_opt", &format!("1/{u}")),
            col("tau_scaling", &format!("1/{u}")),
            col("gamma_m", u),
            col("epsilon", "1"),
            col("clamped", "1"),
        ],
    );
    let failure = fill(
        &mut scan,
        cfg.options.execution,
        &grid.points,
        |v| grid.label(v),
        |v| {
            let b = transistor_error(&grid.params_at(&cfg.params, v))?;
            let mut row = v.clone();
            row.extend([
                opt(b.tau_p),
                opt(b.tau_opt),
                opt(b.tau_scaling),
                opt(b.gamma_m),
                opt(b.epsilon),
                b.clamped as u8 as f64,
            ]);
            Ok(vec![row])
        },
    );
    Ok(Run::single("transistor", scan, failure))
}

fn gate_error(cfg: &ExperimentConfig) -> std::result::Result<Run, CliError> {
    let grid = ParamGrid::new(cfg, &["delta_s"])?;
    let u = cfg.unit.label();
    let delta_s_grid = cfg.axis("delta_s").map(|a| a.values.clone()).unwrap_or_default();
    let mut scan = table(
        &grid.columns(cfg),
        &[
            col("delta_s_opt", u),
            col("epsilon_g", "1"),
            col("epsilon_g_estimate", "1"),
            col("lambda", u),
            col("gamma_phi", u),
            col("gamma_prime", u),
            col("gamma_decoh", u),
            col("t_g", &format!("1/{u}")),
            col("clamped", "1"),
        ],
    );
    scan.meta("delta_s_candidates", delta_s_grid.len());
    scan.meta("exact", cfg.options.exact);
    let opts = GateOptions {
        delta_s_grid,
        exact: cfg.options.exact,
        dim: cfg.options.gate_dim,
        exec: Execution::Sequential,
    };
    let failure = fill(
        &mut scan,
        cfg.options.execution,
        &grid.points,
        |v| grid.label(v),
        |v| {
            let b = phase_gate_error(&grid.params_at(&cfg.params, v), &opts)?;
            let mut row = v.clone();
            row.extend([
                opt(b.delta_s),
                opt(b.epsilon_g),
                opt(b.epsilon_g_estimate),
                opt(b.lambda),
                opt(b.gamma_phi),
                opt(b.gamma_prime),
                opt(b.gamma_decoh),
                opt(b.t_g),
                b.clamped as u8 as f64,
            ]);
            Ok(vec![row])
        },
    );
    Ok(Run::single("gate-error", scan, failure))
}

/// Per-level rows `[n, Re shift/Λ₀, |Im|/Λ₀, predicted Re shift/Λ₀, predicted |Im|/Λ₀, overlap, Λ₀]`.
fn eigen_rows(p: &SystemParams, trunc: Truncations, levels: usize, corrected: bool) -> Result<Vec<Vec<f64>>> {
    let p = p.resolve()?;
    let lambda0 = phonon_nonlinearity(&p, false)?
        .lambda0
        .ok_or(Error::VanishingDenominator(0.0))?;
    let f = hybridize(&p)?;
    let h = build_nonhermitian(&p, trunc)?;
    let b = hybrid_b_mode(&p, h.space())?;
    let eigs = nonhermitian_eigs(&h, &b, levels + 1)?;
    (1..=levels)
        .map(|n| {
            let e = eigs
                .iter()
                .find(|e| e.n == n)
                .ok_or_else(|| Error::EigenSolver(format!("no eigenvalue assigned to n = {n}")))?;
            let pred = eigenvalue_prediction_with(&p, n, corrected)?;
            let free = n as f64 * f.tilde_omega_m[0];
            Ok(vec![
                n as f64,
                (e.lambda.re - free) / lambda0,
                e.lambda.im.abs() / lambda0,
                (pred.re - free) / lambda0,
                pred.im.abs() / lambda0,
                e.overlap,
                lambda0,
            ])
        })
        .collect()
}

fn eigen_truncations(cfg: &ExperimentConfig) -> Truncations {
    cfg.truncations
        .unwrap_or_else(|| Truncations::new(4, 4, (cfg.options.levels + 5).max(8)))
}

fn phonon_eigen_table(cfg: &ExperimentConfig) -> std::result::Result<(ScanResult, Option<CliError>), CliError> {
    let grid = ParamGrid::new(cfg, &[])?;
    let trunc = eigen_truncations(cfg);
    let mut axes = grid.columns(cfg);
    axes.push(col("n", "1"));
    let mut scan = table(
        &axes,
        &[
            "re_shift_over_lambda0 [1]",
            "abs_im_over_lambda0 [1]",
            "pred_re_shift_over_lambda0 [1]",
            "pred_abs_im_over_lambda0 [1]",
            "overlap [1]",
        ]
        .map(String::from)
        .into_iter()
        .chain([col("lambda0", cfg.unit.label())])
        .collect::<Vec<_>>(),
    );
    scan.meta("truncations", format!("a={} s={} m={}", trunc.a, trunc.s, trunc.m));
    scan.meta("corrected_prediction", cfg.options.corrected);
    let failure = fill(
        &mut scan,
        cfg.options.execution,
        &grid.points,
        |v| grid.label(v),
        |v| {
            let p = grid.params_at(&cfg.params, v);
            Ok(eigen_rows(&p, trunc, cfg.options.levels, cfg.options.corrected)?
                .into_iter()
                .map(|r| v.iter().copied().chain(r).collect())
                .collect())
        },
    );
    Ok((scan, failure))
}

fn phonon_eigen(cfg: &ExperimentConfig) -> std::result::Result<Run, CliError> {
    let (scan, failure) = phonon_eigen_table(cfg)?;
    Ok(Run::single("phonon-eigen", scan, failure))
}

/// Copies the axes and the selected columns (renamed) of `src` into a new table.
fn select(src: &ScanResult, picks: &[(&str, &str)]) -> ScanResult {
    let na = src.axes.len();
    let idx: Vec<usize> = picks
        .iter()
        .map(|(from, _)| src.columns.iter().position(|c| c.split(" [").next() == Some(*from)).unwrap())
        .collect();
    let names: Vec<String> = picks.iter().map(|(_, to)| to.to_string()).collect();
    let mut out = table(&src.axes, &names);
    out.metadata = src.metadata.clone();
    for row in &src.rows {
        let mut r = row[..na].to_vec();
        r.extend(idx.iter().map(|&k| row[k]));
        out.push(r);
    }
    out
}

fn compare_effective(cfg: &ExperimentConfig) -> std::result::Result<Run, CliError> {
    let (source, failure, picks_a, picks_n, observables, default_tol): (
        ScanResult,
        Option<CliError>,
        Vec<(&str, &str)>,
        Vec<(&str, &str)>,
        Vec<&str>,
        f64,
    ) = match cfg.options.kind {
        CompareKind::PhononEigen => {
            let (scan, failure) = phonon_eigen_table(cfg)?;
            (
                scan,
                failure,
                vec![
                    ("pred_re_shift_over_lambda0", "re_shift_over_lambda0 [1]"),
                    ("pred_abs_im_over_lambda0", "abs_im_over_lambda0 [1]"),
                ],
                vec![
                    ("re_shift_over_lambda0", "re_shift_over_lambda0 [1]"),
                    ("abs_im_over_lambda0", "abs_im_over_lambda0 [1]"),
                ],
                vec!["re_shift_over_lambda0", "abs_im_over_lambda0"],
                0.15,
            )
        }
        CompareKind::G2 => {
            let mut full_cfg = cfg.clone();
            full_cfg.options.full_me = true;
            full_cfg.scenario = Scenario::G2scan;
            let mut run = g2scan(&full_cfg)?;
            let (_, scan) = run.tables.remove(0);
            (
                scan,
                run.failure,
                vec![("na_over_n0", "na_over_n0 [1]"), ("g2", "g2 [1]")],
                vec![("na_over_n0_full", "na_over_n0 [1]"), ("g2_full", "g2 [1]")],
                vec!["g2"],
                0.10,
            )
        }
    };
    let tolerance = cfg.options.tolerance.unwrap_or(default_tol);
    let analytic = select(&source, &picks_a);
    let numeric = select(&source, &picks_n);
    let mut cols = Vec::new();
    for o in &observables {
        cols.extend([format!("{o}_analytic [1]"), format!("{o}_numeric [1]"), format!("{o}_rel_dev [1]")]);
    }
    let mut comparison = table(&analytic.axes, &cols);
    comparison.metadata = source.metadata.clone();
    comparison.meta("tolerance", tolerance);
    let mut summary = BTreeMap::new();
    let mut worst = 0.0f64;
    let mut per_obs = Vec::new();
    for o in &observables {
        let c = compare(&analytic, &numeric, o)?;
        worst = worst.max(c.max_rel);
        summary.insert(format!("{o}_max_rel"), json!(c.max_rel));
        summary.insert(format!("{o}_median_rel"), json!(c.median_rel));
        comparison.meta(&format!("{o}_max_rel"), c.max_rel);
        comparison.meta(&format!("{o}_median_rel"), c.median_rel);
        per_obs.push((analytic.column(o)?, numeric.column(o)?, c.per_point));
    }
    let na = analytic.axes.len();
    for (k, row) in analytic.rows.iter().enumerate() {
        let mut r = row[..na].to_vec();
        for (a, n, d) in &per_obs {
            r.extend([a[k], n[k], d[k]]);
        }
        comparison.push(r);
    }
    summary.insert("max_rel".into(), json!(worst));
    summary.insert("tolerance".into(), json!(tolerance));
    let mut run = Run {
        tables: vec![
            ("analytic".into(), analytic),
            ("numeric".into(), numeric),
            ("comparison".into(), comparison),
        ],
        summary,
        failure: None,
    };
    run.fail(failure);
    if run.failure.is_none() && worst > tolerance {
        run.failure = Some(CliError::Tolerance { max_rel: worst, tolerance });
    }
    Ok(run)
}

fn observable_value(o: Observable, p: &SystemParams, cfg: &ExperimentConfig) -> Result<f64> {
    let p = p.resolve()?;
    Ok(match o {
        Observable::G2 => six_state_g2(&p, thermal_levels(p.n_th()))?.g2_zero,
        Observable::G2Full => {
            let model = build_rwa(&p, full_truncations(cfg))?;
            g2_zero(&steady_state(&model)?.state, "a")?
        }
        Observable::MinG2 => min_g2(&p)?.g2,
        Observable::TransistorEpsilon => opt(transistor_error(&p)?.epsilon),
        Observable::GateEpsilon => opt(
            phase_gate_error(
                &p,
                &GateOptions {
                    exact: cfg.options.exact,
                    dim: cfg.options.gate_dim,
                    exec: Execution::Sequential,
                    ..Default::default()
                },
            )?
            .epsilon_g,
        ),
        Observable::Lambda => opt(phonon_nonlinearity(&p, cfg.options.corrected)?.lambda),
        Observable::GammaPhi => opt(phonon_nonlinearity(&p, cfg.options.corrected)?.gamma_phi),
        Observable::GammaPrime => opt(phonon_nonlinearity(&p, cfg.options.corrected)?.gamma_prime),
    })
}

fn observable_column(o: Observable, unit: &str) -> String {
    let (name, u) = match o {
        Observable::G2 => ("g2", "1"),
        Observable::G2Full => ("g2_full", "1"),
        Observable::MinG2 => ("min_g2", "1"),
        Observable::TransistorEpsilon => ("transistor_epsilon", "1"),
        Observable::GateEpsilon => ("gate_epsilon", "1"),
        Observable::Lambda => ("lambda", unit),
        Observable::GammaPhi => ("gamma_phi", unit),
        Observable::GammaPrime => ("gamma_prime", unit),
    };
    col(name, u)
}

fn sweep(cfg: &ExperimentConfig) -> std::result::Result<Run, CliError> {
    if cfg.axes.is_empty() {
        return Err(CliError::Config("`sweep` needs at least one `[grid.<param>]` axis".into()));
    }
    let o = cfg
        .options
        .observable
        .ok_or_else(|| CliError::Config("`sweep` needs `options.observable`".into()))?;
    let grid = ParamGrid::new(cfg, &[])?;
    let mut scan = table(&grid.columns(cfg), &[observable_column(o, cfg.unit.label())]);
    let failure = fill(
        &mut scan,
        cfg.options.execution,
        &grid.points,
        |v| grid.label(v),
        |v| {
            let mut row = v.clone();
            row.push(observable_value(o, &grid.params_at(&cfg.params, v), cfg)?);
            Ok(vec![row])
        },
    );
    Ok(Run::single("sweep", scan, failure))
}
