//! Closed-form predictions: six-state photon statistics, transistor error
//! budget, induced phonon nonlinearity and phase-gate error.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::hilbert::{thermal_dim, thermal_weights, DensityMatrix, FockState, THERMAL_TAIL_TOL};
use crate::models::{build_effective_phonon, hybridize, EffectiveOptions, SystemParams, ELIMINATION_LIMIT};
use crate::parallel::{par_map, Execution};
use crate::scan::ScanResult;
use crate::C64;

/// Default weak-drive amplitude for g² and reflection scans, in units of κ.
pub const DEFAULT_DRIVE: f64 = 0.01;
/// Smallest admissible pole magnitude in the six-state amplitudes.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SixStateResult {
    pub p10n: Vec<f64>,
    pub p20n: Vec<f64>,
    pub zeta_n: Vec<f64>,
    pub mean_na: f64,
    pub g2_zero: f64,
    pub d: C64,
    pub x_n: Vec<C64>,
}

/// Weak-drive photon statistics of the `c_a` mode at resonance (`δ = 0`),
/// averaged over a thermal mechanical state truncated at `n_max` levels.
///
/// With `d = Δ_a - iκ` and `X_n = 4d² - g₀²(n+1)`:
/// `p₁ = |4Ω_a d/X_n|²`, `p₂ = 8|Ω_a²(8d² - g₀²)/(X_n(2X_n - g₀²))|²`.
/// These follow from the amplitude equations for the drive `Ω_a(c_a + c_a†)`;
/// at `g₀ = 0` they reduce to `p₁ = Ω_a²/|d|²` and `p₂ = p₁²/2`.
pub fn six_state_g2(params: &SystemParams, n_max: usize) -> Result<SixStateResult> {
    let g0 = params.g0()?;
    let omega = params.drive_a.unwrap_or(DEFAULT_DRIVE * params.kappa);
    let d = C64::new(params.delta_a()?, -params.kappa);
    let zeta = thermal_weights(params.n_th(), n_max.max(1));
    let g2s = g0 * g0;
    let mut p10 = Vec::with_capacity(zeta.len());
    let mut p20 = Vec::with_capacity(zeta.len());
    let mut xs = Vec::with_capacity(zeta.len());
    for n in 0..zeta.len() {
        let x = 4.0 * d * d - g2s * (n + 1) as f64;
        let y = 2.0 * x - g2s;
        if x.norm() < POLE_TOL || y.norm() < POLE_TOL {
            return Err(Error::VanishingDenominator(x.norm().min(y.norm())));
        }
        p10.push((4.0 * omega * d / x).norm_sqr());
        p20.push(8.0 * (omega * omega * (8.0 * d * d - g2s) / (x * y)).norm_sqr());
        xs.push(x);
    }
    let mean_na: f64 = zeta.iter().zip(&p10).map(|(z, p)| z * p).sum();
    let two: f64 = zeta.iter().zip(&p20).map(|(z, p)| z * p).sum();
    Ok(SixStateResult {
        p10n: p10,
        p20n: p20,
        zeta_n: zeta,
        mean_na,
        g2_zero: 2.0 * two / (mean_na * mean_na),
        d,
        x_n: xs,
    })
}

/// Levels needed so the neglected thermal weight stays below 1e-6.
pub fn thermal_levels(n_th: f64) -> usize {
    thermal_dim(n_th, THERMAL_TAIL_TOL)
}

pub fn six_state_g2_at(params: &SystemParams, delta_a: f64) -> Result<f64> {
    let p = SystemParams {
        delta_a: Some(delta_a),
        ..params.clone()
    };
    Ok(six_state_g2(&p, thermal_levels(p.n_th()))?.g2_zero)
}

/// Minimum of g²(Δ_a) for fixed `g₀`, `N_th`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct G2Minimum {
    pub delta_a: f64,
    pub g2: f64,
}

/// Grid search over `|Δ_a| ≤ max(g₀, 4κ)` with spacing `≤ κ/40`, followed by
/// golden-section refinement. Ties go to smaller `|Δ_a|`.
pub fn min_g2(params: &SystemParams) -> Result<G2Minimum> {
    let kappa = params.kappa;
    let span = params.g0()?.abs().max(4.0 * kappa);
    let step = kappa / 40.0;
    let half = (span / step).ceil() as i64;
    let mut best: Option<G2Minimum> = None;
    for i in -half..=half {
        let x = i as f64 * step;
        let g2 = six_state_g2_at(params, x)?;
        let better = match best {
            None => true,
            Some(b) => g2 < b.g2 * (1.0 - 1e-12) || (g2 <= b.g2 * (1.0 + 1e-12) && x.abs() < b.delta_a.abs()),
        };
        if better {
            best = Some(G2Minimum { delta_a: x, g2 });
        }
    }
    let b = best.expect("non-empty grid");
    let (mut lo, mut hi) = (b.delta_a - step, b.delta_a + step);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = six_state_g2_at(params, x1)?;
    let mut f2 = six_state_g2_at(params, x2)?;
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = six_state_g2_at(params, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = six_state_g2_at(params, x2)?;
        }
    }
    let (x, f) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    Ok(if f < b.g2 { G2Minimum { delta_a: x, g2: f } } else { b })
}

/// Minimal g² over Δ_a for every `(g₀, N_th)` pair, rows ordered by `g₀` then `N_th`.
pub fn min_g2_scan(
    params: &SystemParams,
    g0_grid: &[f64],
    nth_list: &[f64],
    exec: Execution,
) -> Result<ScanResult> {
    if g0_grid.is_empty() || nth_list.is_empty() {
        return Err(Error::InvalidGrid("empty g0 or N_th list".into()));
    }
    let points: Vec<(f64, f64)> = g0_grid
        .iter()
        .flat_map(|&g| nth_list.iter().map(move |&n| (g, n)))
        .collect();
    let results = par_map(exec, &points, |&(g0, n_th)| {
        let p = SystemParams {
            g0: Some(g0),
            n_th: Some(n_th),
            gamma_m: None,
            ..params.clone()
        };
        min_g2(&p)
    });
    let mut scan = ScanResult::new(
        &["g0 [kappa]", "n_th [1]"],
        &["argmin_delta_a [kappa]", "min_g2 [1]"],
    );
    for (&(g0, n), r) in points.iter().zip(results) {
        let r = r?;
        scan.push(vec![g0, n, r.delta_a, r.g2]);
    }
    scan.meta("drive_a [kappa]", params.drive_a.unwrap_or(DEFAULT_DRIVE * params.kappa));
    scan.meta("thermal_tail_tol", THERMAL_TAIL_TOL);
    Ok(scan)
}

/// Error budget of the transistor and the phonon phase gate. Fields that do
/// not apply to a given computation are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GateBudget {
    pub epsilon: Option<f64>,
    pub tau_p: Option<f64>,
    /// Exact minimizer of ε(τ), `(2/(κ²Γ_m))^{1/3}`.
    pub tau_opt: Option<f64>,
    /// Order-of-magnitude optimum `(κ²Γ_m)^{-1/3}`.
    pub tau_scaling: Option<f64>,
    pub gamma_m: Option<f64>,
    /// Exact phase-gate error when computed, otherwise the estimate.
    pub epsilon_g: Option<f64>,
    pub epsilon_g_estimate: Option<f64>,
    pub lambda: Option<f64>,
    pub gamma_phi: Option<f64>,
    pub gamma_prime: Option<f64>,
    pub lambda0: Option<f64>,
    pub t_g: Option<f64>,
    pub gamma_decoh: Option<f64>,
    pub delta_s: Option<f64>,
    pub delta_b: Option<f64>,
    pub g_tilde: Option<f64>,
    pub lambda_n: Vec<f64>,
    pub gamma_phi_n: Vec<f64>,
    /// Set when a perturbative error estimate left `[0, 1]` and was clamped.
    pub clamped: bool,
}

fn clamp_unit(x: f64, flag: &mut bool) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        *flag = true;
    }
    x.clamp(0.0, 1.0)
}

/// `ε(τ) = 4κ²/g₀² + 1/(τκ)² + τΓ_m`.
pub fn transistor_epsilon(g0: f64, kappa: f64, gamma_m: f64, tau: f64) -> f64 {
    4.0 * kappa * kappa / (g0 * g0) + 1.0 / (tau * kappa).powi(2) + tau * gamma_m
}

/// Exact minimizer of [`transistor_epsilon`], `(2/(κ²Γ_m))^{1/3}`.
pub fn transistor_tau_exact(kappa: f64, gamma_m: f64) -> f64 {
    (2.0 / (kappa * kappa * gamma_m)).cbrt()
}

/// Evaluates the transistor error at `τ_p` if given, otherwise at the exact optimum.
pub fn transistor_error(params: &SystemParams) -> Result<GateBudget> {
    let p = params.resolve()?;
    let g0 = p.g0()?;
    let kappa = p.kappa;
    let gm = p.gamma_m();
    if !(g0 > 0.0 && gm > 0.0) {
        return Err(Error::InconsistentParameters("transistor error needs g₀, Γ_m > 0".into()));
    }
    let tau_opt = transistor_tau_exact(kappa, gm);
    let tau = p.tau_p.unwrap_or(tau_opt);
    let mut clamped = false;
    let eps = clamp_unit(transistor_epsilon(g0, kappa, gm, tau), &mut clamped);
    Ok(GateBudget {
        epsilon: Some(eps),
        tau_p: Some(tau),
        tau_opt: Some(tau_opt),
        tau_scaling: Some((kappa * kappa * gm).cbrt().recip()),
        gamma_m: Some(gm),
        clamped,
        ..Default::default()
    })
}

/// Number of Fock levels for which per-level corrections are tabulated.
pub const CORRECTION_LEVELS: usize = 8;

/// `(Λ(n), Γ_φ(n))` from `S(ω = -nΔ_B) = g̃²/(-i(Δ_s - nΔ_B) + κ)` with the exact
/// mixing angle. Two-resonator frames have no `Δ_B` and give n-independent values.
pub fn corrected_rates(params: &SystemParams, n: usize) -> Result<(f64, f64)> {
    let c = corrected_parts(params)?;
    let s = c.g_tilde.powi(2) / C64::new(params.kappa, -(c.delta_s - n as f64 * c.delta_b));
    Ok((s.im, s.re))
}

struct CorrectedParts {
    g_tilde: f64,
    delta_b: f64,
    delta_s: f64,
    gamma_prime: f64,
}

fn corrected_parts(params: &SystemParams) -> Result<CorrectedParts> {
    let p = params.resolve()?;
    let g0 = p.g0()?;
    let ds = p.delta_s()?;
    let f = hybridize(&p)?;
    if let Some(big) = f.big_theta {
        return Ok(CorrectedParts {
            g_tilde: g0 * (2.0 * big).sin() / 8f64.sqrt(),
            delta_b: 0.0,
            delta_s: ds,
            gamma_prime: f.gamma_prime,
        });
    }
    let denom = f.tilde_delta_a + f.tilde_omega_m[0] - ds;
    if denom == 0.0 {
        return Err(Error::VanishingDenominator(denom));
    }
    Ok(CorrectedParts {
        g_tilde: g0 * (2.0 * f.theta).sin() / 4.0,
        delta_b: g0 * g0 * f.theta.cos().powi(4) / (4.0 * denom),
        delta_s: ds,
        gamma_prime: f.gamma_prime,
    })
}

/// Induced phonon Kerr term `Λ`, dephasing `Γ_φ` and optical leakage `γ'`.
///
/// Uncorrected: `Λ = g₀⁴|α|²Δ_s/(16δ²(Δ_s²+κ²))`, `Γ_φ = κΛ/Δ_s`,
/// `γ' = κ|α|²g₀²/(2δ²)` with the frame detuning `δ`.
pub fn phonon_nonlinearity(params: &SystemParams, corrected: bool) -> Result<GateBudget> {
    let p = params.resolve()?;
    let g0 = p.g0()?;
    let alpha = p.alpha()?;
    let ds = p.delta_s()?;
    let delta = p.frame_delta()?;
    let kappa = p.kappa;
    if delta == 0.0 {
        return Err(Error::Resonant);
    }
    let lambda0 = if ds != 0.0 {
        Some(g0.powi(4) / (16.0 * ds.abs() * delta * delta))
    } else {
        None
    };
    let mut out = GateBudget {
        lambda0,
        delta_s: Some(ds),
        gamma_m: Some(p.gamma_m()),
        ..Default::default()
    };
    if !corrected {
        let pref = g0.powi(4) * alpha * alpha / (16.0 * delta * delta * (ds * ds + kappa * kappa));
        let lambda = pref * ds;
        let gamma_phi = pref * kappa;
        out.lambda = Some(lambda);
        out.gamma_phi = Some(gamma_phi);
        out.gamma_prime = Some(kappa * alpha * alpha * g0 * g0 / (2.0 * delta * delta));
        out.g_tilde = Some(g0 * g0 * alpha / (4.0 * delta.abs()));
        out.lambda_n = vec![lambda; CORRECTION_LEVELS];
        out.gamma_phi_n = vec![gamma_phi; CORRECTION_LEVELS];
        return Ok(out);
    }
    let c = corrected_parts(&p)?;
    let rates: Vec<(f64, f64)> = (0..CORRECTION_LEVELS)
        .map(|n| corrected_rates(&p, n))
        .collect::<Result<_>>()?;
    out.lambda = Some(rates[0].0);
    out.gamma_phi = Some(rates[0].1);
    out.gamma_prime = Some(c.gamma_prime);
    out.g_tilde = Some(c.g_tilde);
    out.delta_b = Some(c.delta_b);
    out.lambda_n = rates.iter().map(|r| r.0).collect();
    out.gamma_phi_n = rates.iter().map(|r| r.1).collect();
    Ok(out)
}

/// Predicted eigenvalue of the `n`-phonon branch of the non-Hermitian generator:
/// `Re λ_n = nω̃_m + n²Λ(n)`,
/// `|Im λ_n| = (γ/2)N_th + n((γ/2)(2N_th+1) + γ'/2) + n²Γ_φ(n)`, returned with `Im λ_n ≤ 0`.
pub fn eigenvalue_prediction(params: &SystemParams, n: usize) -> Result<C64> {
    eigenvalue_prediction_with(params, n, true)
}

pub fn eigenvalue_prediction_with(params: &SystemParams, n: usize, corrected: bool) -> Result<C64> {
    let p = params.resolve()?;
    let f = hybridize(&p)?;
    let budget = phonon_nonlinearity(&p, corrected)?;
    let (lambda_n, gamma_n) = if corrected {
        corrected_rates(&p, n)?
    } else {
        (budget.lambda.unwrap(), budget.gamma_phi.unwrap())
    };
    let nf = n as f64;
    let (g, nth) = (p.gamma(), p.n_th());
    let re = nf * f.tilde_omega_m[0] + nf * nf * lambda_n;
    let im = g / 2.0 * nth
        + nf * (g / 2.0 * (2.0 * nth + 1.0) + budget.gamma_prime.unwrap() / 2.0)
        + nf * nf * gamma_n;
    Ok(C64::new(re, -im))
}

/// Options for [`phase_gate_error`].
#[derive(Clone, Debug)]
pub struct GateOptions {
    /// Candidate `Δ_s` values; empty means the single `Δ_s` of the parameters.
    pub delta_s_grid: Vec<f64>,
    /// Evolve the effective two-resonator master equation for the error.
    pub exact: bool,
    /// Fock truncation per phonon mode for the exact evolution.
    pub dim: usize,
    pub exec: Execution,
}

impl Default for GateOptions {
    fn default() -> Self {
        Self {
            delta_s_grid: Vec::new(),
            exact: false,
            dim: 4,
            exec: Execution::default(),
        }
    }
}

/// Two-resonator parameter set with symmetric detuning `ω_m^{1,2} = -Δ_a ∓ δ`
/// at the requested `Δ_s`. The absolute `ω_m` only shifts conserved quantities,
/// so 0 is used when it is absent.
fn gate_params(params: &SystemParams, delta_s: f64) -> Result<SystemParams> {
    let delta = params.frame_delta()?;
    let w1 = params.omega_m.unwrap_or(0.0);
    Ok(SystemParams {
        omega_m: Some(w1),
        omega_m2: Some(w1 + 2.0 * delta),
        delta_s: Some(delta_s),
        delta_a: Some(-delta - w1),
        frame_delta: Some(delta),
        j: None,
        delta: None,
        omega_c: None,
        omega_l: None,
        ..params.clone()
    })
}

fn gate_at(params: &SystemParams, delta_s: f64, opts: &GateOptions) -> Result<GateBudget> {
    let p = gate_params(params, delta_s)?.resolve()?;
    let ratio = p.elimination_ratio()?;
    if ratio > ELIMINATION_LIMIT {
        return Err(Error::EliminationInvalid(format!("ratio {ratio:.3} at Δ_s = {delta_s}")));
    }
    let mut b = phonon_nonlinearity(&p, false)?;
    let lambda = b.lambda.unwrap();
    if lambda == 0.0 {
        return Err(Error::NoGate);
    }
    let gm = p.gamma_m();
    let t_g = PI / (2.0 * lambda.abs());
    let decoh = 2.0 * gm + b.gamma_phi.unwrap() + b.gamma_prime.unwrap() / 2.0;
    let mut clamped = false;
    let estimate = clamp_unit(1.0 - (-decoh * t_g).exp(), &mut clamped);
    b.t_g = Some(t_g);
    b.gamma_decoh = Some(decoh);
    b.gamma_m = Some(gm);
    b.epsilon_g_estimate = Some(estimate);
    b.epsilon_g = Some(estimate);
    if opts.exact {
        b.epsilon_g = Some(clamp_unit(exact_gate_error(&p, t_g, opts.dim)?, &mut clamped));
    }
    b.clamped = clamped;
    Ok(b)
}

/// `1 - ⟨ψ_t|ρ(t_g)|ψ_t⟩` with `ψ_t` the coherently evolved `½(|0⟩+|1⟩)^{⊗2}`,
/// evolved in the frame co-rotating with the hybridized phonon modes.
fn exact_gate_error(p: &SystemParams, t_g: f64, dim: usize) -> Result<f64> {
    let model = build_effective_phonon(
        p,
        dim,
        EffectiveOptions {
            corrected: false,
            co_rotating: true,
        },
    )?;
    let space = model.space().clone();
    let mut psi0 = vec![C64::new(0.0, 0.0); space.total_dim()];
    for n1 in 0..2 {
        for n2 in 0..2 {
            psi0[FockState::new(&space, vec![n1, n2])?.index()] = C64::new(0.5, 0.0);
        }
    }
    // The Hamiltonian is diagonal in the Fock basis.
    let h = model.hamiltonian().matrix();
    let target: Vec<C64> = psi0
        .iter()
        .enumerate()
        .map(|(i, z)| z * C64::new(0.0, -h.get(i, i).re * t_g).exp())
        .collect();
    let rho0 = DensityMatrix::pure(&space, &psi0)?;
    let rho = evolve(&model, &rho0, &[t_g])?;
    Ok(1.0 - rho[0].fidelity_with_pure(&target))
}

/// Phase-gate error at the `Δ_s` minimizing it over the grid. Grid points
/// without a gate or outside the elimination regime are skipped.
pub fn phase_gate_error(params: &SystemParams, opts: &GateOptions) -> Result<GateBudget> {
    let p = params.resolve()?;
    let grid = if opts.delta_s_grid.is_empty() {
        vec![p.delta_s()?]
    } else {
        opts.delta_s_grid.clone()
    };
    let results = par_map(opts.exec, &grid, |&ds| gate_at(&p, ds, opts));
    let mut best: Option<GateBudget> = None;
    for r in results {
        let r = match r {
            Err(Error::NoGate | Error::EliminationInvalid(_)) if grid.len() > 1 => continue,
            other => other?,
        };
        if best
            .as_ref()
            .is_none_or(|b| r.epsilon_g.unwrap() < b.epsilon_g.unwrap())
        {
            best = Some(r);
        }
    }
    best.ok_or(Error::NoGate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(g0: f64) -> SystemParams {
        SystemParams {
            g0: Some(g0),
            delta_a: Some(0.7),
            ..Default::default()
        }
    }

    #[test]
    fn no_coupling_gives_poissonian_statistics() {
        for da in [-3.0, 0.0, 0.4, 5.0] {
            let r = six_state_g2(&SystemParams { delta_a: Some(da), ..base(0.0) }, 1).unwrap();
            assert!((r.g2_zero - 1.0).abs() < 1e-12);
            let oracle = DEFAULT_DRIVE.powi(2) / (da * da + 1.0);
            assert!((r.mean_na - oracle).abs() < 1e-15);
        }
    }

    #[test]
    fn drive_amplitude_cancels() {
        let a = six_state_g2(&SystemParams { drive_a: Some(1e-3), ..base(8.0) }, 1).unwrap();
        let b = six_state_g2(&SystemParams { drive_a: Some(3e-2), ..base(8.0) }, 1).unwrap();
        assert!(((a.g2_zero - b.g2_zero) / a.g2_zero).abs() < 1e-13);
    }

    #[test]
    fn thermal_weights_sum_to_one() {
        let r = six_state_g2(&SystemParams { n_th: Some(1.0), ..base(8.0) }, thermal_levels(1.0)).unwrap();
        assert!((r.zeta_n.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        assert!(r.p10n.iter().chain(&r.p20n).all(|&p| p >= 0.0));
    }

    #[test]
    fn transistor_limits() {
        let (g0, kappa) = (10.0, 1.0);
        // Γ_m → 0, τ → ∞
        let eps = transistor_epsilon(g0, kappa, 0.0, 1e9);
        assert!((eps - 0.04).abs() < 1e-12);
        let gm = 4e-3;
        let tau = transistor_tau_exact(kappa, gm);
        let e0 = transistor_epsilon(g0, kappa, gm, tau);
        for k in -200..=200 {
            let t = tau * 10f64.powf(k as f64 / 100.0);
            assert!(transistor_epsilon(g0, kappa, gm, t) >= e0);
        }
    }

    #[test]
    fn zero_field_has_no_nonlinearity() {
        let p = SystemParams {
            g0: Some(1.0),
            alpha: Some(0.0),
            delta_s: Some(-1.0),
            frame_delta: Some(5.0),
            omega_m: Some(10.0),
            ..Default::default()
        };
        for corrected in [false, true] {
            let b = phonon_nonlinearity(&p, corrected).unwrap();
            assert_eq!(b.lambda.unwrap(), 0.0);
            assert_eq!(b.gamma_phi.unwrap(), 0.0);
            assert_eq!(b.gamma_prime.unwrap(), 0.0);
        }
    }

    #[test]
    fn ratio_of_coherent_and_dissipative_parts() {
        let p = SystemParams {
            g0: Some(1.0),
            alpha: Some(0.8),
            delta_s: Some(-1.3),
            frame_delta: Some(5.0),
            omega_m: Some(10.0),
            kappa: 0.025,
            ..Default::default()
        };
        let b = phonon_nonlinearity(&p, false).unwrap();
        assert!((b.lambda.unwrap() / b.gamma_phi.unwrap() - (-1.3 / 0.025)).abs() < 1e-10);
    }

    #[test]
    fn corrections_vanish_for_weak_mixing() {
        // |G/δ| = 1e-3 with g₀ ≪ δ: Δ_B → 0 and exact angles approach small-angle values.
        let p = SystemParams {
            g0: Some(0.02),
            alpha: Some(1.0),
            delta_s: Some(-1.0),
            frame_delta: Some(10.0),
            omega_m: Some(40.0),
            kappa: 0.1,
            ..Default::default()
        };
        let plain = phonon_nonlinearity(&p, false).unwrap();
        let corr = phonon_nonlinearity(&p, true).unwrap();
        for n in 0..4 {
            let rel = (corr.lambda_n[n] - plain.lambda.unwrap()) / plain.lambda.unwrap();
            assert!(rel.abs() < 1e-4, "n = {n}: {rel}");
            let rel = (corr.gamma_phi_n[n] - plain.gamma_phi.unwrap()) / plain.gamma_phi.unwrap();
            assert!(rel.abs() < 1e-4);
        }
    }

    #[test]
    fn ground_branch_prediction() {
        let p = SystemParams {
            g0: Some(1.0),
            alpha: Some(1.0),
            delta_s: Some(-1.0),
            frame_delta: Some(5.0),
            omega_m: Some(10.0),
            kappa: 0.025,
            gamma: Some(2.5e-4),
            n_th: Some(1.0),
            ..Default::default()
        };
        let l0 = eigenvalue_prediction(&p, 0).unwrap();
        assert_eq!(l0.re, 0.0);
        assert!((l0.im + 2.5e-4 / 2.0).abs() < 1e-18);
        let lossless = SystemParams {
            kappa: 1e-300,
            gamma: Some(0.0),
            ..p
        };
        assert!(eigenvalue_prediction(&lossless, 2).unwrap().im.abs() < 1e-200);
    }

    #[test]
    fn gate_without_decoherence_is_perfect() {
        let p = SystemParams {
            g0: Some(50.0),
            alpha: Some(1.0),
            frame_delta: Some(150.0),
            delta_s: Some(-25.0),
            kappa: 1e-9,
            gamma: Some(0.0),
            ..Default::default()
        };
        let b = phase_gate_error(
            &p,
            &GateOptions {
                exact: true,
                exec: Execution::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(b.epsilon_g.unwrap() < 1e-7);
        assert!(b.epsilon_g_estimate.unwrap() < 1e-7);
    }
}
