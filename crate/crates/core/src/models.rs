//! Parameter record and Hamiltonian/master-equation builders.
//!
//! Mode labels: `a`, `s` for the antisymmetric and symmetric optical modes,
//! `m` (or `m1`, `m2`) for mechanical modes, `c1`, `c2` for the local cavity
//! modes of the lab-frame model and `B`, `B1`, `B2` for hybridized phonon modes
//! of the effective models. Frequencies are in units of κ unless the field name
//! says otherwise; the rotating frame is that of the control laser.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::analytics;
use crate::dynamics::LindbladModel;
use crate::error::{Error, Result};
use crate::hilbert::{annihilator, number_op, thermal_dim, Mode, ModeSpace, Operator, THERMAL_TAIL_TOL};
use crate::sparse::SparseMatrix;
use crate::C64;

const HBAR: f64 = 1.054_571_817e-34;
const K_B: f64 = 1.380_649e-23;
/// Relative tolerance for consistency checks between redundant parameters.
pub const CONSISTENCY_TOL: f64 = 1e-9;
/// Largest `g₀²|α|/(4|δ|) / |Δ_s + iκ|` accepted by the effective builders.
pub const ELIMINATION_LIMIT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub kappa: f64,
    pub g0: Option<f64>,
    pub omega_m: Option<f64>,
    /// Second resonator frequency; its presence selects the two-resonator models.
    pub omega_m2: Option<f64>,
    pub omega_c: Option<f64>,
    pub omega_l: Option<f64>,
    pub j: Option<f64>,
    pub gamma: Option<f64>,
    pub q: Option<f64>,
    pub n_th: Option<f64>,
    /// Bath temperature in kelvin; needs `kappa_si` to fix the energy scale.
    pub temperature: Option<f64>,
    /// Mechanical qubit decoherence rate `Γ_m`; fixes `N_th` when `γ` is known.
    pub gamma_m: Option<f64>,
    pub drive_s: Option<f64>,
    pub drive_a: Option<f64>,
    pub drive_1: Option<f64>,
    pub drive_2: Option<f64>,
    pub delta_s: Option<f64>,
    pub delta_a: Option<f64>,
    /// `2J - ω_m`.
    pub delta: Option<f64>,
    /// `-(Δ_a + ω_m)`, the detuning entering the hybridized frame.
    pub frame_delta: Option<f64>,
    pub alpha: Option<f64>,
    pub tau_p: Option<f64>,
    /// Angular frequency in rad/s of one internal rate unit (κ unless κ ≠ 1);
    /// used only for temperature conversion and reporting.
    pub kappa_si: Option<f64>,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            g0: None,
            omega_m: None,
            omega_m2: None,
            omega_c: None,
            omega_l: None,
            j: None,
            gamma: None,
            q: None,
            n_th: None,
            temperature: None,
            gamma_m: None,
            drive_s: None,
            drive_a: None,
            drive_1: None,
            drive_2: None,
            delta_s: None,
            delta_a: None,
            delta: None,
            frame_delta: None,
            alpha: None,
            tau_p: None,
            kappa_si: None,
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CONSISTENCY_TOL * a.abs().max(b.abs()).max(1e-300)
}

fn fill(slot: &mut Option<f64>, value: f64, what: &str) -> Result<()> {
    match *slot {
        Some(v) if !close(v, value) => Err(Error::InconsistentParameters(format!(
            "{what}: given {v}, implied {value}"
        ))),
        Some(_) => Ok(()),
        None => {
            *slot = Some(value);
            Ok(())
        }
    }
}

fn req(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or(Error::MissingParameter(name))
}

impl SystemParams {
    /// Checks the redundant relations and fills every derivable field.
    pub fn resolve(&self) -> Result<Self> {
        let mut p = self.clone();
        if !(p.kappa > 0.0) || !p.kappa.is_finite() {
            return Err(Error::InconsistentParameters("κ must be positive".into()));
        }
        let fields = [
            p.g0, p.omega_m, p.omega_m2, p.omega_c, p.omega_l, p.j, p.gamma, p.q, p.n_th,
            p.temperature, p.gamma_m, p.drive_s, p.drive_a, p.drive_1, p.drive_2, p.delta_s,
            p.delta_a, p.delta, p.frame_delta, p.alpha, p.tau_p, p.kappa_si,
        ];
        if fields.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InconsistentParameters("non-finite parameter".into()));
        }
        for (v, name) in [
            (p.gamma, "γ"),
            (p.n_th, "N_th"),
            (p.gamma_m, "Γ_m"),
            (p.q, "Q"),
            (p.temperature, "T"),
            (p.tau_p, "τ_p"),
        ] {
            if v.is_some_and(|x| x < 0.0) {
                return Err(Error::InconsistentParameters(format!("{name} must be non-negative")));
            }
        }

        if let (Some(w), Some(q)) = (p.omega_m, p.q) {
            fill(&mut p.gamma, w / q, "γ = ω_m/Q")?;
        }
        if let (Some(t), Some(w), Some(ks)) = (p.temperature, p.omega_m, p.kappa_si) {
            let n = if t == 0.0 {
                0.0
            } else {
                1.0 / ((HBAR * w * ks / (K_B * t)).exp() - 1.0)
            };
            fill(&mut p.n_th, n, "N_th from T")?;
        }
        if let (Some(gm), Some(g)) = (p.gamma_m, p.gamma) {
            if g > 0.0 {
                let n = (2.0 * gm / g - 0.5) / 3.0;
                if n < -CONSISTENCY_TOL {
                    return Err(Error::InconsistentParameters(format!(
                        "Γ_m = {gm} is below the zero-temperature value γ/4"
                    )));
                }
                fill(&mut p.n_th, n.max(0.0), "N_th from Γ_m")?;
            }
        }
        if let (Some(g), Some(n)) = (p.gamma, p.n_th) {
            fill(&mut p.gamma_m, g / 2.0 * (3.0 * n + 0.5), "Γ_m")?;
        }

        if let (Some(o1), Some(o2)) = (p.drive_1, p.drive_2) {
            fill(&mut p.drive_s, (o1 + o2) / SQRT_2, "Ω_s")?;
            fill(&mut p.drive_a, (o1 - o2) / SQRT_2, "Ω_a")?;
        }

        if let (Some(wl), Some(wc), Some(j)) = (p.omega_l, p.omega_c, p.j) {
            fill(&mut p.delta_s, wl - wc + j, "Δ_s")?;
            fill(&mut p.delta_a, wl - wc - j, "Δ_a")?;
        }
        if let (Some(fd), Some(w)) = (p.frame_delta, p.omega_m) {
            fill(&mut p.delta_a, -fd - w, "Δ_a from frame detuning")?;
        }
        if let (Some(ds), Some(da)) = (p.delta_s, p.delta_a) {
            fill(&mut p.j, (ds - da) / 2.0, "J = (Δ_s - Δ_a)/2")?;
        }
        if let (Some(j), Some(ds)) = (p.j, p.delta_s) {
            fill(&mut p.delta_a, ds - 2.0 * j, "Δ_a")?;
        }
        if let (Some(j), Some(da)) = (p.j, p.delta_a) {
            fill(&mut p.delta_s, da + 2.0 * j, "Δ_s")?;
        }
        if let (Some(da), Some(w)) = (p.delta_a, p.omega_m) {
            fill(&mut p.frame_delta, -(da + w), "frame detuning")?;
        }
        if let (Some(j), Some(w)) = (p.j, p.omega_m) {
            fill(&mut p.delta, 2.0 * j - w, "δ = 2J - ω_m")?;
        }
        if let (Some(d), Some(w)) = (p.delta, p.omega_m) {
            fill(&mut p.j, (d + w) / 2.0, "J from δ")?;
        }
        if let (Some(ds), Some(j)) = (p.delta_s, p.j) {
            if let Some(w) = p.omega_m {
                fill(&mut p.delta_a, ds - 2.0 * j, "Δ_a")?;
                fill(&mut p.frame_delta, 2.0 * j - w - ds, "frame detuning")?;
            }
        }
        if let (Some(w1), Some(w2), Some(da)) = (p.omega_m, p.omega_m2, p.delta_a) {
            if !close(w1 + w2, -2.0 * da) {
                return Err(Error::InconsistentParameters(
                    "two-resonator models need symmetric detuning ω_m^{1,2} = -Δ_a ∓ δ".into(),
                ));
            }
        }
        if let (Some(ds), Some(o)) = (p.delta_s, p.drive_s) {
            if p.alpha.is_none() {
                p.alpha = Some(steady_alpha(o, ds, p.kappa).norm());
            }
        }
        Ok(p)
    }

    pub fn two_resonators(&self) -> bool {
        self.omega_m2.is_some()
    }

    pub fn g0(&self) -> Result<f64> {
        req(self.g0, "g0")
    }

    pub fn omega_m(&self) -> Result<f64> {
        req(self.omega_m, "omega_m")
    }

    pub fn delta_s(&self) -> Result<f64> {
        req(self.delta_s, "delta_s")
    }

    pub fn delta_a(&self) -> Result<f64> {
        req(self.delta_a, "delta_a")
    }

    pub fn j(&self) -> Result<f64> {
        req(self.j, "J")
    }

    pub fn frame_delta(&self) -> Result<f64> {
        if let Some(fd) = self.frame_delta {
            return Ok(fd);
        }
        Ok(-(self.delta_a()? + self.omega_m()?))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(0.0)
    }

    pub fn n_th(&self) -> f64 {
        self.n_th.unwrap_or(0.0)
    }

    /// `Γ_m = (γ/2)(3N_th + 1/2)`.
    pub fn gamma_m(&self) -> f64 {
        self.gamma_m
            .unwrap_or_else(|| self.gamma() / 2.0 * (3.0 * self.n_th() + 0.5))
    }

    /// `|α|`, given directly or from the steady response to `Ω_s`.
    pub fn alpha(&self) -> Result<f64> {
        if let Some(a) = self.alpha {
            return Ok(a.abs());
        }
        let o = req(self.drive_s, "alpha")?;
        Ok(steady_alpha(o, self.delta_s()?, self.kappa).norm())
    }

    /// `ξ_i = g₀/(2J - ω_m^i)`.
    pub fn xi(&self) -> Result<Vec<f64>> {
        let g0 = self.g0()?;
        let j = self.j()?;
        let mut out = vec![g0 / (2.0 * j - self.omega_m()?)];
        if let Some(w2) = self.omega_m2 {
            out.push(g0 / (2.0 * j - w2));
        }
        Ok(out)
    }

    /// Laser detuning from the bare cavity, `ω_L - ω_c = Δ_s - J`.
    pub fn delta_c(&self) -> Result<f64> {
        Ok(self.delta_s()? - self.j()?)
    }

    /// `g₀²|α|/(4|δ|)` relative to `|Δ_s + iκ|`.
    pub fn elimination_ratio(&self) -> Result<f64> {
        let g0 = self.g0()?;
        let fd = self.frame_delta()?;
        let ds = self.delta_s()?;
        Ok(g0 * g0 * self.alpha()? / (4.0 * fd.abs()) / ds.hypot(self.kappa))
    }
}

/// Fixed point of `α̇ = (iΔ_s - κ)α + Ω_s`.
pub fn steady_alpha(drive_s: f64, delta_s: f64, kappa: f64) -> C64 {
    C64::new(drive_s, 0.0) / C64::new(kappa, -delta_s)
}

/// Fock truncations. For the lab-frame model `a` sizes `c1` and `s` sizes `c2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncations {
    pub a: usize,
    pub s: usize,
    pub m: usize,
}

impl Truncations {
    pub fn new(a: usize, s: usize, m: usize) -> Self {
        Self { a, s, m }
    }

    /// Optical dims 4, mechanical `max(6, ⌈6 N_th⌉)` raised until the thermal tail is below 1e-6.
    pub fn defaults_for(n_th: f64) -> Self {
        let m = 6usize
            .max((6.0 * n_th).ceil() as usize)
            .max(thermal_dim(n_th, THERMAL_TAIL_TOL));
        Self { a: 4, s: 4, m }
    }
}

impl Default for Truncations {
    fn default() -> Self {
        Self::defaults_for(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HybridFrame {
    /// `|G| = g₀|α|/2`.
    pub g: f64,
    /// Frame detuning `-(Δ_a + ω_m)`.
    pub delta: f64,
    pub theta: f64,
    pub big_theta: Option<f64>,
    pub tilde_delta_a: f64,
    /// Shifted mechanical frequencies (one per resonator).
    pub tilde_omega_m: Vec<f64>,
    pub gamma_prime: f64,
}

/// Mixing angle with `tan 2θ = -2|G|/δ`, `|θ| < π/4`.
pub fn mixing_angle(g: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::Resonant);
    }
    Ok(0.5 * (-2.0 * g.abs() / delta).atan())
}

pub fn hybridize(params: &SystemParams) -> Result<HybridFrame> {
    let p = params.resolve()?;
    let g = p.g0()? * p.alpha()? / 2.0;
    let delta = p.frame_delta()?;
    if delta == 0.0 {
        return Err(Error::Resonant);
    }
    let w = p.omega_m()?;
    let root = (delta * delta + 4.0 * g * g).sqrt();
    let theta = mixing_angle(g, delta)?;
    if !p.two_resonators() {
        let s = delta.signum();
        return Ok(HybridFrame {
            g,
            delta,
            theta,
            big_theta: None,
            tilde_delta_a: -w - (delta + s * root) / 2.0,
            tilde_omega_m: vec![w + (delta - s * root) / 2.0],
            gamma_prime: 2.0 * p.kappa * theta.sin().powi(2),
        });
    }
    let big = 0.5 * (-SQRT_2 * g.abs() / delta).atan();
    let (da, w1, w2) = (p.delta_a()?, w, p.omega_m2.unwrap());
    // Single-excitation block of H_lin in the basis (c_a, b1, b2).
    let h = Mat::from_fn(3, 3, |i, j| {
        let v = match (i, j) {
            (0, 0) => -da,
            (1, 1) => w1,
            (2, 2) => w2,
            (0, 1) | (1, 0) => g,
            (0, 2) | (2, 0) => -g,
            _ => 0.0,
        };
        C64::new(v, 0.0)
    });
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
    let u = eig.U();
    let vals: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    let dominant = |row: usize| {
        (0..3)
            .max_by(|&x, &y| u[(row, x)].norm().total_cmp(&u[(row, y)].norm()))
            .unwrap()
    };
    Ok(HybridFrame {
        g,
        delta,
        theta,
        big_theta: Some(big),
        tilde_delta_a: -vals[dominant(0)],
        tilde_omega_m: vec![vals[dominant(1)], vals[dominant(2)]],
        gamma_prime: p.kappa * (2.0 * big).sin().powi(2),
    })
}

/// Mode operators of a built space.
struct Modes {
    space: Arc<ModeSpace>,
}

impl Modes {
    fn new(modes: Vec<Mode>) -> Result<Self> {
        Ok(Self {
            space: ModeSpace::new(modes)?,
        })
    }

    fn a(&self, label: &str) -> Operator {
        annihilator(&self.space, label).expect("mode exists")
    }

    fn n(&self, label: &str) -> Operator {
        number_op(&self.space, label).expect("mode exists")
    }
}

fn thermal_collapses(b: &Operator, gamma: f64, n_th: f64) -> Vec<(Operator, f64)> {
    vec![
        (b.clone(), gamma / 2.0 * (n_th + 1.0)),
        (b.dag(), gamma / 2.0 * n_th),
    ]
}

fn sum(ops: &[Operator]) -> Operator {
    let mut it = ops.iter();
    let first = it.next().expect("at least one term").clone();
    it.fold(first, |acc, o| &acc + o)
}

/// Lab-frame two-cavity model in the laser frame:
/// `Σ ω_m^i b_i†b_i - Δ_c Σ c_i†c_i + g₀ c_i†c_i(b_i + b_i†) - J(c₁†c₂ + h.c.) + Ω_i(c_i + c_i†)`.
pub fn build_full(params: &SystemParams, trunc: Truncations) -> Result<LindbladModel> {
    let p = params.resolve()?;
    let g0 = p.g0()?;
    let j = p.j()?;
    let dc = p.delta_c()?;
    let w1 = p.omega_m()?;
    let mut modes = vec![
        Mode::optical("c1", trunc.a),
        Mode::optical("c2", trunc.s),
        Mode::mechanical("m1", trunc.m),
    ];
    if p.two_resonators() {
        modes.push(Mode::mechanical("m2", trunc.m));
    }
    let m = Modes::new(modes)?;
    let (c1, c2) = (m.a("c1"), m.a("c2"));
    let (n1, n2) = (m.n("c1"), m.n("c2"));
    let (d1, d2) = match (p.drive_1, p.drive_2) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            let os = p.drive_s.unwrap_or(0.0);
            let oa = p.drive_a.unwrap_or(0.0);
            ((os + oa) / SQRT_2, (os - oa) / SQRT_2)
        }
    };
    let mut terms = vec![
        (&n1 + &n2).scale(-dc),
        (&c1.dag() * &c2).plus_hc().scale(-j),
        c1.plus_hc().scale(d1),
        c2.plus_hc().scale(d2),
    ];
    let mut resonators = vec![("m1", "c1", w1)];
    if let Some(w2) = p.omega_m2 {
        resonators.push(("m2", "c2", w2));
    }
    let mut collapses = vec![(c1, p.kappa), (c2, p.kappa)];
    for (bl, cl, w) in resonators {
        let b = m.a(bl);
        terms.push(m.n(bl).scale(w));
        terms.push((&m.n(cl) * &b.plus_hc()).scale(g0));
        collapses.extend(thermal_collapses(&b, p.gamma(), p.n_th()));
    }
    LindbladModel::new(sum(&terms).into_hermitian()?, collapses)
}

fn optical_mech_modes(trunc: Truncations, two: bool) -> Result<Modes> {
    let mut modes = vec![Mode::optical("a", trunc.a), Mode::optical("s", trunc.s)];
    if two {
        modes.push(Mode::mechanical("m1", trunc.m));
        modes.push(Mode::mechanical("m2", trunc.m));
    } else {
        modes.push(Mode::mechanical("m", trunc.m));
    }
    Modes::new(modes)
}

/// `H_g = (g₀/2)(c_a c_s† b_a† + h.c.)` with `b_a = b` (single) or `b₁ - b₂` (two resonators, unnormalized).
fn nonlinear_coupling(m: &Modes, g0: f64, two: bool) -> Operator {
    let b = if two { &m.a("m1") - &m.a("m2") } else { m.a("m") };
    (&(&m.a("a") * &m.a("s").dag()) * &b.dag()).plus_hc().scale(g0 / 2.0)
}

fn mechanical_free(m: &Modes, p: &SystemParams, two: bool) -> Result<Operator> {
    if two {
        Ok(&m.n("m1").scale(p.omega_m()?) + &m.n("m2").scale(p.omega_m2.unwrap()))
    } else {
        Ok(m.n("m").scale(p.omega_m()?))
    }
}

fn optical_mech_collapses(m: &Modes, p: &SystemParams, two: bool) -> Vec<(Operator, f64)> {
    let mut c = vec![(m.a("a"), p.kappa), (m.a("s"), p.kappa)];
    let labels: &[&str] = if two { &["m1", "m2"] } else { &["m"] };
    for l in labels {
        c.extend(thermal_collapses(&m.a(l), p.gamma(), p.n_th()));
    }
    c
}

/// Two-mode model after the rotating-wave approximation:
/// `-Δ_s c_s†c_s - Δ_a c_a†c_a + ω_m b†b + (g₀/2)(c_a c_s† b† + h.c.) + Σ Ω_η(c_η + c_η†)`.
pub fn build_rwa(params: &SystemParams, trunc: Truncations) -> Result<LindbladModel> {
    let p = params.resolve()?;
    let two = p.two_resonators();
    let m = optical_mech_modes(trunc, two)?;
    let h = sum(&[
        m.n("s").scale(-p.delta_s()?),
        m.n("a").scale(-p.delta_a()?),
        mechanical_free(&m, &p, two)?,
        nonlinear_coupling(&m, p.g0()?, two),
        m.a("s").plus_hc().scale(p.drive_s.unwrap_or(0.0)),
        m.a("a").plus_hc().scale(p.drive_a.unwrap_or(0.0)),
    ]);
    LindbladModel::new(h.into_hermitian()?, optical_mech_collapses(&m, &p, two))
}

/// True when `Δ_s - Δ_a - ω_m` vanishes (resonant photon-phonon exchange).
pub fn is_resonant(params: &SystemParams) -> Result<bool> {
    let p = params.resolve()?;
    let d = p.delta_s()? - p.delta_a()? - p.omega_m()?;
    Ok(d.abs() <= CONSISTENCY_TOL * p.omega_m()?.abs().max(1.0))
}

fn linear_part(m: &Modes, p: &SystemParams, two: bool) -> Result<Operator> {
    let g = p.g0()? * p.alpha()? / 2.0;
    let ca = m.a("a");
    let exchange = if two {
        &(&ca.dag() * &m.a("m1")).plus_hc() - &(&ca.dag() * &m.a("m2")).plus_hc()
    } else {
        (&ca.dag() * &m.a("m")).plus_hc()
    };
    Ok(sum(&[
        m.n("s").scale(-p.delta_s()?),
        m.n("a").scale(-p.delta_a()?),
        mechanical_free(m, p, two)?,
        exchange.scale(g),
    ]))
}

/// Model in the frame displaced by the classical field `α` of the `c_s` mode.
/// The phase of `α` is absorbed into both optical modes so `G = g₀|α|/2` is real.
pub fn build_displaced(params: &SystemParams, trunc: Truncations) -> Result<LindbladModel> {
    let p = params.resolve()?;
    let two = p.two_resonators();
    let m = optical_mech_modes(trunc, two)?;
    let h = &linear_part(&m, &p, two)? + &nonlinear_coupling(&m, p.g0()?, two);
    LindbladModel::new(h.into_hermitian()?, optical_mech_collapses(&m, &p, two))
}

/// `H̃ = H_lin + H_g - iκ(c_s†c_s + c_a†c_a) - i(γ/2)(N_th+1)b†b - i(γ/2)N_th(b†b + 1)`.
pub fn build_nonhermitian(params: &SystemParams, trunc: Truncations) -> Result<Operator> {
    let p = params.resolve()?;
    let two = p.two_resonators();
    let m = optical_mech_modes(trunc, two)?;
    let herm = &linear_part(&m, &p, two)? + &nonlinear_coupling(&m, p.g0()?, two);
    let (g, n) = (p.gamma(), p.n_th());
    let labels: &[&str] = if two { &["m1", "m2"] } else { &["m"] };
    let mut anti = (&m.n("s") + &m.n("a")).scale(p.kappa);
    for l in labels {
        let nb = m.n(l);
        anti = &anti + &nb.scale(g / 2.0 * (2.0 * n + 1.0));
        anti = &anti + &Operator::identity(&m.space).scale(g / 2.0 * n);
    }
    Operator::new(
        m.space.clone(),
        herm.matrix() - &anti.matrix().scale(C64::new(0.0, 1.0)),
        false,
    )
}

/// The hybridized phonon mode `B` as an operator on the displaced-model space.
pub fn hybrid_b_mode(params: &SystemParams, space: &Arc<ModeSpace>) -> Result<Operator> {
    let f = hybridize(params)?;
    let ca = annihilator(space, "a")?;
    let b = annihilator(space, "m")?;
    Ok(&b.scale(f.theta.cos()) + &ca.scale(f.theta.sin()))
}

/// Pieces of `H_g` in the hybridized basis.
#[derive(Clone, Debug)]
pub struct HybridDecomposition {
    pub h_g1: Operator,
    pub h_g2: Operator,
    pub h_gprime: Operator,
}

pub fn build_hybrid_decomposition(params: &SystemParams, trunc: Truncations) -> Result<HybridDecomposition> {
    let p = params.resolve()?;
    let two = p.two_resonators();
    let f = hybridize(&p)?;
    let g0 = p.g0()?;
    let m = optical_mech_modes(trunc, two)?;
    let (ca, cs) = (m.a("a"), m.a("s"));
    let xs = cs.plus_hc();
    if !two {
        let (c, s) = (f.theta.cos(), f.theta.sin());
        let b = m.a("m");
        let big_b = &b.scale(c) + &ca.scale(s);
        let big_c = &ca.scale(c) - &b.scale(s);
        let nb = &big_b.dag() * &big_b;
        let nc = &big_c.dag() * &big_c;
        let s2 = (2.0 * f.theta).sin();
        let h_g1 = (&xs * &nb).scale(g0 / 4.0 * s2).into_hermitian()?;
        let h_g2 = (&(&big_b * &cs.dag()) * &big_c.dag())
            .plus_hc()
            .scale(-g0 / 2.0 * s * s);
        let h_gprime = &(&(&big_c * &cs.dag()) * &big_b.dag()).plus_hc().scale(g0 / 2.0 * c * c)
            - &(&xs * &nc).scale(g0 / 4.0 * s2).into_hermitian()?;
        return Ok(HybridDecomposition { h_g1, h_g2, h_gprime });
    }
    let th = f.big_theta.expect("two-resonator frame");
    let (c, s) = (th.cos(), th.sin());
    let (s2, c2) = ((2.0 * th).sin(), (2.0 * th).cos());
    let (b1, b2) = (m.a("m1"), m.a("m2"));
    let big_b1 = sum(&[b1.scale(c * c), ca.scale(s2 / SQRT_2), b2.scale(-s * s)]);
    let big_b2 = sum(&[b2.scale(c * c), ca.scale(s2 / SQRT_2), b1.scale(-s * s)]);
    let big_c = &ca.scale(c2) - &(&big_b1 + &big_b2).scale(s2 / SQRT_2);
    let h_g1 = (&xs * &(&(&big_b1.dag() * &big_b1) - &(&big_b2.dag() * &big_b2)))
        .scale(g0 / 8f64.sqrt() * s2)
        .into_hermitian()?;
    let h_gprime = (&(&big_c * &cs.dag()) * &(&big_b1.dag() - &big_b2.dag()))
        .plus_hc()
        .scale(g0 / 2.0 * c2);
    // Remainder; contains the off-resonant B₁-B₂ exchange left after the split.
    let h_g = nonlinear_coupling(&m, g0, true);
    let h_g2 = &(&h_g - &h_g1) - &h_gprime;
    Ok(HybridDecomposition {
        h_g1,
        h_g2: h_g2.into_hermitian()?,
        h_gprime: h_gprime.into_hermitian()?,
    })
}

/// Options for [`build_effective_phonon`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EffectiveOptions {
    /// Per-Fock `Λ(n)`, `Γ_φ(n)` and exact-angle rates.
    pub corrected: bool,
    /// Drop the free `ω̃ B†B` terms (frame co-rotating with the hybridized modes).
    pub co_rotating: bool,
}

/// Phonon-only master equation after eliminating the optical modes.
///
/// Single resonator: `H = ω̃ B†B + Λ(B†B)²`; two resonators:
/// `H = Σ ω̃_i B_i†B_i + Λ(B₁†B₁ - B₂†B₂)²`. Dissipators: `Γ_φ 𝒟[N]` with `N`
/// the number (difference) operator, `(γ'/2) 𝒟[B_i]` and the thermal bath.
/// The corrected variant uses `Σ_n n²Λ(n)|n⟩⟨n|` and the dephasing operator
/// `Σ_n n√Γ_φ(n)|n⟩⟨n|`, which coincides with `√Γ_φ B†B` for constant rates.
pub fn build_effective_phonon(
    params: &SystemParams,
    dim: usize,
    opts: EffectiveOptions,
) -> Result<LindbladModel> {
    let p = params.resolve()?;
    let ratio = p.elimination_ratio()?;
    if ratio > ELIMINATION_LIMIT {
        return Err(Error::EliminationInvalid(format!(
            "g₀²|α|/(4δ) is {ratio:.3} of |Δ_s + iκ|"
        )));
    }
    let f = hybridize(&p)?;
    let splitting = (f.delta * f.delta + 4.0 * f.g * f.g).sqrt();
    if p.kappa >= splitting {
        return Err(Error::EliminationInvalid(format!(
            "κ = {} is not small against the B-C splitting {splitting}",
            p.kappa
        )));
    }
    let rates = analytics::phonon_nonlinearity(&p, opts.corrected)?;
    let lambda = rates.lambda.unwrap_or(0.0);
    let gamma_phi = rates.gamma_phi.unwrap_or(0.0);
    let gamma_prime = rates.gamma_prime.unwrap_or(0.0);
    let (g, n_th) = (p.gamma(), p.n_th());

    if !p.two_resonators() {
        let m = Modes::new(vec![Mode::mechanical("B", dim)])?;
        let b = m.a("B");
        let nb = m.n("B");
        let (h_nl, deph) = if opts.corrected {
            let per_n: Vec<(f64, f64)> = (0..dim)
                .map(|n| analytics::corrected_rates(&p, n))
                .collect::<Result<_>>()?;
            let h = SparseMatrix::diagonal(
                &per_n
                    .iter()
                    .enumerate()
                    .map(|(n, (l, _))| C64::new((n * n) as f64 * l, 0.0))
                    .collect::<Vec<_>>(),
            );
            let d = SparseMatrix::diagonal(
                &per_n
                    .iter()
                    .enumerate()
                    .map(|(n, (_, gp))| C64::new(n as f64 * gp.max(0.0).sqrt(), 0.0))
                    .collect::<Vec<_>>(),
            );
            (
                Operator::new(m.space.clone(), h, true)?,
                (Operator::new(m.space.clone(), d, true)?, 1.0),
            )
        } else {
            ((&nb * &nb).scale(lambda), (nb.clone(), gamma_phi))
        };
        let mut h = h_nl;
        if !opts.co_rotating {
            h = &h + &nb.scale(f.tilde_omega_m[0]);
        }
        let mut collapses = vec![deph, (b.clone(), gamma_prime / 2.0)];
        collapses.extend(thermal_collapses(&b, g, n_th));
        return LindbladModel::new(h.into_hermitian()?, collapses);
    }

    let m = Modes::new(vec![Mode::mechanical("B1", dim), Mode::mechanical("B2", dim)])?;
    let diff = &m.n("B1") - &m.n("B2");
    let mut h = (&diff * &diff).scale(lambda);
    if !opts.co_rotating {
        h = &h + &m.n("B1").scale(f.tilde_omega_m[0]);
        h = &h + &m.n("B2").scale(f.tilde_omega_m[1]);
    }
    let mut collapses = vec![(diff.clone(), gamma_phi)];
    for l in ["B1", "B2"] {
        let b = m.a(l);
        collapses.push((b.clone(), gamma_prime / 2.0));
        collapses.extend(thermal_collapses(&b, g, n_th));
    }
    LindbladModel::new(h.into_hermitian()?, collapses)
}
