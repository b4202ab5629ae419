//! Lindblad engine.
//!
//! Density matrices are vectorized by column stacking, `vec(ρ)[i + j d] = ρ_ij`,
//! so `vec(A X B) = (Bᵀ ⊗ A) vec(X)` with the left Kronecker factor outermost.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{annihilator, DensityMatrix, FockState, ModeKind, ModeSpace, Operator};
use crate::sparse::SparseMatrix;
use crate::C64;

pub use crate::hilbert::expect;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Relative threshold on the smallest singular value of the bordered Liouvillian.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Largest admissible steady-state residual `‖ℒρ‖∞`.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;
/// Largest change of the trace allowed in a single integrator step.
pub const STEP_TRACE_TOL: f64 = 1e-10;
/// Intracavity occupation beyond which the linear-response amplitude is rejected.
pub const LINEAR_RESPONSE_BOUND: f64 = 0.1;

/// `ρ̇ = -i[H, ρ] + Σ_k r_k (2 c_k ρ c_k† - {c_k† c_k, ρ})`.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    space: Arc<ModeSpace>,
    hamiltonian: Operator,
    collapses: Vec<(Operator, f64)>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator, collapses: Vec<(Operator, f64)>) -> Result<Self> {
        let space = hamiltonian.space().clone();
        for (c, rate) in &collapses {
            if c.space() != &space {
                return Err(Error::SpaceMismatch);
            }
            if !(*rate >= 0.0) || !rate.is_finite() {
                return Err(Error::NegativeRate(*rate));
            }
        }
        if hamiltonian.hermiticity_defect() > crate::hilbert::HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                deviation: hamiltonian.hermiticity_defect(),
            });
        }
        let collapses = collapses.into_iter().filter(|(_, r)| *r > 0.0).collect();
        Ok(Self {
            space,
            hamiltonian,
            collapses,
        })
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn collapses(&self) -> &[(Operator, f64)] {
        &self.collapses
    }

    /// Same dissipators with an extra Hamiltonian term.
    pub fn with_added_hamiltonian(&self, extra: &Operator) -> Result<Self> {
        Self::new(&self.hamiltonian + extra, self.collapses.clone())
    }

    /// `H - i Σ r_k c_k† c_k`, the no-jump generator.
    pub fn effective_hamiltonian(&self) -> SparseMatrix {
        let mut m = self.hamiltonian.matrix().clone();
        for (c, rate) in &self.collapses {
            let cdc = c.matrix().adjoint().matmul(c.matrix());
            m = &m - &cdc.scale(C64::new(0.0, *rate));
        }
        m
    }
}

/// Sparse superoperator of the model acting on column-stacked density matrices.
pub fn liouvillian(model: &LindbladModel) -> SparseMatrix {
    let d = model.space.total_dim();
    let id = SparseMatrix::identity(d);
    let h = model.hamiltonian.matrix();
    let mut l = (&id.kron(h) - &h.transpose().kron(&id)).scale(C64::new(0.0, -1.0));
    for (c, rate) in &model.collapses {
        let c = c.matrix();
        let cdc = c.adjoint().matmul(c);
        let jump = c.conj().kron(c).scale(C64::new(2.0 * rate, 0.0));
        let anti = &id.kron(&cdc) + &cdc.transpose().kron(&id);
        l = &l + &(&jump - &anti.scale(C64::new(*rate, 0.0)));
    }
    l
}

/// Indices of the diagonal entries `ρ_ii` within `vec(ρ)`.
fn diagonal_indices(d: usize) -> impl Iterator<Item = usize> {
    (0..d).map(move |i| i + i * d)
}

/// Largest magnitude of `tr(ℒ X)` over basis matrices `X`; zero for a trace-preserving generator.
pub fn trace_defect(l: &SparseMatrix, d: usize) -> f64 {
    let mut t = vec![ZERO; d * d];
    for k in diagonal_indices(d) {
        t[k] = ONE;
    }
    l.vecmat(&t).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyStateMethod {
    NullSpace,
    LongTime,
}

#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    pub state: DensityMatrix,
    /// `max |ℒ vec(ρ)|`.
    pub residual: f64,
    /// Smallest singular value of the bordered system, estimated by inverse iteration.
    pub sigma_min: f64,
    pub method: SteadyStateMethod,
}

fn lu_of(m: &SparseMatrix) -> Result<Lu<usize, C64>> {
    m.to_faer_csc()
        .sp_lu()
        .map_err(|e| Error::SolverFailure(format!("sparse LU: {e:?}")))
}

fn solve_with(lu: &Lu<usize, C64>, rhs: &[C64], adjoint: bool) -> Vec<C64> {
    let mut x = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    if adjoint {
        lu.solve_adjoint_in_place(x.as_mut());
    } else {
        lu.solve_in_place(x.as_mut());
    }
    (0..rhs.len()).map(|i| x[(i, 0)]).collect()
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Inverse iteration on `AᴴA` through an existing LU of `A`.
fn sigma_min_estimate(lu: &Lu<usize, C64>, n: usize) -> f64 {
    // Deterministic start vector with no special alignment to the basis.
    let mut x: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0, 0.0))
        .collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|z| *z /= nx);
    let mut growth = 0.0;
    for _ in 0..12 {
        let y = solve_with(lu, &x, true);
        let z = solve_with(lu, &y, false);
        let nz = norm2(&z);
        if !nz.is_finite() || nz == 0.0 {
            return 0.0;
        }
        growth = nz;
        x = z.into_iter().map(|v| v / nz).collect();
    }
    1.0 / growth.sqrt()
}

/// Unique steady state from the Liouvillian with its first diagonal row
/// replaced by the trace constraint (that row is linearly dependent on the
/// others because `ℒ` preserves the trace).
pub fn steady_state(model: &LindbladModel) -> Result<SteadyStateReport> {
    let d = model.space.total_dim();
    let n = d * d;
    let l = liouvillian(model);
    let scale = l.max_abs().max(1.0);

    let mut trace_row = vec![ZERO; n];
    for k in diagonal_indices(d) {
        trace_row[k] = ONE;
    }
    let bordered = l.with_row_replaced(0, &trace_row);
    let lu = match lu_of(&bordered) {
        Ok(lu) => lu,
        Err(_) => return Err(Error::DegenerateSteadyState { sigma_min: 0.0 }),
    };

    let mut rhs = vec![ZERO; n];
    rhs[0] = ONE;
    let mut x = solve_with(&lu, &rhs, false);
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DegenerateSteadyState { sigma_min: 0.0 });
    }
    for _ in 0..2 {
        let ax = bordered.matvec(&x);
        let r: Vec<C64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = solve_with(&lu, &r, false);
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
    }

    let sigma_min = sigma_min_estimate(&lu, n);
    if !(sigma_min > DEGENERACY_TOL * scale) {
        return Err(Error::DegenerateSteadyState { sigma_min });
    }

    let rho = hermitize(d, &x);
    let state = DensityMatrix::new(&model.space, rho)?;
    let residual = max_norm(&l.matvec(&state.to_vec()));
    if residual > STEADY_RESIDUAL_TOL * scale {
        return Err(Error::SolverFailure(format!(
            "steady-state residual {residual:e} above tolerance"
        )));
    }
    Ok(SteadyStateReport {
        state,
        residual,
        sigma_min,
        method: SteadyStateMethod::NullSpace,
    })
}

/// `(X + X†)/2` normalized to unit trace.
fn hermitize(d: usize, v: &[C64]) -> Mat<C64> {
    let tr: C64 = diagonal_indices(d).map(|k| v[k]).sum();
    Mat::from_fn(d, d, |i, j| {
        (v[i + j * d] + v[j + i * d].conj()) * 0.5 / tr.re
    })
}

/// Integrator settings for [`evolve`].
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            h_min: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    evolve_with(model, rho0, t_grid, EvolveOptions::default())
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = ZERO;
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Adaptive Dormand-Prince integration of `vec(ρ)` with output at `t_grid`
/// (non-decreasing, starting at or after 0).
pub fn evolve_with(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    if rho0.space() != &model.space {
        return Err(Error::SpaceMismatch);
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidGrid("time grid must be non-decreasing and start at t ≥ 0".into()));
    }
    let d = model.space.total_dim();
    let n = d * d;
    let l = liouvillian(model);
    let diag: Vec<usize> = diagonal_indices(d).collect();
    let trace = |v: &[C64]| -> C64 { diag.iter().map(|&k| v[k]).sum() };

    let mut y = rho0.to_vec();
    let mut t = 0.0;
    let mut h = (0.01 / l.max_abs().max(1e-12)).max(opts.h_min * 10.0);
    let mut out = Vec::with_capacity(t_grid.len());
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![ZERO; n]).collect();
    let mut tmp = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    let mut steps = 0usize;
    let mut fsal_valid = false;

    for &t_out in t_grid {
        while t < t_out {
            if steps >= opts.max_steps {
                return Err(Error::SolverFailure(format!("step limit reached at t = {t}")));
            }
            let last = t_out - t <= h;
            let h_step = if last { t_out - t } else { h };
            if !fsal_valid {
                l.matvec_into(&y, &mut k[0]);
            }
            axpy_into(&mut tmp, &y, h_step, &[(A21, &k[0])]);
            l.matvec_into(&tmp, &mut k[1]);
            axpy_into(&mut tmp, &y, h_step, &[(A31, &k[0]), (A32, &k[1])]);
            l.matvec_into(&tmp, &mut k[2]);
            axpy_into(&mut tmp, &y, h_step, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
            l.matvec_into(&tmp, &mut k[3]);
            axpy_into(
                &mut tmp,
                &y,
                h_step,
                &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])],
            );
            l.matvec_into(&tmp, &mut k[4]);
            axpy_into(
                &mut tmp,
                &y,
                h_step,
                &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])],
            );
            l.matvec_into(&tmp, &mut k[5]);
            axpy_into(
                &mut y_new,
                &y,
                h_step,
                &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])],
            );
            l.matvec_into(&y_new, &mut k[6]);

            let mut err = 0.0f64;
            for i in 0..n {
                let e = (k[0][i] * E1
                    + k[2][i] * E3
                    + k[3][i] * E4
                    + k[4][i] * E5
                    + k[5][i] * E6
                    + k[6][i] * E7)
                    * h_step;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err = err.max(e.norm() / sc);
            }
            steps += 1;
            if err <= 1.0 {
                let drift = (trace(&y_new) - trace(&y)).norm();
                if drift > STEP_TRACE_TOL {
                    return Err(Error::TraceDrift { drift });
                }
                t = if last { t_out } else { t + h_step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                fsal_valid = true;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    h *= factor;
                }
            } else {
                fsal_valid = true;
                let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = h_step * factor;
                if h < opts.h_min {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
                // k[0] still holds ℒy since y was not advanced.
            }
        }
        let rho = hermitize(d, &y);
        out.push(DensityMatrix::new(&model.space, rho)?);
    }
    Ok(out)
}

/// `⟨a†a†aa⟩ / ⟨a†a⟩²` for the mode `label`.
pub fn g2_zero(state: &DensityMatrix, label: &str) -> Result<f64> {
    let a = annihilator(state.space(), label)?;
    let ad = a.dag();
    let n = expect(state, &(&ad * &a))?.re;
    if n <= 1e-12 {
        return Err(Error::VanishingDenominator(n));
    }
    let aa = &a * &a;
    let num = expect(state, &(&aa.dag() * &aa))?.re;
    Ok(num.max(0.0) / (n * n))
}

/// Reflection amplitude at one detuning.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReflectionPoint {
    pub delta: f64,
    pub r: C64,
    /// Total optical occupation at this drive strength.
    pub occupation: f64,
}

impl ReflectionPoint {
    pub fn amplitude(&self) -> f64 {
        self.r.norm()
    }

    pub fn phase(&self) -> f64 {
        self.r.arg()
    }
}

/// Weak-drive reflection `r(Δ) = 1 + 2κ⟨c⟩/Ω` off the mode `drive_label`.
///
/// The drive `iΩ(c - c†)` is treated to first order around the pinned state,
/// which must be an eigenstate of `H` annihilated by every collapse operator.
/// Every optical mode is shifted by `-Δ c†c` (laser detuning scan); the rate
/// `κ` is the total collapse rate attached to `c`.
pub fn reflection_spectrum(
    model: &LindbladModel,
    drive_label: &str,
    pinned: &FockState,
    delta_grid: &[f64],
    omega: f64,
) -> Result<Vec<ReflectionPoint>> {
    let space = model.space();
    if pinned.space() != space {
        return Err(Error::SpaceMismatch);
    }
    if space.mode(drive_label)?.kind != ModeKind::Optical {
        return Err(Error::InconsistentParameters(format!(
            "drive mode `{drive_label}` is not optical"
        )));
    }
    let psi0 = pinned.ket();
    for (m, &n) in space.modes().iter().zip(pinned.occupations()) {
        if m.kind == ModeKind::Optical && n != 0 {
            return Err(Error::NotPinned(format!("optical mode `{}` not empty", m.label)));
        }
    }
    let h_psi = model.hamiltonian().apply(&psi0);
    let e0 = h_psi[pinned.index()];
    let defect = h_psi
        .iter()
        .zip(&psi0)
        .map(|(a, b)| (a - e0 * b).norm())
        .fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::NotPinned(format!(
            "reference state is not an eigenstate of H (defect {defect:e})"
        )));
    }
    for (c, _) in model.collapses() {
        if max_norm(&c.apply(&psi0)) > 0.0 {
            return Err(Error::NotPinned(
                "a dissipator acts on the reference state (set γ = 0)".into(),
            ));
        }
    }

    let c = annihilator(space, drive_label)?;
    let kappa: f64 = model
        .collapses()
        .iter()
        .filter(|(op, _)| op.matrix() == c.matrix())
        .map(|(_, r)| r)
        .sum();
    let d = space.total_dim();
    let optical_number: Vec<f64> = (0..d)
        .map(|i| {
            space
                .occupations_of(i)
                .iter()
                .zip(space.modes())
                .filter(|(_, m)| m.kind == ModeKind::Optical)
                .map(|(&n, _)| n as f64)
                .sum()
        })
        .collect();
    let h_eff = model.effective_hamiltonian();
    let source: Vec<C64> = c.dag().apply(&psi0).into_iter().map(|z| z * C64::new(0.0, omega)).collect();

    let mut out = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        // The row of the reference state vanishes identically; pinning its
        // diagonal keeps the system regular and forces ψ1 ⟂ ψ0.
        let shift = SparseMatrix::diagonal(
            &optical_number
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    let pin = if i == pinned.index() { ONE } else { ZERO };
                    C64::new(-delta * n, 0.0) - e0 + pin
                })
                .collect::<Vec<_>>(),
        );
        let a = &h_eff + &shift;
        let lu = lu_of(&a)?;
        let psi1 = solve_with(&lu, &source, false);
        if psi1.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SolverFailure(format!("singular response at Δ = {delta}")));
        }
        let c_psi1 = c.apply(&psi1);
        let amp: C64 = psi0.iter().zip(&c_psi1).map(|(a, b)| a.conj() * b).sum();
        let occupation: f64 = psi1
            .iter()
            .zip(&optical_number)
            .map(|(z, &n)| z.norm_sqr() * n)
            .sum();
        if occupation > LINEAR_RESPONSE_BOUND {
            return Err(Error::DriveTooStrong(occupation));
        }
        out.push(ReflectionPoint {
            delta,
            r: ONE + amp * (2.0 * kappa / omega),
            occupation,
        });
    }
    Ok(out)
}

/// Eigenvalue of a non-Hermitian generator tagged by its dominant Fock label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LabeledEigenvalue {
    pub n: usize,
    pub lambda: C64,
    /// `|⟨n_B|v⟩|²` for the normalized eigenvector `v`.
    pub overlap: f64,
}

/// Eigenvalues of `h` matched to the ladder `|n_B⟩ = (B†)ⁿ|vac⟩/√n!`,
/// `n = 0..k`, by largest eigenvector overlap (lower `n` claims first).
/// Results are sorted by ascending real part.
pub fn nonhermitian_eigs(h: &Operator, b_mode: &Operator, k: usize) -> Result<Vec<LabeledEigenvalue>> {
    let space = h.space();
    if b_mode.space() != space {
        return Err(Error::SpaceMismatch);
    }
    let d = space.total_dim();
    if k > d {
        return Err(Error::DimensionMismatch { expected: d, found: k });
    }
    let dense = h.to_dense();
    let eig = dense
        .eigen()
        .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
    let u = eig.U();
    let s = eig.S().column_vector();
    let vectors: Vec<Vec<C64>> = (0..d)
        .map(|j| {
            let v: Vec<C64> = (0..d).map(|i| u[(i, j)]).collect();
            let nv = norm2(&v);
            v.into_iter().map(|z| z / nv).collect()
        })
        .collect();
    if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenSolver("non-finite eigenvalue".into()));
    }

    let bd = b_mode.dag();
    let mut target = FockState::vacuum(space).ket();
    let mut used = vec![false; d];
    let mut out = Vec::with_capacity(k);
    for n in 0..k {
        if n > 0 {
            target = bd.apply(&target);
            let nt = norm2(&target);
            target.iter_mut().for_each(|z| *z /= nt);
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in vectors.iter().enumerate() {
            if used[j] {
                continue;
            }
            let ov: C64 = target.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
            let w = ov.norm_sqr();
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((j, w));
            }
        }
        let (j, w) = best.ok_or_else(|| Error::EigenSolver("ran out of eigenvectors".into()))?;
        used[j] = true;
        out.push(LabeledEigenvalue {
            n,
            lambda: s[j],
            overlap: w,
        });
    }
    out.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.n.cmp(&b.n)));
    Ok(out)
}
