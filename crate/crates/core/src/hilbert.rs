//! Truncated bosonic Fock-space algebra.
//!
//! A [`ModeSpace`] fixes an ordered list of modes; the first mode is the
//! slowest-varying tensor index, so a basis index is
//! `Σ n_k · stride_k` with the last mode having stride 1.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use crate::C64;

/// Tolerance on `max |A - A†|` for operators flagged Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Density matrices must have unit trace and be Hermitian to this tolerance.
pub const STATE_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const POSITIVITY_TOL: f64 = -1e-8;
/// Largest thermal weight allowed beyond the truncation.
pub const THERMAL_TAIL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Optical,
    Mechanical,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub label: String,
    pub dim: usize,
    pub kind: ModeKind,
}

impl Mode {
    pub fn optical(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
            kind: ModeKind::Optical,
        }
    }

    pub fn mechanical(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
            kind: ModeKind::Mechanical,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSpace {
    modes: Vec<Mode>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl ModeSpace {
    pub fn new(modes: Vec<Mode>) -> Result<Arc<Self>> {
        for (i, m) in modes.iter().enumerate() {
            if m.dim < 2 {
                return Err(Error::InvalidDimension {
                    label: m.label.clone(),
                    dim: m.dim,
                });
            }
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::DuplicateMode(m.label.clone()));
            }
        }
        let mut strides = vec![1usize; modes.len()];
        for k in (0..modes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * modes[k + 1].dim;
        }
        let total_dim = modes.iter().map(|m| m.dim).product();
        Ok(Arc::new(Self {
            modes,
            strides,
            total_dim,
        }))
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn mode(&self, label: &str) -> Result<&Mode> {
        Ok(&self.modes[self.position(label)?])
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.mode(label)?.dim)
    }

    pub fn index_of(&self, occupations: &[usize]) -> usize {
        occupations
            .iter()
            .zip(&self.strides)
            .map(|(n, s)| n * s)
            .sum()
    }

    pub fn occupations_of(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|&s| {
                let n = index / s;
                index %= s;
                n
            })
            .collect()
    }

    fn stride(&self, k: usize) -> usize {
        self.strides[k]
    }
}

impl fmt::Display for ModeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .modes
            .iter()
            .map(|m| format!("{}:{}", m.label, m.dim))
            .collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}

/// Sparse complex operator on a [`ModeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: Arc<ModeSpace>,
    matrix: SparseMatrix,
    hermitian_hint: bool,
}

impl Operator {
    pub fn new(space: Arc<ModeSpace>, matrix: SparseMatrix, hermitian_hint: bool) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if hermitian_hint {
            let deviation = matrix.max_abs_diff(&matrix.adjoint());
            if deviation > HERMITIAN_TOL {
                return Err(Error::NotHermitian { deviation });
            }
        }
        Ok(Self {
            space,
            matrix,
            hermitian_hint,
        })
    }

    pub fn zero(space: &Arc<ModeSpace>) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            matrix: SparseMatrix::zeros(d, d),
            hermitian_hint: true,
        }
    }

    pub fn identity(space: &Arc<ModeSpace>) -> Self {
        Self {
            space: space.clone(),
            matrix: SparseMatrix::identity(space.total_dim()),
            hermitian_hint: true,
        }
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_hint
    }

    pub fn dag(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(C64::new(factor, 0.0)),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(factor),
            hermitian_hint: self.hermitian_hint && factor.im == 0.0,
        }
    }

    /// Re-checks the Hermitian property numerically and sets the hint.
    pub fn into_hermitian(self) -> Result<Self> {
        Self::new(self.space, self.matrix, true)
    }

    /// `A + A†`.
    pub fn plus_hc(&self) -> Self {
        let m = &self.matrix + &self.matrix.adjoint();
        Self {
            space: self.space.clone(),
            matrix: m,
            hermitian_hint: true,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.max_abs_diff(&self.matrix.adjoint())
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        self.matrix.matvec(psi)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        self.matrix.to_dense()
    }

    fn combine(&self, rhs: &Self, matrix: SparseMatrix, hermitian: bool) -> Self {
        assert!(
            self.space == rhs.space,
            "operator arithmetic across different mode spaces"
        );
        Self {
            space: self.space.clone(),
            matrix,
            hermitian_hint: hermitian,
        }
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.combine(
            rhs,
            &self.matrix + &rhs.matrix,
            self.hermitian_hint && rhs.hermitian_hint,
        )
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.combine(
            rhs,
            &self.matrix - &rhs.matrix,
            self.hermitian_hint && rhs.hermitian_hint,
        )
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.combine(rhs, &self.matrix * &rhs.matrix, false)
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

/// Lowering operator of a single mode embedded in the full space, `⟨n-1|a|n⟩ = √n`.
pub fn annihilator(space: &Arc<ModeSpace>, label: &str) -> Result<Operator> {
    let dim = space.dim_of(label)?;
    let local = SparseMatrix::from_triplets(
        dim,
        dim,
        (1..dim).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))),
    );
    embed_local(space, label, &local, false)
}

pub fn creator(space: &Arc<ModeSpace>, label: &str) -> Result<Operator> {
    Ok(annihilator(space, label)?.dag())
}

pub fn number_op(space: &Arc<ModeSpace>, label: &str) -> Result<Operator> {
    let dim = space.dim_of(label)?;
    let local = SparseMatrix::diagonal(
        &(0..dim)
            .map(|n| C64::new(n as f64, 0.0))
            .collect::<Vec<_>>(),
    );
    embed_local(space, label, &local, true)
}

/// Embeds a single-mode matrix acting on `label`; identity elsewhere.
pub fn embed_local(
    space: &Arc<ModeSpace>,
    label: &str,
    local: &SparseMatrix,
    hermitian: bool,
) -> Result<Operator> {
    let k = space.position(label)?;
    let dim = space.modes()[k].dim;
    if local.nrows() != dim || local.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: local.nrows(),
        });
    }
    let left: usize = space.modes()[..k].iter().map(|m| m.dim).product();
    let right: usize = space.modes()[k + 1..].iter().map(|m| m.dim).product();
    let matrix = SparseMatrix::identity(left)
        .kron(local)
        .kron(&SparseMatrix::identity(right));
    Operator::new(space.clone(), matrix, hermitian)
}

/// Embeds an operator defined on a sub-space (a subset of the modes of
/// `space`, matched by label and dimension) into `space`.
pub fn tensor_embed(op: &Operator, space: &Arc<ModeSpace>) -> Result<Operator> {
    let sub = op.space();
    let mut positions = Vec::with_capacity(sub.modes().len());
    for m in sub.modes() {
        let k = space.position(&m.label)?;
        let target = &space.modes()[k];
        if target.dim != m.dim {
            return Err(Error::DimensionMismatch {
                expected: target.dim,
                found: m.dim,
            });
        }
        positions.push(k);
    }
    let d = space.total_dim();
    let mut trips = Vec::new();
    for row in 0..d {
        let occ = space.occupations_of(row);
        let sub_occ: Vec<usize> = positions.iter().map(|&k| occ[k]).collect();
        let sub_row = sub.index_of(&sub_occ);
        let base = row
            - positions
                .iter()
                .map(|&k| occ[k] * space.stride(k))
                .sum::<usize>();
        for (sub_col, v) in op.matrix().row(sub_row) {
            let col_occ = sub.occupations_of(sub_col);
            let col = base
                + positions
                    .iter()
                    .zip(&col_occ)
                    .map(|(&k, &n)| n * space.stride(k))
                    .sum::<usize>();
            trips.push((row, col, v));
        }
    }
    Operator::new(
        space.clone(),
        SparseMatrix::from_triplets(d, d, trips),
        op.is_hermitian(),
    )
}

/// A basis state `|n_1, n_2, ...⟩` in mode order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockState {
    space: Arc<ModeSpace>,
    occupations: Vec<usize>,
}

impl FockState {
    pub fn new(space: &Arc<ModeSpace>, occupations: Vec<usize>) -> Result<Self> {
        if occupations.len() != space.modes().len() {
            return Err(Error::DimensionMismatch {
                expected: space.modes().len(),
                found: occupations.len(),
            });
        }
        for (m, &n) in space.modes().iter().zip(&occupations) {
            if n >= m.dim {
                return Err(Error::OccupationOutOfRange {
                    label: m.label.clone(),
                    n,
                    dim: m.dim,
                });
            }
        }
        Ok(Self {
            space: space.clone(),
            occupations,
        })
    }

    /// All modes empty except those listed.
    pub fn with(space: &Arc<ModeSpace>, occupied: &[(&str, usize)]) -> Result<Self> {
        let mut occ = vec![0; space.modes().len()];
        for &(label, n) in occupied {
            occ[space.position(label)?] = n;
        }
        Self::new(space, occ)
    }

    pub fn vacuum(space: &Arc<ModeSpace>) -> Self {
        Self {
            space: space.clone(),
            occupations: vec![0; space.modes().len()],
        }
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn occupations(&self) -> &[usize] {
        &self.occupations
    }

    pub fn index(&self) -> usize {
        self.space.index_of(&self.occupations)
    }

    pub fn ket(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.space.total_dim()];
        v[self.index()] = C64::new(1.0, 0.0);
        v
    }
}

/// Dense density operator satisfying trace, Hermiticity and positivity checks.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: Arc<ModeSpace>,
    matrix: Mat<C64>,
}

impl DensityMatrix {
    pub fn new(space: &Arc<ModeSpace>, matrix: Mat<C64>) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let trace: C64 = (0..d).map(|i| matrix[(i, i)]).sum();
        if (trace - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        let mut herm = 0.0f64;
        for i in 0..d {
            for j in 0..=i {
                herm = herm.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("non-Hermitian by {herm:e}")));
        }
        let min_eig = min_eigenvalue(&matrix)?;
        if min_eig < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self {
            space: space.clone(),
            matrix,
        })
    }

    /// Builds a state from a column-stacked vector `vec(ρ)[i + j d] = ρ_ij`.
    pub fn from_vec(space: &Arc<ModeSpace>, v: &[C64]) -> Result<Self> {
        let d = space.total_dim();
        if v.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: v.len(),
            });
        }
        Self::new(space, Mat::from_fn(d, d, |i, j| v[i + j * d]))
    }

    pub fn pure(space: &Arc<ModeSpace>, psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let d = space.total_dim();
        if psi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: psi.len(),
            });
        }
        let m = Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(space, m)
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.matrix
    }

    pub fn to_vec(&self) -> Vec<C64> {
        let d = self.space.total_dim();
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        for j in 0..d {
            for i in 0..d {
                v[i + j * d] = self.matrix[(i, j)];
            }
        }
        v
    }

    pub fn trace(&self) -> C64 {
        (0..self.space.total_dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.matrix)
    }

    /// Trace distance `½‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let diff = &self.matrix - &other.matrix;
        let eig = diff
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
        Ok(0.5 * eig.iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Occupation probability of the given Fock basis state.
    pub fn population(&self, state: &FockState) -> f64 {
        let i = state.index();
        self.matrix[(i, i)].re
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &[C64]) -> f64 {
        let d = self.space.total_dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            if psi[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                acc += psi[i].conj() * self.matrix[(i, j)] * psi[j];
            }
        }
        acc.re
    }
}

fn min_eigenvalue(m: &Mat<C64>) -> Result<f64> {
    let eig = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

pub fn fock_density(state: &FockState) -> DensityMatrix {
    let d = state.space().total_dim();
    let i = state.index();
    let mut m = Mat::<C64>::zeros(d, d);
    m[(i, i)] = C64::new(1.0, 0.0);
    DensityMatrix {
        space: state.space().clone(),
        matrix: m,
    }
}

/// Weight left beyond a truncation of `dim` levels for a thermal occupation `n_th`.
pub fn thermal_tail(n_th: f64, dim: usize) -> f64 {
    if n_th <= 0.0 {
        return 0.0;
    }
    (n_th / (n_th + 1.0)).powi(dim as i32)
}

/// Smallest truncation whose neglected thermal weight is below `tol`.
pub fn thermal_dim(n_th: f64, tol: f64) -> usize {
    let mut dim = 2;
    while thermal_tail(n_th, dim) >= tol {
        dim += 1;
    }
    dim
}

/// Smallest truncation whose neglected coherent-state weight is below `tol`.
pub fn coherent_dim(mean_occupation: f64, tol: f64) -> usize {
    let mut dim = 2usize;
    loop {
        let mut p = (-mean_occupation).exp();
        let mut kept = 0.0;
        for n in 0..dim {
            if n > 0 {
                p *= mean_occupation / n as f64;
            }
            kept += p;
        }
        if 1.0 - kept < tol {
            return dim;
        }
        dim += 1;
    }
}

/// Normalized Boltzmann weights `ζ_n ∝ (N/(N+1))^n` over `dim` levels.
pub fn thermal_weights(n_th: f64, dim: usize) -> Vec<f64> {
    if n_th <= 0.0 {
        let mut w = vec![0.0; dim];
        w[0] = 1.0;
        return w;
    }
    let q = n_th / (n_th + 1.0);
    let raw: Vec<f64> = (0..dim).map(|n| (1.0 - q) * q.powi(n as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Product of thermal states on the listed modes, vacuum on the rest.
pub fn thermal_state(space: &Arc<ModeSpace>, occupations: &[(&str, f64)]) -> Result<DensityMatrix> {
    let mut per_mode: Vec<Vec<f64>> = space
        .modes()
        .iter()
        .map(|m| {
            let mut w = vec![0.0; m.dim];
            w[0] = 1.0;
            w
        })
        .collect();
    for &(label, n_th) in occupations {
        let k = space.position(label)?;
        let dim = space.modes()[k].dim;
        let tail = thermal_tail(n_th, dim);
        if tail >= THERMAL_TAIL_TOL {
            return Err(Error::TruncationTooSmall {
                label: label.to_string(),
                dim,
                n_th,
                tail,
            });
        }
        per_mode[k] = thermal_weights(n_th, dim);
    }
    let d = space.total_dim();
    let mut m = Mat::<C64>::zeros(d, d);
    for i in 0..d {
        let occ = space.occupations_of(i);
        let w: f64 = occ.iter().zip(&per_mode).map(|(&n, w)| w[n]).product();
        m[(i, i)] = C64::new(w, 0.0);
    }
    Ok(DensityMatrix {
        space: space.clone(),
        matrix: m,
    })
}

/// `tr(ρ A)`.
pub fn expect(state: &DensityMatrix, op: &Operator) -> Result<C64> {
    if state.space() != op.space() {
        return Err(Error::SpaceMismatch);
    }
    let mut acc = C64::new(0.0, 0.0);
    for (i, j, v) in op.matrix().triplets() {
        acc += v * state.matrix()[(j, i)];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(dim: usize) -> Arc<ModeSpace> {
        ModeSpace::new(vec![Mode::optical("a", dim)]).unwrap()
    }

    #[test]
    fn lowering_operator_dim2() {
        let a = annihilator(&single(2), "a").unwrap();
        let dense = a.to_dense();
        assert_eq!(dense[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(dense[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(dense[(1, 0)], C64::new(0.0, 0.0));
        assert_eq!(dense[(1, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn lowering_operator_dim3_sqrt2() {
        let a = annihilator(&single(3), "a").unwrap();
        assert!((a.matrix().get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn number_operator_on_fock_two() {
        let s = single(4);
        let n = number_op(&s, "a").unwrap();
        let ket = FockState::with(&s, &[("a", 2)]).unwrap().ket();
        let out = n.apply(&ket);
        assert_eq!(out[2], C64::new(2.0, 0.0));
        let a = annihilator(&s, "a").unwrap();
        let ada = &a.dag() * &a;
        assert!(ada.matrix().max_abs_diff(n.matrix()) < 1e-14);
    }

    #[test]
    fn unknown_label_is_rejected() {
        assert_eq!(
            annihilator(&single(2), "b").unwrap_err(),
            Error::UnknownMode("b".into())
        );
    }

    #[test]
    fn space_validation() {
        assert!(matches!(
            ModeSpace::new(vec![Mode::optical("a", 1)]),
            Err(Error::InvalidDimension { .. })
        ));
        assert!(matches!(
            ModeSpace::new(vec![Mode::optical("a", 2), Mode::mechanical("a", 3)]),
            Err(Error::DuplicateMode(_))
        ));
        let s = ModeSpace::new(vec![
            Mode::optical("a", 2),
            Mode::optical("s", 3),
            Mode::mechanical("m", 4),
        ])
        .unwrap();
        assert_eq!(s.total_dim(), 24);
        assert_eq!(s.index_of(&[1, 2, 3]), 12 + 8 + 3);
        assert_eq!(s.occupations_of(23), vec![1, 2, 3]);
    }

    #[test]
    fn hermitian_hint_is_checked() {
        let s = single(3);
        let a = annihilator(&s, "a").unwrap();
        assert!(matches!(
            Operator::new(s.clone(), a.matrix().clone(), true),
            Err(Error::NotHermitian { .. })
        ));
        assert!(a.plus_hc().into_hermitian().is_ok());
    }

    #[test]
    fn thermal_vacuum_at_zero_temperature() {
        let s = single(5);
        let rho = thermal_state(&s, &[("a", 0.0)]).unwrap();
        assert_eq!(rho.matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(rho.trace(), C64::new(1.0, 0.0));
    }

    #[test]
    fn thermal_mean_occupation_matches_geometric_sum() {
        // Oracle: truncated geometric series summed directly.
        let q: f64 = 0.5;
        let dim = 20;
        let z: f64 = (0..dim).map(|n| q.powi(n)).sum();
        let mean_oracle: f64 = (0..dim).map(|n| n as f64 * q.powi(n)).sum::<f64>() / z;
        let s = single(dim as usize);
        let rho = thermal_state(&s, &[("a", 1.0)]).unwrap();
        let mean = expect(&rho, &number_op(&s, "a").unwrap()).unwrap().re;
        assert!((mean - mean_oracle).abs() < 1e-12);
        assert!((mean - 1.0).abs() < 1e-4);
    }

    #[test]
    fn thermal_truncation_too_small() {
        // (1/2)^12 ≈ 2.4e-4 of the weight would be discarded.
        let err = thermal_state(&single(12), &[("a", 1.0)]).unwrap_err();
        assert!(matches!(err, Error::TruncationTooSmall { dim: 12, .. }));
        assert_eq!(thermal_dim(1.0, THERMAL_TAIL_TOL), 20);
    }

    #[test]
    fn thermal_weights_decrease() {
        let w = thermal_weights(0.7, 30);
        assert!(w.windows(2).all(|p| p[1] < p[0]));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fock_density_trace_one() {
        let s = single(3);
        let rho = fock_density(&FockState::with(&s, &[("a", 1)]).unwrap());
        assert_eq!(rho.trace(), C64::new(1.0, 0.0));
        assert!(DensityMatrix::new(&s, rho.matrix().clone()).is_ok());
    }

    #[test]
    fn invalid_density_rejected() {
        let s = single(2);
        let bad = Mat::from_fn(2, 2, |i, j| {
            if i == j {
                C64::new(0.6, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(DensityMatrix::new(&s, bad).is_err());
        let neg = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(1.2, 0.0),
            (1, 1) => C64::new(-0.2, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        assert!(DensityMatrix::new(&s, neg).is_err());
    }

    #[test]
    fn tensor_embed_of_subspace_operator() {
        let full = ModeSpace::new(vec![
            Mode::optical("a", 2),
            Mode::optical("s", 3),
            Mode::mechanical("m", 2),
        ])
        .unwrap();
        let sub = ModeSpace::new(vec![Mode::mechanical("m", 2), Mode::optical("a", 2)]).unwrap();
        let op = &annihilator(&sub, "a").unwrap() * &creator(&sub, "m").unwrap();
        let embedded = tensor_embed(&op, &full).unwrap();
        let direct = &annihilator(&full, "a").unwrap() * &creator(&full, "m").unwrap();
        assert_eq!(embedded.matrix().max_abs_diff(direct.matrix()), 0.0);
    }

    #[test]
    fn truncation_helpers() {
        assert_eq!(thermal_dim(0.0, 1e-6), 2);
        let d = coherent_dim(1.0, 1e-6);
        assert!(d >= 9 && d <= 11);
    }

    proptest! {
        #[test]
        fn canonical_commutator_below_top_level(dim in 2usize..9) {
            let s = single(dim);
            let a = annihilator(&s, "a").unwrap();
            let comm = a.commutator(&a.dag()).to_dense();
            for i in 0..dim - 1 {
                for j in 0..dim - 1 {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((comm[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-13);
                }
            }
        }

        #[test]
        fn embedded_operators_on_distinct_modes_commute(da in 2usize..5, db in 2usize..5) {
            let s = ModeSpace::new(vec![Mode::optical("x", da), Mode::mechanical("y", db)]).unwrap();
            let a = annihilator(&s, "x").unwrap();
            let b = annihilator(&s, "y").unwrap();
            let n = number_op(&s, "y").unwrap();
            prop_assert_eq!(a.commutator(&b.dag()).max_abs(), 0.0);
            prop_assert_eq!((&a + &a.dag()).commutator(&n).max_abs(), 0.0);
        }

        #[test]
        fn thermal_state_is_diagonal_and_decreasing(n_th in 0.01f64..2.0) {
            let dim = thermal_dim(n_th, THERMAL_TAIL_TOL);
            let s = single(dim);
            let rho = thermal_state(&s, &[("a", n_th)]).unwrap();
            let m = rho.matrix();
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        prop_assert_eq!(m[(i, j)], C64::new(0.0, 0.0));
                    }
                }
                if i > 0 {
                    prop_assert!(m[(i, i)].re < m[(i - 1, i - 1)].re);
                }
            }
        }
    }
}
