//! Truncated composite Hilbert space: qubit ⊗ qubit ⊗ Fock.
//!
//! Basis kets are `|n; q1 q2>` with `n` the photon number and `q1`, `q2` the
//! qubit levels. The canonical order is photon-major with `(q1, q2)` in
//! lexicographic order, so label `(n, q1, q2)` sits at index `4n + 2q1 + q2`
//! and every fixed-photon sector is a contiguous slice of four entries.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{DleError, Result};

pub type C64 = Complex64;

/// Maximum retained photon number `N`. The composite space has dimension `4(N+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub const fn new(max_photons: usize) -> Self {
        FockCutoff(max_photons)
    }

    pub const fn max_photons(self) -> usize {
        self.0
    }

    pub const fn dim(self) -> usize {
        4 * (self.0 + 1)
    }

    /// Quench computations need the two-photon sector to exist.
    pub fn require_quench(self) -> Result<Self> {
        if self.0 < 2 {
            return Err(DleError::invalid(
                "cutoff",
                format!("N = {} but quench computations need N >= 2", self.0),
            ));
        }
        Ok(self)
    }

    pub(crate) fn check_same(self, other: FockCutoff) -> Result<()> {
        if self != other {
            return Err(DleError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

/// Bare basis label `|n; q1 q2>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub n: usize,
    pub q1: u8,
    pub q2: u8,
}

impl BasisLabel {
    /// Panics if a qubit level is not 0 or 1.
    pub const fn new(n: usize, q1: u8, q2: u8) -> Self {
        assert!(q1 <= 1 && q2 <= 1, "qubit levels must be 0 or 1");
        BasisLabel { n, q1, q2 }
    }

    pub const fn index(self) -> usize {
        4 * self.n + 2 * self.q1 as usize + self.q2 as usize
    }

    pub const fn from_index(k: usize) -> Self {
        BasisLabel {
            n: k / 4,
            q1: ((k / 2) % 2) as u8,
            q2: (k % 2) as u8,
        }
    }

    /// Total excitation number `n + q1 + q2`.
    pub const fn excitations(self) -> usize {
        self.n + self.q1 as usize + self.q2 as usize
    }

    /// `(-1)^(n + q1 + q2)`.
    pub const fn parity(self) -> i32 {
        if self.excitations().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub const fn swapped(self) -> Self {
        BasisLabel {
            n: self.n,
            q1: self.q2,
            q2: self.q1,
        }
    }

    pub fn qubit(self, j: usize) -> Result<u8> {
        match j {
            1 => Ok(self.q1),
            2 => Ok(self.q2),
            _ => Err(DleError::InvalidQubit(j)),
        }
    }

    fn with_qubit(self, j: usize, level: u8) -> Self {
        match j {
            1 => BasisLabel { q1: level, ..self },
            _ => BasisLabel { q2: level, ..self },
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{};{}{}>", self.n, self.q1, self.q2)
    }
}

/// All `4(N+1)` labels in canonical order.
pub fn build_basis(cutoff: FockCutoff) -> Vec<BasisLabel> {
    (0..cutoff.dim()).map(BasisLabel::from_index).collect()
}

/// Complex amplitudes over the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    cutoff: FockCutoff,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn zeros(cutoff: FockCutoff) -> Self {
        StateVector {
            cutoff,
            amps: DVector::zeros(cutoff.dim()),
        }
    }

    pub fn basis(label: BasisLabel, cutoff: FockCutoff) -> Result<Self> {
        check_label(label, cutoff)?;
        let mut v = Self::zeros(cutoff);
        v.amps[label.index()] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn from_amplitudes(cutoff: FockCutoff, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != cutoff.dim() {
            return Err(DleError::DimensionMismatch {
                left: cutoff.dim(),
                right: amps.len(),
            });
        }
        Ok(StateVector { cutoff, amps })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    /// Amplitude at `label`; zero for labels beyond the cutoff.
    pub fn amplitude(&self, label: BasisLabel) -> C64 {
        if label.n > self.cutoff.max_photons() {
            return C64::new(0.0, 0.0);
        }
        self.amps[label.index()]
    }

    pub fn set_amplitude(&mut self, label: BasisLabel, value: C64) -> Result<()> {
        check_label(label, self.cutoff)?;
        self.amps[label.index()] = value;
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Self {
        let norm = self.norm();
        StateVector {
            cutoff: self.cutoff,
            amps: self.amps.unscale(norm),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.cutoff.check_same(other.cutoff)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Squared norm of the fixed-photon sector `n`.
    pub fn sector_weight(&self, n: usize) -> f64 {
        if n > self.cutoff.max_photons() {
            return 0.0;
        }
        self.amps.rows(4 * n, 4).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Weight on the highest retained photon number.
    pub fn top_fock_weight(&self) -> f64 {
        self.sector_weight(self.cutoff.max_photons())
    }

    /// Squared norms of the even- and odd-excitation-parity components.
    pub fn parity_weights(&self) -> (f64, f64) {
        let mut even = 0.0;
        let mut odd = 0.0;
        for (k, z) in self.amps.iter().enumerate() {
            if BasisLabel::from_index(k).parity() > 0 {
                even += z.norm_sqr();
            } else {
                odd += z.norm_sqr();
            }
        }
        (even, odd)
    }
}

fn check_label(label: BasisLabel, cutoff: FockCutoff) -> Result<()> {
    if label.n > cutoff.max_photons() {
        return Err(DleError::PhotonOutOfRange {
            n: label.n,
            cutoff: cutoff.max_photons(),
        });
    }
    Ok(())
}

/// Elementary operators. Qubit indices are 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Annihilate,
    Create,
    SigmaPlus(usize),
    SigmaMinus(usize),
    Sigma3(usize),
    Identity,
}

/// Dense complex operator over the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    cutoff: FockCutoff,
    matrix: DMatrix<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn zeros(cutoff: FockCutoff) -> Self {
        OperatorMatrix {
            cutoff,
            matrix: DMatrix::zeros(cutoff.dim(), cutoff.dim()),
            hermitian: false,
        }
    }

    pub fn identity(cutoff: FockCutoff) -> Self {
        OperatorMatrix {
            cutoff,
            matrix: DMatrix::identity(cutoff.dim(), cutoff.dim()),
            hermitian: true,
        }
    }

    pub fn from_matrix(cutoff: FockCutoff, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != cutoff.dim() || matrix.ncols() != cutoff.dim() {
            return Err(DleError::DimensionMismatch {
                left: cutoff.dim(),
                right: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(OperatorMatrix {
            cutoff,
            matrix,
            hermitian: false,
        })
    }

    /// Diagonal operator with `f(label)` on the diagonal.
    pub fn diagonal(cutoff: FockCutoff, f: impl Fn(BasisLabel) -> C64) -> Self {
        let diag = DVector::from_iterator(
            cutoff.dim(),
            (0..cutoff.dim()).map(|k| f(BasisLabel::from_index(k))),
        );
        OperatorMatrix {
            cutoff,
            matrix: DMatrix::from_diagonal(&diag),
            hermitian: false,
        }
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff.dim()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn element(&self, row: BasisLabel, col: BasisLabel) -> C64 {
        self.matrix[(row.index(), col.index())]
    }

    pub fn is_flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Sets the Hermiticity flag after checking `max|M - M^dag| <= tol`.
    pub fn into_hermitian(mut self, tol: f64) -> Result<Self> {
        let residual = self.hermiticity_residual();
        if residual > tol {
            return Err(DleError::NotHermitian { residual });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Largest imaginary part of any element.
    pub fn max_imaginary(&self) -> f64 {
        self.matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn sum(&self, other: &OperatorMatrix) -> Result<Self> {
        self.cutoff.check_same(other.cutoff)?;
        Ok(OperatorMatrix {
            cutoff: self.cutoff,
            matrix: &self.matrix + &other.matrix,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn difference(&self, other: &OperatorMatrix) -> Result<Self> {
        self.cutoff.check_same(other.cutoff)?;
        Ok(OperatorMatrix {
            cutoff: self.cutoff,
            matrix: &self.matrix - &other.matrix,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        OperatorMatrix {
            cutoff: self.cutoff,
            matrix: self.matrix.map(|z| z * factor),
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    /// Matrix product `self · other`.
    pub fn product(&self, other: &OperatorMatrix) -> Result<Self> {
        self.cutoff.check_same(other.cutoff)?;
        Ok(OperatorMatrix {
            cutoff: self.cutoff,
            matrix: &self.matrix * &other.matrix,
            hermitian: false,
        })
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> Result<Self> {
        self.product(other)?.difference(&other.product(self)?)
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            cutoff: self.cutoff,
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.cutoff.check_same(state.cutoff())?;
        StateVector::from_amplitudes(self.cutoff, &self.matrix * state.amplitudes())
    }

    /// `max |self - other|` over all elements.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        self.cutoff.check_same(other.cutoff)?;
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Builds an elementary operator, tensored with identity on the other factors.
pub fn build_operator(kind: OperatorKind, cutoff: FockCutoff) -> Result<OperatorMatrix> {
    if let OperatorKind::SigmaPlus(j) | OperatorKind::SigmaMinus(j) | OperatorKind::Sigma3(j) = kind
    {
        if j != 1 && j != 2 {
            return Err(DleError::InvalidQubit(j));
        }
    }
    let dim = cutoff.dim();
    let top = cutoff.max_photons();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for col in build_basis(cutoff) {
        // (image label, real coefficient) or nothing
        let image = match kind {
            OperatorKind::Identity => Some((col, 1.0)),
            OperatorKind::Annihilate => (col.n > 0).then(|| {
                (
                    BasisLabel {
                        n: col.n - 1,
                        ..col
                    },
                    (col.n as f64).sqrt(),
                )
            }),
            OperatorKind::Create => (col.n < top).then(|| {
                (
                    BasisLabel {
                        n: col.n + 1,
                        ..col
                    },
                    ((col.n + 1) as f64).sqrt(),
                )
            }),
            OperatorKind::SigmaPlus(j) => (col.qubit(j)? == 0).then(|| (col.with_qubit(j, 1), 1.0)),
            OperatorKind::SigmaMinus(j) => {
                (col.qubit(j)? == 1).then(|| (col.with_qubit(j, 0), 1.0))
            }
            OperatorKind::Sigma3(j) => Some((col, 2.0 * col.qubit(j)? as f64 - 1.0)),
        };
        if let Some((row, coeff)) = image {
            m[(row.index(), col.index())] = C64::new(coeff, 0.0);
        }
    }
    let op = OperatorMatrix::from_matrix(cutoff, m)?;
    match kind {
        OperatorKind::Identity | OperatorKind::Sigma3(_) => op.into_hermitian(0.0),
        _ => Ok(op),
    }
}

/// Permutation exchanging the two qubits, `S|n; q1 q2> = |n; q2 q1>`.
pub fn exchange_swap(cutoff: FockCutoff) -> OperatorMatrix {
    let dim = cutoff.dim();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for col in build_basis(cutoff) {
        m[(col.swapped().index(), col.index())] = C64::new(1.0, 0.0);
    }
    OperatorMatrix {
        cutoff,
        matrix: m,
        hermitian: true,
    }
}

/// Diagonal `(-1)^(n + q1 + q2)`.
pub fn excitation_parity(cutoff: FockCutoff) -> OperatorMatrix {
    let mut p = OperatorMatrix::diagonal(cutoff, |l| C64::new(l.parity() as f64, 0.0));
    p.hermitian = true;
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(kind: OperatorKind, n: usize) -> OperatorMatrix {
        build_operator(kind, FockCutoff::new(n)).unwrap()
    }

    #[test]
    fn basis_small_cutoffs() {
        let b0 = build_basis(FockCutoff::new(0));
        assert_eq!(
            b0,
            vec![
                BasisLabel::new(0, 0, 0),
                BasisLabel::new(0, 0, 1),
                BasisLabel::new(0, 1, 0),
                BasisLabel::new(0, 1, 1)
            ]
        );
        let b2 = build_basis(FockCutoff::new(2));
        assert_eq!(b2.len(), 12);
        assert_eq!(b2[0], BasisLabel::new(0, 0, 0));
        assert_eq!(*b2.last().unwrap(), BasisLabel::new(2, 1, 1));
    }

    #[test]
    fn index_is_bijection() {
        let basis = build_basis(FockCutoff::new(5));
        for (k, label) in basis.iter().enumerate() {
            assert_eq!(label.index(), k);
            assert_eq!(BasisLabel::from_index(k), *label);
        }
        let mut sorted = basis.clone();
        sorted.sort();
        assert_eq!(sorted, basis);
    }

    #[test]
    fn annihilate_lowers_photon() {
        let cutoff = FockCutoff::new(3);
        let a = op(OperatorKind::Annihilate, 3);
        let v = StateVector::basis(BasisLabel::new(1, 0, 0), cutoff).unwrap();
        let out = a.apply(&v).unwrap();
        assert_eq!(
            out,
            StateVector::basis(BasisLabel::new(0, 0, 0), cutoff).unwrap()
        );
    }

    #[test]
    fn number_operator_is_diagonal() {
        let n = op(OperatorKind::Create, 4)
            .product(&op(OperatorKind::Annihilate, 4))
            .unwrap();
        for row in build_basis(FockCutoff::new(4)) {
            for col in build_basis(FockCutoff::new(4)) {
                let expect = if row == col { row.n as f64 } else { 0.0 };
                assert!((n.element(row, col) - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sigma_plus_two_level_action() {
        let cutoff = FockCutoff::new(2);
        let sp = op(OperatorKind::SigmaPlus(1), 2);
        for n in 0..=2 {
            let v = StateVector::basis(BasisLabel::new(n, 0, 0), cutoff).unwrap();
            assert_eq!(
                sp.apply(&v).unwrap(),
                StateVector::basis(BasisLabel::new(n, 1, 0), cutoff).unwrap()
            );
            let w = StateVector::basis(BasisLabel::new(n, 1, 0), cutoff).unwrap();
            assert_eq!(sp.apply(&w).unwrap(), StateVector::zeros(cutoff));
        }
    }

    #[test]
    fn sigma3_sign_convention() {
        let s3 = op(OperatorKind::Sigma3(2), 1);
        assert_eq!(
            s3.element(BasisLabel::new(1, 0, 1), BasisLabel::new(1, 0, 1))
                .re,
            1.0
        );
        assert_eq!(
            s3.element(BasisLabel::new(1, 1, 0), BasisLabel::new(1, 1, 0))
                .re,
            -1.0
        );
    }

    #[test]
    fn invalid_qubit_index() {
        assert_eq!(
            build_operator(OperatorKind::SigmaMinus(3), FockCutoff::new(2)),
            Err(DleError::InvalidQubit(3))
        );
        assert_eq!(
            build_operator(OperatorKind::Sigma3(0), FockCutoff::new(2)),
            Err(DleError::InvalidQubit(0))
        );
    }

    #[test]
    fn arithmetic_identities() {
        let a = op(OperatorKind::Annihilate, 4);
        let zero = a.sum(&a.scaled(C64::new(-1.0, 0.0))).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        assert_eq!(a.adjoint().adjoint(), a);
        let ad = op(OperatorKind::Create, 4);
        let x = a.sum(&ad).unwrap();
        let left = a.product(&ad).unwrap().product(&x).unwrap();
        let right = a.product(&ad.product(&x).unwrap()).unwrap();
        assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
    }

    #[test]
    fn truncated_commutator() {
        let cutoff = FockCutoff::new(5);
        let a = op(OperatorKind::Annihilate, 5);
        let ad = op(OperatorKind::Create, 5);
        let comm = a.commutator(&ad).unwrap();
        for row in build_basis(cutoff) {
            for col in build_basis(cutoff) {
                let z = comm.element(row, col);
                if row != col {
                    assert_eq!(z.norm(), 0.0);
                } else if row.n < 5 {
                    assert!((z.re - 1.0).abs() < 1e-14);
                } else {
                    // single violating entry at the top level: -N
                    assert!((z.re + 5.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = op(OperatorKind::Annihilate, 2);
        let b = op(OperatorKind::Annihilate, 3);
        assert!(matches!(a.sum(&b), Err(DleError::DimensionMismatch { .. })));
        assert!(matches!(
            a.product(&b),
            Err(DleError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn swap_symmetry() {
        let cutoff = FockCutoff::new(3);
        let s = exchange_swap(cutoff);
        let id = OperatorMatrix::identity(cutoff);
        assert_eq!(s.product(&s).unwrap().max_abs_diff(&id).unwrap(), 0.0);
        let sp1 = op(OperatorKind::SigmaPlus(1), 3);
        let sp2 = op(OperatorKind::SigmaPlus(2), 3);
        let conj = s.product(&sp1).unwrap().product(&s).unwrap();
        assert_eq!(conj.max_abs_diff(&sp2).unwrap(), 0.0);
    }

    #[test]
    fn elementary_operators_are_real() {
        for kind in [
            OperatorKind::Annihilate,
            OperatorKind::Create,
            OperatorKind::SigmaPlus(1),
            OperatorKind::SigmaPlus(2),
            OperatorKind::SigmaMinus(1),
            OperatorKind::SigmaMinus(2),
            OperatorKind::Sigma3(1),
            OperatorKind::Sigma3(2),
            OperatorKind::Identity,
        ] {
            assert_eq!(op(kind, 4).max_imaginary(), 0.0);
        }
    }

    #[test]
    fn hermitian_flag_is_verified() {
        let a = op(OperatorKind::Annihilate, 2);
        assert!(matches!(
            a.clone().into_hermitian(1e-12),
            Err(DleError::NotHermitian { .. })
        ));
        let x = a.sum(&a.adjoint()).unwrap().into_hermitian(1e-12).unwrap();
        assert!(x.is_flagged_hermitian());
    }

    #[test]
    fn sector_weights_and_parity() {
        let cutoff = FockCutoff::new(2);
        let mut v = StateVector::zeros(cutoff);
        v.set_amplitude(BasisLabel::new(2, 1, 0), C64::new(0.6, 0.0))
            .unwrap();
        v.set_amplitude(BasisLabel::new(0, 0, 0), C64::new(0.0, 0.8))
            .unwrap();
        assert!((v.sector_weight(2) - 0.36).abs() < 1e-15);
        assert!((v.top_fock_weight() - 0.36).abs() < 1e-15);
        let (even, odd) = v.parity_weights();
        assert!((even - 0.64).abs() < 1e-15 && (odd - 0.36).abs() < 1e-15);
        assert!(v.is_normalized(1e-12));
        assert!(StateVector::basis(BasisLabel::new(3, 0, 0), cutoff).is_err());
    }
}
