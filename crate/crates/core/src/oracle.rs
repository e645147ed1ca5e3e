//! Exact diagonalization of the truncated stationary Hamiltonian and exact
//! quench overlaps, the brute-force reference for every closed form.
//!
//! Each excitation-parity block is diagonalized separately, so eigenvectors
//! carry an exact parity. Inside degenerate clusters the eigenvectors are
//! rotated onto eigenvectors of the qubit-exchange swap; the coupling is
//! exchange symmetric, so this fixes the basis without heuristics.
//!
//! Dressed states follow the phase convention "largest-magnitude component
//! real and positive", which for an assignable state is the bare component.
//! The degenerate pair `|n;10>`, `|n;01>` is handled through its exchange
//! combinations: the symmetric one is dressed by the field, the antisymmetric
//! one is dark, and the dressed `|n;10>` is `(S + A)/√2`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use log::warn;
use nalgebra::DMatrix;

use crate::error::{DleError, Result};
use crate::hamiltonian::{frequency_jump_unitary, h_static, CavityFrequency, SystemParams};
use crate::hilbert::{build_basis, BasisLabel, FockCutoff, StateVector, C64};
use crate::linalg::eigh_real;
use crate::quench::{AmplitudeSet, QuenchSpec, TARGET_LABELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExchangeParity {
    Symmetric,
    Antisymmetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    pub vector: StateVector,
    pub exchange_parity: ExchangeParity,
}

/// Full eigendecomposition of `H(ω)` at cutoff `N`, ascending in energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub cutoff: FockCutoff,
    pub omega: CavityFrequency,
    pub eigenpairs: Vec<Eigenpair>,
}

impl SpectralDecomposition {
    pub fn energies(&self) -> Vec<f64> {
        self.eigenpairs.iter().map(|p| p.energy).collect()
    }

    pub fn ground(&self) -> &Eigenpair {
        &self.eigenpairs[0]
    }
}

const ORTHONORMALITY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-10;
const DEGENERACY_TOL: f64 = 1e-10;

pub fn diagonalize(
    params: &SystemParams,
    omega: CavityFrequency,
    cutoff: FockCutoff,
) -> Result<SpectralDecomposition> {
    let cutoff = cutoff.require_quench()?;
    let h = h_static(params, omega, cutoff);
    let real = h.matrix().map(|z| z.re);
    let scale = real.norm().max(1.0);
    let basis = build_basis(cutoff);

    let mut pairs = Vec::with_capacity(cutoff.dim());
    for parity in [1, -1] {
        let idx: Vec<usize> = basis
            .iter()
            .filter(|l| l.parity() == parity)
            .map(|l| l.index())
            .collect();
        let position: BTreeMap<usize, usize> =
            idx.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let swap: Vec<usize> = idx
            .iter()
            .map(|&i| position[&BasisLabel::from_index(i).swapped().index()])
            .collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| real[(idx[r], idx[c])]);
        let (values, mut vectors) = eigh_real(block.clone())?;
        rotate_degenerate(&values, &mut vectors, &swap, DEGENERACY_TOL * scale)?;

        for col in vectors.column_iter() {
            let mut v = col.clone_owned();
            let energy = v.dot(&(&block * &v));
            // phase: largest-magnitude component positive
            let lead = v.iamax();
            if v[lead] < 0.0 {
                v.neg_mut();
            }
            let swapped_overlap: f64 = (0..v.len()).map(|p| v[p] * v[swap[p]]).sum();
            let exchange_parity = if swapped_overlap >= 0.0 {
                ExchangeParity::Symmetric
            } else {
                ExchangeParity::Antisymmetric
            };
            let mut full = StateVector::zeros(cutoff);
            for (p, &i) in idx.iter().enumerate() {
                full.set_amplitude(BasisLabel::from_index(i), C64::new(v[p], 0.0))?;
            }
            pairs.push(Eigenpair {
                energy,
                vector: full,
                exchange_parity,
            });
        }
    }
    pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    let spec = SpectralDecomposition {
        cutoff,
        omega,
        eigenpairs: pairs,
    };
    verify(&spec, &h.into_matrix(), scale)?;
    Ok(spec)
}

/// Rotates each cluster of (near-)degenerate eigenvectors onto swap eigenvectors.
fn rotate_degenerate(
    values: &[f64],
    vectors: &mut DMatrix<f64>,
    swap: &[usize],
    tol: f64,
) -> Result<()> {
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let k = end - start;
            let cluster = vectors.columns(start, k).clone_owned();
            let swapped = DMatrix::from_fn(cluster.nrows(), k, |r, c| cluster[(swap[r], c)]);
            let projected = cluster.transpose() * swapped;
            let sym = (&projected + projected.transpose()) * 0.5;
            let (_, rotation) = eigh_real(sym)?;
            vectors
                .columns_mut(start, k)
                .copy_from(&(cluster * rotation));
        }
        start = end;
    }
    Ok(())
}

fn verify(spec: &SpectralDecomposition, h: &DMatrix<C64>, scale: f64) -> Result<()> {
    let dim = spec.cutoff.dim();
    let vecs = DMatrix::from_fn(dim, dim, |r, c| spec.eigenpairs[c].vector.amplitudes()[r]);
    let gram = vecs.adjoint() * &vecs - DMatrix::<C64>::identity(dim, dim);
    let gram_residual = gram.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if gram_residual > ORTHONORMALITY_TOL {
        return Err(DleError::Eigensolver(format!(
            "eigenvectors not orthonormal (residual {gram_residual:.3e})"
        )));
    }
    for pair in &spec.eigenpairs {
        let v = pair.vector.amplitudes();
        let r = (h * v - v * C64::new(pair.energy, 0.0)).norm();
        if r > RESIDUAL_TOL * scale {
            return Err(DleError::Eigensolver(format!(
                "eigenpair residual {r:.3e} at E = {}",
                pair.energy
            )));
        }
    }
    Ok(())
}

/// Exact dressed counterpart of a bare label.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedState {
    pub label: BasisLabel,
    /// `None` for `|n;10>`/`|n;01>`, which are the combinations `(S ± A)/√2`
    /// of an exchange-symmetric and an exchange-antisymmetric eigenstate.
    pub exchange_parity: Option<ExchangeParity>,
    pub vector: StateVector,
    pub overlap_with_bare: f64,
}

/// Eigenpair best matching `bare` within an exchange sector; returns the
/// index and the (positive after phase fix) overlap.
fn best_match(
    spec: &SpectralDecomposition,
    bare: &StateVector,
    parity: ExchangeParity,
    label: BasisLabel,
) -> Result<(usize, f64)> {
    let mut best = (usize::MAX, 0.0f64);
    for (k, pair) in spec.eigenpairs.iter().enumerate() {
        if pair.exchange_parity != parity {
            continue;
        }
        let overlap = bare.inner(&pair.vector)?.re;
        if overlap.abs() > best.1.abs() {
            best = (k, overlap);
        }
    }
    if best.1.abs() <= FRAC_1_SQRT_2 {
        return Err(DleError::AssignmentFailed {
            label,
            overlap: best.1.abs(),
        });
    }
    Ok(best)
}

fn signed_vector(spec: &SpectralDecomposition, k: usize, overlap: f64) -> StateVector {
    let v = &spec.eigenpairs[k].vector;
    if overlap < 0.0 {
        StateVector::from_amplitudes(v.cutoff(), -v.amplitudes()).expect("same dimension")
    } else {
        v.clone()
    }
}

fn pair_bare(n: usize, parity: ExchangeParity, cutoff: FockCutoff) -> Result<StateVector> {
    let sign = match parity {
        ExchangeParity::Symmetric => 1.0,
        ExchangeParity::Antisymmetric => -1.0,
    };
    let mut v = StateVector::zeros(cutoff);
    v.set_amplitude(BasisLabel::new(n, 1, 0), C64::new(FRAC_1_SQRT_2, 0.0))?;
    v.set_amplitude(
        BasisLabel::new(n, 0, 1),
        C64::new(sign * FRAC_1_SQRT_2, 0.0),
    )?;
    Ok(v)
}

fn warn_if_strongly_dressed(state: &DressedState, bare_labels: &[BasisLabel]) {
    let off = build_basis(state.vector.cutoff())
        .into_iter()
        .filter(|l| !bare_labels.contains(l))
        .map(|l| state.vector.amplitude(l).norm())
        .fold(0.0, f64::max);
    if off > 0.5 {
        warn!(
            "dressed {} has off-base overlap {off:.3}; outside the perturbative regime",
            state.label
        );
    }
}

/// Exchange eigenstate `(|n;10> ± |n;01>)/√2`, dressed, and its energy.
pub fn identify_exchange_state(
    spec: &SpectralDecomposition,
    n: usize,
    parity: ExchangeParity,
) -> Result<(DressedState, f64)> {
    let label = BasisLabel::new(n, 1, 0);
    let bare = pair_bare(n, parity, spec.cutoff)?;
    let (k, overlap) = best_match(spec, &bare, parity, label)?;
    let state = DressedState {
        label,
        exchange_parity: Some(parity),
        vector: signed_vector(spec, k, overlap),
        overlap_with_bare: overlap.abs(),
    };
    warn_if_strongly_dressed(&state, &[label, label.swapped()]);
    Ok((state, spec.eigenpairs[k].energy))
}

pub fn identify_dressed(spec: &SpectralDecomposition, label: BasisLabel) -> Result<DressedState> {
    if label.n > spec.cutoff.max_photons() {
        return Err(DleError::PhotonOutOfRange {
            n: label.n,
            cutoff: spec.cutoff.max_photons(),
        });
    }
    if label.q1 == label.q2 {
        let bare = StateVector::basis(label, spec.cutoff)?;
        let (k, overlap) = best_match(spec, &bare, ExchangeParity::Symmetric, label)?;
        let state = DressedState {
            label,
            exchange_parity: Some(ExchangeParity::Symmetric),
            vector: signed_vector(spec, k, overlap),
            overlap_with_bare: overlap.abs(),
        };
        warn_if_strongly_dressed(&state, &[label]);
        return Ok(state);
    }
    let (sym, _) = identify_exchange_state(spec, label.n, ExchangeParity::Symmetric)?;
    let (anti, _) = identify_exchange_state(spec, label.n, ExchangeParity::Antisymmetric)?;
    let sign = if label.q1 == 1 { 1.0 } else { -1.0 };
    let combined = (sym.vector.amplitudes() + anti.vector.amplitudes() * C64::new(sign, 0.0))
        * C64::new(FRAC_1_SQRT_2, 0.0);
    let vector = StateVector::from_amplitudes(spec.cutoff, combined)?;
    let overlap_with_bare = vector.amplitude(label).norm();
    Ok(DressedState {
        label,
        exchange_parity: None,
        vector,
        overlap_with_bare,
    })
}

/// Exact energy associated with a bare label. For `|n;10>`/`|n;01>` this is
/// the centroid of the symmetric and antisymmetric pair energies.
pub fn dressed_energy(spec: &SpectralDecomposition, label: BasisLabel) -> Result<f64> {
    if label.q1 == label.q2 {
        let bare = StateVector::basis(label, spec.cutoff)?;
        let (k, _) = best_match(spec, &bare, ExchangeParity::Symmetric, label)?;
        return Ok(spec.eigenpairs[k].energy);
    }
    let (_, es) = identify_exchange_state(spec, label.n, ExchangeParity::Symmetric)?;
    let (_, ea) = identify_exchange_state(spec, label.n, ExchangeParity::Antisymmetric)?;
    Ok(0.5 * (es + ea))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub cutoff: FockCutoff,
    /// Photon numbers up to which the overlap table is reported.
    pub table_photons: usize,
    /// Relative tolerance on the change of each amplitude from `N` to `N + 5`.
    pub convergence_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            cutoff: FockCutoff::new(20),
            table_photons: 2,
            convergence_tol: 1e-6,
        }
    }
}

/// Exact overlaps `<dressed(label, ω2)|dressed(|0;00>, ω1)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactQuench {
    pub amplitudes: AmplitudeSet,
    pub table: BTreeMap<BasisLabel, f64>,
    /// Weight of the initial state on all exchange-antisymmetric eigenstates at `ω2`.
    pub antisymmetric_weight: f64,
    pub cutoff: FockCutoff,
}

impl ExactQuench {
    pub fn table_weight(&self) -> f64 {
        self.table.values().map(|a| a * a).sum()
    }
}

const CONVERGENCE_FLOOR: f64 = 1e-13;

pub fn exact_quench_amplitudes(
    params: &SystemParams,
    quench: &QuenchSpec,
    config: &OracleConfig,
) -> Result<ExactQuench> {
    let cutoff = config.cutoff.require_quench()?;
    if config.table_photons > cutoff.max_photons() {
        return Err(DleError::PhotonOutOfRange {
            n: config.table_photons,
            cutoff: cutoff.max_photons(),
        });
    }
    let result = overlap_table(params, quench, cutoff, config.table_photons.max(2))?;
    let next = FockCutoff::new(cutoff.max_photons() + 5);
    let check = overlap_table(params, quench, next, 2)?;
    const NAMES: [&str; 5] = ["a_1_10", "a_1_01", "a_0_11", "a_2_11", "a_2_00"];
    for ((name, a), b) in NAMES
        .iter()
        .zip(result.amplitudes.values())
        .zip(check.amplitudes.values())
    {
        let change = (a - b).abs();
        if change > config.convergence_tol * a.abs().max(b.abs()) + CONVERGENCE_FLOOR {
            return Err(DleError::CutoffUnconverged {
                quantity: name,
                cutoff: cutoff.max_photons(),
                next: next.max_photons(),
                change,
            });
        }
    }
    let mut result = result;
    result.table.retain(|l, _| l.n <= config.table_photons);
    Ok(result)
}

fn overlap_table(
    params: &SystemParams,
    quench: &QuenchSpec,
    cutoff: FockCutoff,
    max_n: usize,
) -> Result<ExactQuench> {
    let before = diagonalize(params, quench.omega1, cutoff)?;
    let after = diagonalize(params, quench.omega2, cutoff)?;
    let initial = identify_dressed(&before, BasisLabel::new(0, 0, 0))?;
    let mut table = BTreeMap::new();
    for label in build_basis(cutoff).into_iter().filter(|l| l.n <= max_n) {
        let dressed = identify_dressed(&after, label)?;
        table.insert(label, dressed.vector.inner(&initial.vector)?.re);
    }
    let antisymmetric_weight = after
        .eigenpairs
        .iter()
        .filter(|p| p.exchange_parity == ExchangeParity::Antisymmetric)
        .map(|p| p.vector.inner(&initial.vector).map(|z| z.norm_sqr()))
        .sum::<Result<f64>>()?;
    let amp = |i: usize| table[&TARGET_LABELS[i]];
    let amplitudes = AmplitudeSet {
        a_1_10: amp(0),
        a_1_01: amp(1),
        a_0_11: amp(2),
        a_2_11: amp(3),
        a_2_00: amp(4),
    };
    Ok(ExactQuench {
        amplitudes,
        table,
        antisymmetric_weight,
        cutoff,
    })
}

/// Sudden-limit amplitudes of the full nonstationary Hamiltonian: the dressed
/// vacuum at `ω1` is carried through the instantaneous mode change generated
/// by the `a² − a†²` drive and projected onto dressed states at `ω2`.
pub fn sudden_quench_table(
    params: &SystemParams,
    quench: &QuenchSpec,
    cutoff: FockCutoff,
    max_n: usize,
) -> Result<BTreeMap<BasisLabel, C64>> {
    let before = diagonalize(params, quench.omega1, cutoff)?;
    let after = diagonalize(params, quench.omega2, cutoff)?;
    let initial = identify_dressed(&before, BasisLabel::new(0, 0, 0))?;
    let jump = frequency_jump_unitary(quench.omega1, quench.omega2, cutoff)?;
    let moved = jump.apply(&initial.vector)?;
    build_basis(cutoff)
        .into_iter()
        .filter(|l| l.n <= max_n)
        .map(|l| Ok((l, identify_dressed(&after, l)?.vector.inner(&moved)?)))
        .collect()
}

/// Cutoffs scanned by [`cutoff_convergence`].
pub fn cutoff_scan() -> impl Iterator<Item = FockCutoff> {
    (4..=60).step_by(2).map(FockCutoff::new)
}

/// Smallest scanned `N` whose observable agrees with the next scanned cutoff
/// to relative tolerance `tol`.
pub fn cutoff_convergence<F>(mut evaluator: F, tol: f64) -> Result<FockCutoff>
where
    F: FnMut(FockCutoff) -> Result<f64>,
{
    let scan: Vec<FockCutoff> = cutoff_scan().collect();
    let mut previous = evaluator(scan[0])?;
    let mut last_change = f64::INFINITY;
    for window in scan.windows(2) {
        let value = evaluator(window[1])?;
        let change = (value - previous).abs();
        last_change = if value == 0.0 {
            change
        } else {
            change / value.abs()
        };
        if change <= tol * value.abs() {
            return Ok(window[0]);
        }
        previous = value;
    }
    Err(DleError::NotConverged {
        first: scan[0].max_photons(),
        last: scan[scan.len() - 1].max_photons(),
        last_change,
        tol,
    })
}
