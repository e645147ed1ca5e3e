//! Closed-form first-order dressed states, second-order energies and Lamb shifts.
//!
//! Perturbed kets are kept unnormalized with coefficient 1 on the bare label;
//! the quench overlaps are built on that convention.

use std::collections::BTreeMap;

use crate::error::{DleError, Result};
use crate::hamiltonian::{CavityFrequency, SystemParams};
use crate::hilbert::{BasisLabel, FockCutoff, StateVector, C64};

/// First-order dressed ket `|n; q1 q2>_{λω}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedState {
    pub base: BasisLabel,
    pub omega: CavityFrequency,
    /// Correction coefficients; the base label (coefficient 1) is not stored.
    pub coefficients: BTreeMap<BasisLabel, f64>,
}

impl PerturbedState {
    /// Coefficient on `label`, including the implicit 1 on the base.
    pub fn coefficient(&self, label: BasisLabel) -> f64 {
        if label == self.base {
            1.0
        } else {
            self.coefficients.get(&label).copied().unwrap_or(0.0)
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        1.0 + self.coefficients.values().map(|c| c * c).sum::<f64>()
    }

    pub fn max_correction(&self) -> f64 {
        self.coefficients.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Inner product with another unnormalized perturbed ket (real coefficients).
    pub fn overlap(&self, other: &PerturbedState) -> f64 {
        let mut labels: Vec<BasisLabel> = self.coefficients.keys().copied().collect();
        labels.push(self.base);
        labels.sort();
        labels.dedup();
        labels
            .into_iter()
            .map(|l| self.coefficient(l) * other.coefficient(l))
            .sum()
    }

    pub fn to_state_vector(&self, cutoff: FockCutoff) -> Result<StateVector> {
        if cutoff.max_photons() < self.base.n + 1 {
            return Err(DleError::PhotonOutOfRange {
                n: self.base.n + 1,
                cutoff: cutoff.max_photons(),
            });
        }
        let mut v = StateVector::basis(self.base, cutoff)?;
        for (&label, &c) in &self.coefficients {
            v.set_amplitude(label, C64::new(c, 0.0))?;
        }
        Ok(v)
    }
}

/// First-order dressed ket of the stationary Hamiltonian at cavity frequency `omega`.
pub fn perturbed_state(
    label: BasisLabel,
    params: &SystemParams,
    omega: CavityFrequency,
) -> Result<PerturbedState> {
    params.check_off_resonance(omega, "omega")?;
    let lam = params.lambda();
    let minus = omega.value() - params.e0();
    let plus = omega.value() + params.e0();
    let n = label.n;
    let down = lam * (n as f64).sqrt();
    let up = lam * ((n + 1) as f64).sqrt();

    // (target label, coefficient); n−1 targets are skipped at n = 0
    let mut terms: Vec<(Option<BasisLabel>, f64)> = Vec::with_capacity(4);
    let lower = |q1, q2| (n > 0).then(|| BasisLabel::new(n - 1, q1, q2));
    let upper = |q1, q2| Some(BasisLabel::new(n + 1, q1, q2));
    match (label.q1, label.q2) {
        (0, 0) => {
            terms.push((lower(1, 0), down / minus));
            terms.push((lower(0, 1), down / minus));
            terms.push((upper(1, 0), -up / plus));
            terms.push((upper(0, 1), -up / plus));
        }
        (1, 0) | (0, 1) => {
            terms.push((lower(0, 0), down / plus));
            terms.push((upper(1, 1), -up / plus));
            terms.push((lower(1, 1), down / minus));
            terms.push((upper(0, 0), -up / minus));
        }
        _ => {
            terms.push((lower(1, 0), down / plus));
            terms.push((lower(0, 1), down / plus));
            terms.push((upper(1, 0), -up / minus));
            terms.push((upper(0, 1), -up / minus));
        }
    }
    let coefficients = terms
        .into_iter()
        .filter_map(|(l, c)| l.filter(|_| c != 0.0).map(|l| (l, c)))
        .collect();
    Ok(PerturbedState {
        base: label,
        omega,
        coefficients,
    })
}

/// Total (two-qubit) Lamb shifts: the `n`-independent second-order terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambShifts {
    pub e_l_00: f64,
    pub e_l_10: f64,
    pub e_l_01: f64,
    pub e_l_11: f64,
}

impl LambShifts {
    pub fn for_levels(&self, q1: u8, q2: u8) -> f64 {
        match (q1, q2) {
            (0, 0) => self.e_l_00,
            (1, 0) => self.e_l_10,
            (0, 1) => self.e_l_01,
            _ => self.e_l_11,
        }
    }
}

/// Each term is the sum of single-qubit shifts, `−λ²/(ω+E0)` for a ground
/// qubit and `−λ²/(ω−E0)` for an excited one, so the mixed configuration
/// carries `−2λ²ω/(ω²−E0²)`.
pub fn lamb_shifts(params: &SystemParams, omega: CavityFrequency) -> Result<LambShifts> {
    params.check_off_resonance(omega, "omega")?;
    let lam2 = params.lambda() * params.lambda();
    let w = omega.value();
    let minus = w - params.e0();
    let plus = w + params.e0();
    let mixed = -2.0 * lam2 * w / (minus * plus);
    Ok(LambShifts {
        e_l_00: -2.0 * lam2 / plus,
        e_l_10: mixed,
        e_l_01: mixed,
        e_l_11: -2.0 * lam2 / minus,
    })
}

pub fn bare_energy(label: BasisLabel, params: &SystemParams, omega: CavityFrequency) -> f64 {
    label.n as f64 * omega.value() + params.e0() * (label.q1 + label.q2) as f64
}

/// Coefficient of `n` in the second-order energy of `|n; q1 q2>`.
pub fn dressed_slope(q1: u8, q2: u8, params: &SystemParams, omega: CavityFrequency) -> f64 {
    let w = omega.value();
    let e0 = params.e0();
    let shift = 4.0 * params.lambda() * params.lambda() * e0 / ((w - e0) * (w + e0));
    match (q1, q2) {
        (0, 0) => w + shift,
        (1, 1) => w - shift,
        _ => w,
    }
}

/// Second-order energy of `|n; q1 q2>`.
pub fn perturbed_energy(
    label: BasisLabel,
    params: &SystemParams,
    omega: CavityFrequency,
) -> Result<f64> {
    let shifts = lamb_shifts(params, omega)?;
    Ok(
        label.n as f64 * dressed_slope(label.q1, label.q2, params, omega)
            + params.e0() * (label.q1 + label.q2) as f64
            + shifts.for_levels(label.q1, label.q2),
    )
}
