//! Sudden cavity-frequency quench `ω1 → ω2`: leading-order amplitudes from the
//! dressed vacuum and the dynamical-Lamb-effect probabilities built from them.

use crate::error::Result;
use crate::hamiltonian::{CavityFrequency, SystemParams};
use crate::hilbert::{BasisLabel, FockCutoff, StateVector, C64};
use crate::perturbation::lamb_shifts;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchSpec {
    pub omega1: CavityFrequency,
    pub omega2: CavityFrequency,
}

impl QuenchSpec {
    pub fn new(omega1: f64, omega2: f64) -> Result<Self> {
        Ok(QuenchSpec {
            omega1: CavityFrequency::named(omega1, "omega1")?,
            omega2: CavityFrequency::named(omega2, "omega2")?,
        })
    }
}

/// Final dressed labels carrying a leading-order amplitude.
pub const TARGET_LABELS: [BasisLabel; 5] = [
    BasisLabel::new(1, 1, 0),
    BasisLabel::new(1, 0, 1),
    BasisLabel::new(0, 1, 1),
    BasisLabel::new(2, 1, 1),
    BasisLabel::new(2, 0, 0),
];

/// Amplitudes `<n; q1 q2|_{ω2} |0; 00>_{ω1}` for the five leading channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSet {
    /// one qubit excited, one photon
    pub a_1_10: f64,
    pub a_1_01: f64,
    /// both qubits excited, no photon
    pub a_0_11: f64,
    /// both qubits excited, two photons
    pub a_2_11: f64,
    /// no qubit excited, two photons
    pub a_2_00: f64,
}

impl AmplitudeSet {
    pub fn get(&self, label: BasisLabel) -> Option<f64> {
        match (label.n, label.q1, label.q2) {
            (1, 1, 0) => Some(self.a_1_10),
            (1, 0, 1) => Some(self.a_1_01),
            (0, 1, 1) => Some(self.a_0_11),
            (2, 1, 1) => Some(self.a_2_11),
            (2, 0, 0) => Some(self.a_2_00),
            _ => None,
        }
    }

    /// Values in [`TARGET_LABELS`] order.
    pub fn values(&self) -> [f64; 5] {
        [
            self.a_1_10,
            self.a_1_01,
            self.a_0_11,
            self.a_2_11,
            self.a_2_00,
        ]
    }

    /// Final state in the `ω2` dressed basis to leading order, with amplitude 1
    /// left on the vacuum. Needs `N >= 2`.
    pub fn final_state(&self, cutoff: FockCutoff) -> Result<StateVector> {
        let cutoff = cutoff.require_quench()?;
        let mut v = StateVector::basis(BasisLabel::new(0, 0, 0), cutoff)?;
        for (label, amp) in TARGET_LABELS.iter().zip(self.values()) {
            v.set_amplitude(*label, C64::new(amp, 0.0))?;
        }
        Ok(v)
    }
}

pub fn quench_amplitudes(params: &SystemParams, quench: &QuenchSpec) -> Result<AmplitudeSet> {
    params.check_off_resonance(quench.omega2, "omega2")?;
    let lam = params.lambda();
    let e0 = params.e0();
    let (w1, w2) = (quench.omega1.value(), quench.omega2.value());
    let one = lam * (1.0 / (w2 + e0) - 1.0 / (w1 + e0));
    let two = 2.0 * lam * lam / (w1 + e0);
    Ok(AmplitudeSet {
        a_1_10: one,
        a_1_01: one,
        a_0_11: two / (w2 - e0),
        a_2_11: -std::f64::consts::SQRT_2 * two / (w2 + e0),
        a_2_00: -std::f64::consts::SQRT_2 * two / (w2 - e0),
    })
}

/// Excitation probabilities of one qubit (`w_10`, `w_01`) and of both (`w_11`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DleProbabilities {
    pub w_10: f64,
    pub w_01: f64,
    pub w_11: f64,
    /// Set when a probability exceeds 1; values are never clamped.
    pub validity_warning: bool,
}

pub fn dle_probabilities(params: &SystemParams, quench: &QuenchSpec) -> Result<DleProbabilities> {
    let a = quench_amplitudes(params, quench)?;
    Ok(probabilities_from(&a))
}

pub fn probabilities_from(a: &AmplitudeSet) -> DleProbabilities {
    let w_10 = a.a_1_10 * a.a_1_10;
    let w_01 = a.a_1_01 * a.a_1_01;
    let w_11 = a.a_0_11 * a.a_0_11 + a.a_2_11 * a.a_2_11;
    DleProbabilities {
        w_10,
        w_01,
        w_11,
        validity_warning: w_10 > 1.0 || w_01 > 1.0 || w_11 > 1.0,
    }
}

/// `w_10 = (δE_L00 / 2λ)²` with `δE_L00 = E_L00(ω2) − E_L00(ω1)`.
pub fn w_10_from_lamb_shifts(params: &SystemParams, quench: &QuenchSpec) -> Result<f64> {
    params.check_off_resonance(quench.omega1, "omega1")?;
    params.check_off_resonance(quench.omega2, "omega2")?;
    let lam = params.lambda();
    if lam == 0.0 {
        return Ok(0.0);
    }
    let before = lamb_shifts(params, quench.omega1)?;
    let after = lamb_shifts(params, quench.omega2)?;
    let delta = after.e_l_00 - before.e_l_00;
    Ok((delta / (2.0 * lam)).powi(2))
}

/// `w_11 = E_L00(ω1)² [ (E_L11(ω2)/2λ²)² + 2 (E_L00(ω2)/2λ²)² ]`.
pub fn w_11_from_lamb_shifts(params: &SystemParams, quench: &QuenchSpec) -> Result<f64> {
    params.check_off_resonance(quench.omega1, "omega1")?;
    params.check_off_resonance(quench.omega2, "omega2")?;
    let lam2 = params.lambda() * params.lambda();
    if lam2 == 0.0 {
        return Ok(0.0);
    }
    let before = lamb_shifts(params, quench.omega1)?;
    let after = lamb_shifts(params, quench.omega2)?;
    let scale = 2.0 * lam2;
    Ok(before.e_l_00.powi(2)
        * ((after.e_l_11 / scale).powi(2) + 2.0 * (after.e_l_00 / scale).powi(2)))
}
