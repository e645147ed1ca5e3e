//! Pure-state concurrence and conditional concurrences at fixed created-photon number.

use crate::error::{DleError, Result};
use crate::hamiltonian::SystemParams;
use crate::hilbert::{BasisLabel, StateVector, C64};
use crate::quench::{quench_amplitudes, AmplitudeSet, QuenchSpec};

/// `a|00> + b|01> + c|10> + d|11>`, first bit = qubit 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitPureState {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl TwoQubitPureState {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        TwoQubitPureState { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        let z = |x| C64::new(x, 0.0);
        TwoQubitPureState::new(z(a), z(b), z(c), z(d))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Unit-norm copy; the zero state is returned unchanged.
    pub fn normalized(&self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return *self;
        }
        TwoQubitPureState::new(self.a / norm, self.b / norm, self.c / norm, self.d / norm)
    }

    pub fn concurrence(&self) -> f64 {
        concurrence(self)
    }
}

/// `C = 2|ad − bc|`.
pub fn concurrence(state: &TwoQubitPureState) -> f64 {
    2.0 * (state.a * state.d - state.b * state.c).norm()
}

/// Whether a photon sector is renormalized before evaluating the concurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conditioning {
    /// Raw amplitudes, no renormalization.
    #[default]
    Raw,
    /// Sector divided by its norm.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceReport {
    /// one created photon
    pub c_1: f64,
    /// two created photons
    pub c_2: f64,
    /// No created photons, with the vacuum amplitude taken at its leading
    /// value 1. Extrapolated; there is no closed form for this sector.
    pub c_0_leading: f64,
    pub conditioning: Conditioning,
}

/// Leading-order two-qubit state in photon sector `n ∈ {0, 1, 2}`.
pub fn perturbative_sector_state(amps: &AmplitudeSet, n: usize) -> Option<TwoQubitPureState> {
    match n {
        0 => Some(TwoQubitPureState::real(1.0, 0.0, 0.0, amps.a_0_11)),
        1 => Some(TwoQubitPureState::real(0.0, amps.a_1_01, amps.a_1_10, 0.0)),
        2 => Some(TwoQubitPureState::real(amps.a_2_00, 0.0, 0.0, amps.a_2_11)),
        _ => None,
    }
}

pub fn conditional_concurrences(
    params: &SystemParams,
    quench: &QuenchSpec,
    conditioning: Conditioning,
) -> Result<ConcurrenceReport> {
    let amps = quench_amplitudes(params, quench)?;
    let report = match conditioning {
        Conditioning::Raw => {
            let lam = params.lambda();
            let e0 = params.e0();
            let (w1, w2) = (quench.omega1.value(), quench.omega2.value());
            let diff = 1.0 / (w2 + e0) - 1.0 / (w1 + e0);
            let lam2 = lam * lam;
            ConcurrenceReport {
                c_1: 2.0 * lam2 * diff * diff,
                c_2: 16.0 * lam2 * lam2 / ((w1 + e0).powi(2) * ((w2 - e0) * (w2 + e0)).abs()),
                c_0_leading: 2.0 * amps.a_0_11.abs(),
                conditioning,
            }
        }
        Conditioning::Normalized => {
            let sector = |n| {
                perturbative_sector_state(&amps, n)
                    .expect("sectors 0..=2 exist")
                    .normalized()
                    .concurrence()
            };
            ConcurrenceReport {
                c_1: sector(1),
                c_2: sector(2),
                c_0_leading: sector(0),
                conditioning,
            }
        }
    };
    Ok(report)
}

/// Two-qubit amplitudes of a photon sector together with its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorState {
    pub state: TwoQubitPureState,
    /// Squared norm of the sector before any normalization.
    pub weight: f64,
}

/// Projects `full` onto the `n`-photon sector.
pub fn sector_state(
    full: &StateVector,
    n: usize,
    conditioning: Conditioning,
) -> Result<SectorState> {
    let top = full.cutoff().max_photons();
    if n > top {
        return Err(DleError::PhotonOutOfRange { n, cutoff: top });
    }
    let amp = |q1, q2| full.amplitude(BasisLabel::new(n, q1, q2));
    let raw = TwoQubitPureState::new(amp(0, 0), amp(0, 1), amp(1, 0), amp(1, 1));
    let weight = raw.norm_sqr();
    let state = match conditioning {
        Conditioning::Raw => raw,
        Conditioning::Normalized => raw.normalized(),
    };
    Ok(SectorState { state, weight })
}
