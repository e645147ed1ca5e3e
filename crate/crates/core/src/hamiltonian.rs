//! Stationary two-qubit Rabi Hamiltonian and the nonstationary squeezing drive.
//!
//! `H = H0 + V_total` with
//! `H0 = E0 Σ_j (1 + σ3_j)/2 + ω a†a` and `V_total = λ Σ_j (σ+_j + σ-_j)(a + a†)`.
//! `V_total` splits into the excitation-conserving part `λ Σ_j (σ+_j a + σ-_j a†)`
//! and the counter-rotating part `λ Σ_j (σ+_j a† + σ-_j a)`. A time-dependent
//! cavity frequency adds `i (ω̇ / 4ω)(a² − a†²)`. Units: ħ = 1, all frequencies
//! in one consistent angular unit.

use log::warn;

use crate::error::{DleError, Result};
use crate::hilbert::{build_operator, FockCutoff, OperatorKind, OperatorMatrix, C64};
use crate::linalg::expm_hermitian;

/// Default relative resonance guard: `|ω − E0| < 1e-9 · E0` is rejected.
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-9;

/// Qubit gap `E0` and coupling `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    e0: f64,
    lambda: f64,
    resonance_tol: f64,
}

impl SystemParams {
    pub fn new(e0: f64, lambda: f64) -> Result<Self> {
        if !(e0.is_finite() && e0 > 0.0) {
            return Err(DleError::invalid(
                "e0",
                format!("must be positive, got {e0}"),
            ));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(DleError::invalid(
                "lambda",
                format!("must be non-negative, got {lambda}"),
            ));
        }
        if lambda / e0 >= 1.0 {
            return Err(DleError::invalid(
                "lambda",
                format!("lambda/e0 = {} must be below 1", lambda / e0),
            ));
        }
        if lambda / e0 > 0.5 {
            warn!(
                "lambda/e0 = {:.3} is far outside the perturbative regime",
                lambda / e0
            );
        }
        Ok(SystemParams {
            e0,
            lambda,
            resonance_tol: DEFAULT_RESONANCE_TOL,
        })
    }

    pub fn with_resonance_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(DleError::invalid(
                "tol-resonance",
                format!("must be non-negative, got {tol}"),
            ));
        }
        self.resonance_tol = tol;
        Ok(self)
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        SystemParams::new(self.e0, lambda)?.with_resonance_tolerance(self.resonance_tol)
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn resonance_tol(&self) -> f64 {
        self.resonance_tol
    }

    /// Rejects `ω` closer to `E0` than the resonance tolerance. `name` is the
    /// parameter reported in the error.
    pub fn check_off_resonance(&self, omega: CavityFrequency, name: &'static str) -> Result<()> {
        if (omega.value() - self.e0).abs() < self.resonance_tol * self.e0 {
            return Err(DleError::NearResonance {
                name,
                omega: omega.value(),
                e0: self.e0,
                tol: self.resonance_tol,
            });
        }
        Ok(())
    }
}

/// Cavity mode angular frequency, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CavityFrequency(f64);

impl CavityFrequency {
    pub fn new(omega: f64) -> Result<Self> {
        Self::named(omega, "omega")
    }

    /// Like [`CavityFrequency::new`], reporting `name` on error.
    pub fn named(omega: f64, name: &'static str) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(DleError::invalid(
                name,
                format!("must be positive, got {omega}"),
            ));
        }
        Ok(CavityFrequency(omega))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionVariant {
    /// `λ Σ_j (σ+_j + σ-_j)(a + a†)`
    Total,
    /// `λ Σ_j (σ+_j a + σ-_j a†)`
    Rwa,
    /// `λ Σ_j (σ+_j a† + σ-_j a)`
    Counter,
}

/// Bare Hamiltonian, diagonal with `E0 (q1 + q2) + ω n`.
pub fn h0(params: &SystemParams, omega: CavityFrequency, cutoff: FockCutoff) -> OperatorMatrix {
    let (e0, w) = (params.e0(), omega.value());
    OperatorMatrix::diagonal(cutoff, |l| {
        C64::new(e0 * (l.q1 + l.q2) as f64 + w * l.n as f64, 0.0)
    })
    .into_hermitian(0.0)
    .expect("real diagonal matrix is Hermitian")
}

pub fn interaction(
    params: &SystemParams,
    cutoff: FockCutoff,
    variant: InteractionVariant,
) -> OperatorMatrix {
    let op = |kind| build_operator(kind, cutoff).expect("qubit index is 1 or 2");
    let a = op(OperatorKind::Annihilate);
    let ad = op(OperatorKind::Create);
    let mut v = OperatorMatrix::zeros(cutoff);
    for j in 1..=2 {
        let sp = op(OperatorKind::SigmaPlus(j));
        let sm = op(OperatorKind::SigmaMinus(j));
        let terms = match variant {
            InteractionVariant::Rwa => vec![(sp, a.clone()), (sm, ad.clone())],
            InteractionVariant::Counter => vec![(sp, ad.clone()), (sm, a.clone())],
            InteractionVariant::Total => {
                let x = a.sum(&ad).expect("same cutoff");
                let sx = sp.sum(&sm).expect("same cutoff");
                vec![(sx, x)]
            }
        };
        for (qubit, field) in terms {
            v = v
                .sum(&qubit.product(&field).expect("same cutoff"))
                .expect("same cutoff");
        }
    }
    v.scaled(C64::new(params.lambda(), 0.0))
        .into_hermitian(1e-14)
        .expect("interaction is Hermitian")
}

/// Stationary Hamiltonian `H0 + V_total`.
pub fn h_static(
    params: &SystemParams,
    omega: CavityFrequency,
    cutoff: FockCutoff,
) -> OperatorMatrix {
    h0(params, omega, cutoff)
        .sum(&interaction(params, cutoff, InteractionVariant::Total))
        .expect("same cutoff")
}

/// Hermitian generator `i (a² − a†²)` of the frequency-change drive.
pub fn drive_generator(cutoff: FockCutoff) -> OperatorMatrix {
    let a = build_operator(OperatorKind::Annihilate, cutoff).expect("no qubit index");
    let ad = a.adjoint();
    let a2 = a.product(&a).expect("same cutoff");
    let ad2 = ad.product(&ad).expect("same cutoff");
    a2.difference(&ad2)
        .expect("same cutoff")
        .scaled(C64::new(0.0, 1.0))
        .into_hermitian(1e-14)
        .expect("i(a^2 - a^dag^2) is Hermitian")
}

/// Drive term `i (ω̇ / 4ω)(a² − a†²)`.
pub fn drive_term(omega: CavityFrequency, omega_dot: f64, cutoff: FockCutoff) -> OperatorMatrix {
    drive_generator(cutoff).scaled(C64::new(omega_dot / (4.0 * omega.value()), 0.0))
}

/// Propagator of the drive term across an instantaneous jump `ω_from → ω_to`.
///
/// The drive integrates to `∫ ω̇/(4ω) dt = ln(ω_to/ω_from)/4` independently of
/// the ramp shape, so the jump acts as `exp(ln(ω_to/ω_from)/4 · (a² − a†²))`.
pub fn frequency_jump_unitary(
    omega_from: CavityFrequency,
    omega_to: CavityFrequency,
    cutoff: FockCutoff,
) -> Result<OperatorMatrix> {
    let zeta = (omega_to.value() / omega_from.value()).ln() / 4.0;
    let u = expm_hermitian(drive_generator(cutoff).matrix(), zeta)?;
    OperatorMatrix::from_matrix(cutoff, u)
}
