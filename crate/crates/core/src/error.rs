use thiserror::Error;

use crate::hilbert::BasisLabel;

pub type Result<T> = std::result::Result<T, DleError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DleError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("`{name}` = {omega} is within the resonance tolerance of E0 = {e0} (|{name} - E0| < {tol:e} * E0)")]
    NearResonance {
        name: &'static str,
        omega: f64,
        e0: f64,
        tol: f64,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator flagged Hermitian has residual max|M - M^dag| = {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("invalid qubit index {0} (expected 1 or 2)")]
    InvalidQubit(usize),

    #[error("photon number {n} exceeds cutoff {cutoff}")]
    PhotonOutOfRange { n: usize, cutoff: usize },

    #[error("dressed-state assignment failed for {label}: overlap with bare state {overlap:.6} <= 1/sqrt(2)")]
    AssignmentFailed { label: BasisLabel, overlap: f64 },

    #[error(
        "cutoff {cutoff} unconverged: `{quantity}` changed by {change:.3e} going to cutoff {next}"
    )]
    CutoffUnconverged {
        quantity: &'static str,
        cutoff: usize,
        next: usize,
        change: f64,
    },

    #[error("not converged over cutoff scan {first}..={last} (last relative change {last_change:.3e}, tol {tol:.1e})")]
    NotConverged {
        first: usize,
        last: usize,
        last_change: f64,
        tol: f64,
    },

    #[error(
        "cutoff leakage: top Fock level weight {weight:.3e} at t = {time:.6e} exceeds {bound:.1e}"
    )]
    CutoffLeakage { weight: f64, time: f64, bound: f64 },

    #[error("norm drift {drift:.3e} at t = {time:.6e} exceeds bound {bound:.1e}")]
    NormDrift { drift: f64, time: f64, bound: f64 },

    #[error("step size underflow at t = {time:.6e} (h = {step:.3e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

impl DleError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        DleError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
