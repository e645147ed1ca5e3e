//! Dynamical Lamb effect and quench-induced entanglement of two qubits coupled
//! to a single cavity mode whose frequency changes suddenly.
//!
//! Closed-form perturbative amplitudes ([`quench`], [`entanglement`]) are
//! cross-checked against exact diagonalization ([`oracle`]) and time-domain
//! integration of the nonstationary Hamiltonian ([`dynamics`]).

pub mod cli;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
mod linalg;
pub mod oracle;
pub mod perturbation;
pub mod quench;

pub use error::{DleError, Result};
pub use hamiltonian::{CavityFrequency, SystemParams};
pub use hilbert::{BasisLabel, FockCutoff, OperatorMatrix, StateVector};
pub use quench::QuenchSpec;
