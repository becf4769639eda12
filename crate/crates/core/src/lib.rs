//! Density-matrix vectorization (DMV) for quantum error mitigation.
//!
//! A noisy n-qubit density matrix `rho` is read as a 2n-qubit pure state
//! `|rho> = vec(rho) / sqrt(Tr rho^2)`. Linear combinations of such states
//! are evaluated on hardware through two-copy measurements of substitute
//! operators, so expectation values of the encoded state are recovered from
//! noisy preparations without ever preparing it.
//!
//! The crate is `no_std` (with `alloc`). File formats, the CLI and parallel
//! sweeps live in the companion `dmv` crate.

#![no_std]

extern crate alloc;

pub mod ansatz;
pub mod circuit;
pub mod dmv;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod pauli;
pub mod stabilizer;
pub mod substitute;
pub mod vqe;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use circuit::{DensityMatrix, Gate, GateKind, NoiseModel, QuantumCircuit};
pub use dmv::{DMVEnsemble, DMVPureState, ExactEvaluator};
pub use error::{Error, Result};
pub use estimator::{EstimatorConfig, TermEstimate};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use substitute::{SubstituteBlock, SubstituteOperator, SubstituteSum};
