//! Sampling-side tools: approximate cloning, shot runs, empirical
//! distributions with goodness-of-fit assertions, and Pauli tomography.

mod assertion;
mod clone;
mod distribution;
mod shots;
mod tomography;

use thiserror::Error;

use crate::state::StateError;

pub use assertion::{assert_distribution, AssertionVerdict, Method, POOL_BELOW};
pub use clone::{approximate_clone, expected_clone_fidelity, sample_clone_measurements, shrink_factor, CloneResult, MAX_CLONE_QUBITS};
pub use distribution::{EmpiricalDistribution, ExpectedDistribution};
pub use shots::{creg_key, run_shots, run_shots_logged};
pub use tomography::{pauli_settings, tomography, TomographyEstimate, TomographyMode, MAX_TOMOGRAPHY_QUBITS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("subset of {m} qubits exceeds the limit of {max}")]
    Size { m: usize, max: usize },
    #[error(
        "subset is entangled with the rest of the register (sigma2 = {sigma2:e}); pass the override flag to estimate the reduced state"
    )]
    NotSeparable { sigma2: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("outcome `{0}` was observed but has zero expected probability")]
    DomainMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
