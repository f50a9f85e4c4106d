use serde::Serialize;

use super::{EmpiricalDistribution, StatsError};
use crate::rng::{sample_index, CounterRng};
use crate::state::{bitstring, DensityMatrix, StateVector};
use crate::wire::{serialize_density, serialize_opt_density, Num17};

pub const MAX_CLONE_QUBITS: usize = 3;

/// `eta = (d + 2) / (2 (d + 1))` for a subsystem of dimension `d`.
pub fn shrink_factor(d: usize) -> f64 {
    let d = d as f64;
    (d + 2.0) / (2.0 * (d + 1.0))
}

/// `(d + 3) / (2 (d + 1))`, the fidelity of either clone with a pure input.
pub fn expected_clone_fidelity(d: usize) -> f64 {
    let d = d as f64;
    (d + 3.0) / (2.0 * (d + 1.0))
}

/// Marginal produced by a universal symmetric 1 -> 2 cloner on a subsystem.
#[derive(Debug, Clone, Serialize)]
pub struct CloneResult {
    pub subset: Vec<usize>,
    #[serde(serialize_with = "serialize_density")]
    pub clone: DensityMatrix,
    pub shrink_factor: Num17,
    pub expected_fidelity: Num17,
    /// Degraded marginal left on the original qubits when the cloner is
    /// modelled physically; absent when the original is kept intact.
    #[serde(serialize_with = "serialize_opt_density", skip_serializing_if = "Option::is_none")]
    pub original_marginal: Option<DensityMatrix>,
}

impl CloneResult {
    /// Fidelity `<psi| clone |psi>` with a pure state on the subset.
    pub fn fidelity_with(&self, psi: &StateVector) -> Result<f64, StatsError> {
        Ok(self.clone.expectation(psi)?)
    }

    /// Also reports the original's marginal, which a symmetric cloner
    /// degrades exactly like the copy.
    pub fn with_physical_original(mut self) -> Self {
        self.original_marginal = Some(self.clone.clone());
        self
    }
}

/// Clones the reduced state of `subset` without touching `s`.
pub fn approximate_clone(s: &StateVector, subset: &[usize]) -> Result<CloneResult, StatsError> {
    if subset.len() > MAX_CLONE_QUBITS {
        return Err(StatsError::Size {
            m: subset.len(),
            max: MAX_CLONE_QUBITS,
        });
    }
    let rho = s.partial_trace(subset)?;
    let d = rho.dim();
    let eta = shrink_factor(d);
    Ok(CloneResult {
        subset: subset.to_vec(),
        clone: rho.shrink(eta),
        shrink_factor: Num17(eta),
        expected_fidelity: Num17(expected_clone_fidelity(d)),
        original_marginal: None,
    })
}

/// Computational-basis samples of the clone. Bitstrings list the subset's
/// qubits in the order given.
pub fn sample_clone_measurements(c: &CloneResult, n_samples: u64, seed: u64) -> Result<EmpiricalDistribution, StatsError> {
    if n_samples == 0 {
        return Err(StatsError::InvalidParameter("n_samples must be at least 1".into()));
    }
    let probs = c.clone.diagonal();
    let rng = CounterRng::new(seed);
    let m = c.subset.len();
    EmpiricalDistribution::from_outcomes(
        (0..n_samples).map(|i| bitstring(sample_index(&probs, rng.uniform(i)), m)),
        Some(seed),
    )
}
