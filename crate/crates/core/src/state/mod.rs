//! Exact dense statevector simulation.
//!
//! Bit `k` of an amplitude index is the value of qubit `q[k]`. Bitstrings are
//! printed with `q[0]` leftmost, so `x q[1]` on three qubits prints `010`.

mod density;
mod gates;
mod vector;

use thiserror::Error;

pub use density::DensityMatrix;
pub use gates::{GateKind, GateMatrix};
pub(crate) use vector::gather_bits;
pub use vector::{MeasurementRecord, StateVector};

/// Largest register the simulator accepts (2^26 amplitudes, 1 GiB).
pub const MAX_QUBITS: usize = 26;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    Size(usize),
    #[error("size mismatch: {0} vs {1} qubits")]
    SizeMismatch(usize, usize),
    #[error("bitstring `{0}` does not describe the register")]
    Bits(String),
    #[error("invalid gate targets {targets:?}: {reason}")]
    Target { targets: Vec<usize>, reason: &'static str },
    #[error("state norm {0} deviates from 1")]
    DegenerateState(f64),
    #[error("invalid qubit subset {subset:?}: {reason}")]
    Subset { subset: Vec<usize>, reason: &'static str },
    #[error("outcome {outcome} on qubit {qubit} has probability {probability:e}")]
    ImpossibleOutcome { qubit: usize, outcome: u8, probability: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("malformed state dump, line {line}: {reason}")]
    Dump { line: usize, reason: String },
}

/// Display-order bitstring (`q[0]` first) for the low `n` bits of `index`.
pub fn bitstring(index: usize, n: usize) -> String {
    (0..n).map(|k| if index >> k & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`bitstring`].
pub fn parse_bitstring(bits: &str) -> Option<usize> {
    let mut idx = 0usize;
    for (k, c) in bits.chars().enumerate() {
        match c {
            '0' => {}
            '1' => idx |= 1 << k,
            _ => return None,
        }
    }
    Some(idx)
}

/// Checks `subset` is non-empty, duplicate-free and within `n` qubits.
pub(crate) fn check_subset(subset: &[usize], n: usize) -> Result<(), StateError> {
    let bad = |reason| StateError::Subset {
        subset: subset.to_vec(),
        reason,
    };
    if subset.is_empty() {
        return Err(bad("empty"));
    }
    for (i, &q) in subset.iter().enumerate() {
        if q >= n {
            return Err(bad("qubit out of range"));
        }
        if subset[..i].contains(&q) {
            return Err(bad("duplicate qubit"));
        }
    }
    Ok(())
}

/// Qubits in `0..n` not in `subset`, ascending.
pub fn complement(subset: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|q| !subset.contains(q)).collect()
}
