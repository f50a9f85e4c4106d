//! White-box checks over a live pure state: superposition, separability,
//! factorisation into unentangled blocks, classical descriptions built from
//! the provenance log, and regeneration.
//!
//! Separability is decided exactly for the global pure state through Schmidt
//! coefficients of the reshaped amplitude matrix. Mixed-state separability is
//! not attempted.

use itertools_lite::combinations;
use num_complex::Complex64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::provenance::{self, Provenance, ProvenanceEvent, ReplayError};
use crate::state::{bitstring, check_subset, complement, GateKind, MeasurementRecord, StateError, StateVector};
use crate::wire::{serialize_state, Num17};

/// Schmidt threshold below which a cut counts as separable.
pub const SEPARABILITY_TOL: f64 = 1e-9;
/// Support entries at or below this probability are ignored.
pub const DEFAULT_TOL_SUP: f64 = 1e-6;
/// A factor is a basis state when one amplitude has at least this magnitude.
pub const BASIS_MAGNITUDE: f64 = 1.0 - 1e-9;
/// Budget of Schmidt evaluations spent searching for a minimal block before
/// falling back to greedy growth.
const BLOCK_SEARCH_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InspectError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

/// `true`, `false`, or undecidable because the subset is entangled with the
/// rest of the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Superposition {
    Yes,
    No,
    IndeterminateEntangled,
}

impl Serialize for Superposition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Superposition::Yes => s.serialize_bool(true),
            Superposition::No => s.serialize_bool(false),
            Superposition::IndeterminateEntangled => s.serialize_str("indeterminate-entangled"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportEntry {
    pub bits: String,
    pub probability: Num17,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperpositionReport {
    pub subset: Vec<usize>,
    pub separable_from_rest: bool,
    pub in_superposition: Superposition,
    /// Second Schmidt coefficient across `(subset, rest)`; 0 for the full register.
    pub sigma2: Num17,
    /// Basis states of the factor with probability above the threshold.
    pub support: Vec<SupportEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityReport {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub separable: bool,
    pub sigma2: Num17,
}

#[derive(Debug, Clone, Serialize)]
pub struct Block {
    pub qubits: Vec<usize>,
    #[serde(serialize_with = "serialize_state")]
    pub state: StateVector,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationReport {
    pub blocks: Vec<Block>,
    /// Largest second Schmidt coefficient among the cuts accepted as blocks.
    pub residual: Num17,
    /// Fidelity between the tensor product of the blocks and the input.
    pub reconstruction_fidelity: Num17,
}

impl FactorizationReport {
    pub fn block_qubits(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.qubits.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceOp {
    pub gate: GateKind,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcedOutcome {
    /// Number of trace operations applied before this outcome.
    pub position: usize,
    #[serde(flatten)]
    pub record: MeasurementRecord,
    /// Reset: after the projection an X is applied when the outcome was 1.
    pub reset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockBasis {
    pub qubits: Vec<usize>,
    /// Basis bitstring (block qubit order) or `"non-classical"`.
    pub basis: String,
}

pub const NON_CLASSICAL: &str = "non-classical";

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalDescription {
    /// Initial basis state with leading X gates on untouched qubits folded in.
    pub initial_bits: String,
    pub operator_trace: Vec<TraceOp>,
    pub forced_outcomes: Vec<ForcedOutcome>,
    pub per_block_basis: Vec<BlockBasis>,
    /// Fidelity between replaying this description and the live state.
    pub replay_fidelity: Num17,
}

impl ClassicalDescription {
    /// Rebuilds the state from `initial_bits`, the trace and forced outcomes.
    pub fn replay(&self) -> Result<StateVector, InspectError> {
        let n = self.initial_bits.len();
        let mut s = StateVector::basis(n, &self.initial_bits)?;
        let mut outcomes = self.forced_outcomes.iter().peekable();
        for pos in 0..=self.operator_trace.len() {
            while let Some(f) = outcomes.next_if(|f| f.position == pos) {
                provenance::force(&mut s, f.record.qubit, f.record.outcome)?;
                if f.reset && f.record.outcome == 1 {
                    s.apply_gate_mut(&GateKind::X.matrix(&[]), &[f.record.qubit])?;
                }
            }
            if let Some(op) = self.operator_trace.get(pos) {
                s.apply_gate_mut(&op.gate.matrix(&op.params), &op.qubits)?;
            }
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegenerationReport {
    pub fidelity: Num17,
    pub events_replayed: usize,
}

fn sigma2_of(sv: &[f64]) -> f64 {
    sv.get(1).copied().unwrap_or(0.0)
}

fn sigma2_across(s: &StateVector, subset: &[usize]) -> Result<f64, StateError> {
    let rest = complement(subset, s.num_qubits());
    if rest.is_empty() {
        return Ok(0.0);
    }
    Ok(sigma2_of(&s.schmidt(subset, &rest)?))
}

/// Factor on `subset` of a state that is a product across `(subset, rest)`:
/// the largest column of the reshaped amplitude matrix, normalised, with the
/// first dominant amplitude rotated to be real and positive.
fn extract_factor(s: &StateVector, subset: &[usize]) -> StateVector {
    let rest = complement(subset, s.num_qubits());
    let m = s.reshape(subset, &rest);
    let best = (0..m.ncols())
        .max_by(|&a, &b| m.column(a).norm_squared().total_cmp(&m.column(b).norm_squared()))
        .unwrap_or(0);
    let col: Vec<Complex64> = m.column(best).iter().copied().collect();
    let norm = col.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let peak = col.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let anchor = col
        .iter()
        .find(|a| a.norm() >= peak - 1e-9)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = anchor.conj() / anchor.norm();
    let amps = col.into_iter().map(|a| a * phase / norm).collect();
    StateVector::from_amplitudes(amps).expect("normalised factor")
}

/// Superposition check for `subset`. Only decidable when the subset is
/// unentangled with the rest; then the factor's support decides it.
pub fn check_superposition(s: &StateVector, subset: &[usize], tol_sup: f64) -> Result<SuperpositionReport, InspectError> {
    check_subset(subset, s.num_qubits())?;
    let sigma2 = sigma2_across(s, subset)?;
    if sigma2 >= SEPARABILITY_TOL {
        return Ok(SuperpositionReport {
            subset: subset.to_vec(),
            separable_from_rest: false,
            in_superposition: Superposition::IndeterminateEntangled,
            sigma2: Num17(sigma2),
            support: Vec::new(),
        });
    }
    let factor = extract_factor(s, subset);
    let support: Vec<SupportEntry> = factor
        .probabilities()
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > tol_sup)
        .map(|(x, p)| SupportEntry {
            bits: bitstring(x, subset.len()),
            probability: Num17(p),
        })
        .collect();
    Ok(SuperpositionReport {
        subset: subset.to_vec(),
        separable_from_rest: true,
        in_superposition: if support.len() >= 2 {
            Superposition::Yes
        } else {
            Superposition::No
        },
        sigma2: Num17(sigma2),
        support,
    })
}

/// Pure-state separability across `a | b`: true iff the second Schmidt
/// coefficient is below `tol`.
pub fn is_separable(s: &StateVector, a: &[usize], b: &[usize], tol: f64) -> Result<SeparabilityReport, InspectError> {
    let sv = s.schmidt(a, b)?;
    let sigma2 = sigma2_of(&sv);
    Ok(SeparabilityReport {
        a: a.to_vec(),
        b: b.to_vec(),
        separable: sigma2 < tol,
        sigma2: Num17(sigma2),
    })
}

/// Finest partition of the register into mutually unentangled blocks.
///
/// Qubits whose reduced state is pure become singleton blocks. For every
/// other qubit, lowest index first, the smallest separable set containing it
/// (ties broken lexicographically) among the still unassigned qubits becomes
/// its block. If the search budget runs out, the block grows greedily by
/// adding the lowest unassigned index until it separates.
pub fn factor_state(s: &StateVector, tol: f64) -> Result<FactorizationReport, InspectError> {
    let n = s.num_qubits();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut residual: f64 = 0.0;
    let mut remaining = Vec::new();
    for q in 0..n {
        let purity = s.partial_trace(&[q])?.purity();
        if purity >= 1.0 - tol && n > 1 {
            residual = residual.max(sigma2_across(s, &[q])?);
            blocks.push(vec![q]);
        } else {
            remaining.push(q);
        }
    }

    while let Some(&q) = remaining.first() {
        let (block, sigma2) = minimal_block(s, q, &remaining, tol)?;
        residual = residual.max(sigma2);
        remaining.retain(|r| !block.contains(r));
        blocks.push(block);
    }
    blocks.sort_by_key(|b| b[0]);

    let factored: Vec<(Vec<usize>, StateVector)> = blocks
        .into_iter()
        .map(|b| {
            let f = extract_factor(s, &b);
            (b, f)
        })
        .collect();
    let rebuilt = StateVector::from_blocks(n, &factored)?;
    let fid = rebuilt.fidelity(s)?;
    Ok(FactorizationReport {
        blocks: factored.into_iter().map(|(qubits, state)| Block { qubits, state }).collect(),
        residual: Num17(residual),
        reconstruction_fidelity: Num17(fid),
    })
}

fn minimal_block(s: &StateVector, q: usize, remaining: &[usize], tol: f64) -> Result<(Vec<usize>, f64), InspectError> {
    let others: Vec<usize> = remaining.iter().copied().filter(|&r| r != q).collect();
    let mut budget = BLOCK_SEARCH_BUDGET;
    // singletons were settled by the purity pass, start from pairs
    for extra in 1..others.len() {
        for comb in combinations(&others, extra) {
            if budget == 0 {
                return greedy_block(s, q, remaining, tol);
            }
            budget -= 1;
            let mut cand = vec![q];
            cand.extend(comb);
            let sigma2 = sigma2_across(s, &cand)?;
            if sigma2 < tol {
                return Ok((cand, sigma2));
            }
        }
    }
    // the unassigned qubits together are always separable from settled blocks
    let all = remaining.to_vec();
    let sigma2 = sigma2_across(s, &all)?;
    Ok((all, sigma2))
}

fn greedy_block(s: &StateVector, q: usize, remaining: &[usize], tol: f64) -> Result<(Vec<usize>, f64), InspectError> {
    let mut block = vec![q];
    for &r in remaining.iter().filter(|&&r| r != q) {
        block.push(r);
        let sigma2 = sigma2_across(s, &block)?;
        if sigma2 < tol {
            return Ok((block, sigma2));
        }
    }
    let sigma2 = sigma2_across(s, &block)?;
    Ok((block, sigma2))
}

/// Classical description of the live state: the (folded) initial basis
/// state, executed operators, forced outcomes, and which blocks of the
/// current state are basis states up to phase.
pub fn classical_description(prov: &Provenance, live: &StateVector) -> Result<ClassicalDescription, InspectError> {
    let init = prov.initial_bits().ok_or(ReplayError::Unavailable)?;
    let n = init.len();
    if n != live.num_qubits() {
        return Err(StateError::SizeMismatch(n, live.num_qubits()).into());
    }
    let mut bits: Vec<u8> = init.bytes().map(|b| b - b'0').collect();
    let mut touched = vec![false; n];
    let mut trace = Vec::new();
    let mut forced = Vec::new();
    for e in &prov.events {
        match e {
            ProvenanceEvent::Gate { gate, params, qubits, .. } => {
                if *gate == GateKind::X && !touched[qubits[0]] {
                    bits[qubits[0]] ^= 1;
                    continue;
                }
                for &q in qubits {
                    touched[q] = true;
                }
                trace.push(TraceOp {
                    gate: *gate,
                    params: params.clone(),
                    qubits: qubits.clone(),
                });
            }
            ProvenanceEvent::Measure { record, .. } | ProvenanceEvent::Reset { record, .. } => {
                touched[record.qubit] = true;
                forced.push(ForcedOutcome {
                    position: trace.len(),
                    record: *record,
                    reset: matches!(e, ProvenanceEvent::Reset { .. }),
                });
            }
        }
    }
    let factors = factor_state(live, SEPARABILITY_TOL)?;
    let per_block_basis = factors
        .blocks
        .iter()
        .map(|b| {
            let basis = b
                .state
                .amplitudes()
                .iter()
                .position(|a| a.norm() >= BASIS_MAGNITUDE)
                .map_or_else(|| NON_CLASSICAL.to_string(), |x| bitstring(x, b.qubits.len()));
            BlockBasis {
                qubits: b.qubits.clone(),
                basis,
            }
        })
        .collect();
    let mut desc = ClassicalDescription {
        initial_bits: bits.iter().map(|b| char::from(b'0' + b)).collect(),
        operator_trace: trace,
        forced_outcomes: forced,
        per_block_basis,
        replay_fidelity: Num17(0.0),
    };
    desc.replay_fidelity = Num17(desc.replay()?.fidelity(live)?);
    Ok(desc)
}

/// Replays the provenance log and compares with the live state.
pub fn regenerate_and_compare(prov: &Provenance, live: &StateVector) -> Result<RegenerationReport, InspectError> {
    let regenerated = prov.replay()?;
    Ok(RegenerationReport {
        fidelity: Num17(regenerated.fidelity(live)?),
        events_replayed: prov.events.len(),
    })
}

/// Minimal lexicographic k-combinations, without pulling in a crate for it.
mod itertools_lite {
    pub fn combinations(items: &[usize], k: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
        let n = items.len();
        let mut idx: Vec<usize> = (0..k).collect();
        let mut done = k > n;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = idx.iter().map(|&i| items[i]).collect();
            // advance to the next combination
            let mut i = k;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                if idx[i] != i + n - k {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
            Some(out)
        })
    }

    #[cfg(test)]
    #[test]
    fn enumerates_in_lexicographic_order() {
        let got: Vec<Vec<usize>> = combinations(&[1, 3, 5, 7], 2).collect();
        assert_eq!(got, vec![vec![1, 3], vec![1, 5], vec![1, 7], vec![3, 5], vec![3, 7], vec![5, 7]]);
        assert_eq!(combinations(&[1, 2], 3).count(), 0);
        assert_eq!(combinations(&[1, 2], 0).count(), 1);
    }
}
