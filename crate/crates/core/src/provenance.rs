//! Provenance log: the initial basis state plus every operation applied since,
//! with measurement outcomes. Replaying it regenerates the live state.

use serde::Serialize;

use crate::state::{GateKind, MeasurementRecord, StateError, StateVector};

/// Forced outcomes below this probability on replay mean the log and the
/// live state disagree.
pub const MIN_REPLAY_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ProvenanceEvent {
    Gate {
        stmt: Option<usize>,
        gate: GateKind,
        params: Vec<f64>,
        qubits: Vec<usize>,
    },
    Measure {
        stmt: Option<usize>,
        #[serde(flatten)]
        record: MeasurementRecord,
        forced: bool,
    },
    /// Measurement followed by an X when the outcome was 1.
    Reset {
        stmt: Option<usize>,
        #[serde(flatten)]
        record: MeasurementRecord,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProvenanceOrigin {
    /// Session started from a computational basis state (display order bits).
    Basis { bits: String },
    /// Session started from an imported state, so nothing can be replayed.
    Imported,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub origin: ProvenanceOrigin,
    pub events: Vec<ProvenanceEvent>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("provenance unavailable: session started from an imported state")]
    Unavailable,
    #[error("recorded outcome {outcome} on qubit {qubit} has probability {probability:e} on replay")]
    ForcedOutcomeImpossible { qubit: usize, outcome: u8, probability: f64 },
    #[error(transparent)]
    State(#[from] StateError),
}

impl Provenance {
    pub fn from_basis(bits: impl Into<String>) -> Self {
        Provenance {
            origin: ProvenanceOrigin::Basis { bits: bits.into() },
            events: Vec::new(),
        }
    }

    pub fn imported() -> Self {
        Provenance {
            origin: ProvenanceOrigin::Imported,
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, e: ProvenanceEvent) {
        self.events.push(e);
    }

    pub fn initial_bits(&self) -> Option<&str> {
        match &self.origin {
            ProvenanceOrigin::Basis { bits } => Some(bits),
            ProvenanceOrigin::Imported => None,
        }
    }

    /// Re-executes the log from the initial basis state, forcing every
    /// recorded outcome by projection.
    pub fn replay(&self) -> Result<StateVector, ReplayError> {
        let bits = self.initial_bits().ok_or(ReplayError::Unavailable)?;
        let mut s = StateVector::basis(bits.len(), bits)?;
        for e in &self.events {
            apply_event(&mut s, e)?;
        }
        Ok(s)
    }
}

pub(crate) fn force(s: &mut StateVector, qubit: usize, outcome: u8) -> Result<(), ReplayError> {
    match s.project_mut(qubit, outcome, MIN_REPLAY_PROBABILITY) {
        Ok(_) => Ok(()),
        Err(StateError::ImpossibleOutcome {
            qubit,
            outcome,
            probability,
        }) => Err(ReplayError::ForcedOutcomeImpossible {
            qubit,
            outcome,
            probability,
        }),
        Err(e) => Err(e.into()),
    }
}

pub(crate) fn apply_event(s: &mut StateVector, e: &ProvenanceEvent) -> Result<(), ReplayError> {
    match e {
        ProvenanceEvent::Gate { gate, params, qubits, .. } => s.apply_gate_mut(&gate.matrix(params), qubits)?,
        ProvenanceEvent::Measure { record, .. } => force(s, record.qubit, record.outcome)?,
        ProvenanceEvent::Reset { record, .. } => {
            force(s, record.qubit, record.outcome)?;
            if record.outcome == 1 {
                s.apply_gate_mut(&GateKind::X.matrix(&[]), &[record.qubit])?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_forces_recorded_outcomes() {
        let mut p = Provenance::from_basis("00");
        p.push(ProvenanceEvent::Gate {
            stmt: Some(0),
            gate: GateKind::H,
            params: vec![],
            qubits: vec![0],
        });
        p.push(ProvenanceEvent::Measure {
            stmt: Some(1),
            record: MeasurementRecord {
                qubit: 0,
                outcome: 1,
                probability: 0.5,
            },
            forced: false,
        });
        let s = p.replay().unwrap();
        assert!(s.fidelity(&StateVector::basis(2, "10").unwrap()).unwrap() > 1.0 - 1e-15);

        p.push(ProvenanceEvent::Measure {
            stmt: None,
            record: MeasurementRecord {
                qubit: 0,
                outcome: 0,
                probability: 0.0,
            },
            forced: true,
        });
        assert!(matches!(
            p.replay(),
            Err(ReplayError::ForcedOutcomeImpossible { qubit: 0, outcome: 0, .. })
        ));
    }

    #[test]
    fn imported_origin_cannot_replay() {
        assert_eq!(Provenance::imported().replay(), Err(ReplayError::Unavailable));
    }
}
