//! Statement execution shared by interactive sessions and batch shots.

use crate::qasm::{Condition, FlatOp, FlatProgram};
use crate::rng::CounterRng;
use crate::state::{GateKind, MeasurementRecord, StateError, StateVector};

use super::EngineError;

/// Forced outcomes below this probability are refused.
pub(crate) const MIN_FORCE_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Executed {
    Skipped,
    Gate,
    Barrier,
    Measured(MeasurementRecord),
    Reset(MeasurementRecord),
}

#[derive(Debug, Clone)]
pub(crate) struct Machine {
    pub state: StateVector,
    pub cregs: Vec<Vec<u8>>,
    rng: CounterRng,
    pub draws: u64,
    /// Guard value of the most recent condition group.
    guard: Option<(usize, bool)>,
}

impl Machine {
    pub fn new(program: &FlatProgram, rng: CounterRng) -> Result<Self, EngineError> {
        let n = program.num_qubits();
        let state = StateVector::basis_index(n, 0).map_err(|_| EngineError::Capacity(n))?;
        Ok(Self::with_state(program, state, rng))
    }

    pub fn with_state(program: &FlatProgram, state: StateVector, rng: CounterRng) -> Self {
        Machine {
            state,
            cregs: program.cregs.iter().map(|r| vec![0; r.size]).collect(),
            rng,
            draws: 0,
            guard: None,
        }
    }

    fn creg_equals(&self, creg: usize, value: u64) -> bool {
        self.cregs[creg]
            .iter()
            .enumerate()
            .all(|(i, &b)| u64::from(b) == if i < 64 { value >> i & 1 } else { 0 })
    }

    fn evaluate(&self, c: &Condition) -> bool {
        match self.guard {
            Some((group, v)) if group == c.group => v,
            _ => self.creg_equals(c.creg, c.value),
        }
    }

    /// Whether statement `idx` would run if executed now.
    pub fn will_execute(&self, program: &FlatProgram, idx: usize) -> bool {
        program.statements[idx].condition.as_ref().is_none_or(|c| self.evaluate(c))
    }

    pub fn creg_strings(&self) -> Vec<String> {
        self.cregs
            .iter()
            .map(|bits| bits.iter().map(|&b| char::from(b'0' + b)).collect())
            .collect()
    }

    /// Executes statement `idx`. `force` picks the outcome of a measurement
    /// or reset instead of drawing one.
    pub fn exec(&mut self, program: &FlatProgram, idx: usize, force: Option<u8>) -> Result<Executed, EngineError> {
        let st = &program.statements[idx];
        if let Some(c) = &st.condition {
            let v = self.evaluate(c);
            self.guard = Some((c.group, v));
            if !v {
                return Ok(Executed::Skipped);
            }
        }
        match &st.op {
            FlatOp::Gate { gate, params, qubits } => {
                self.state.apply_gate_mut(&gate.matrix(params), qubits)?;
                Ok(Executed::Gate)
            }
            FlatOp::Barrier { .. } => Ok(Executed::Barrier),
            FlatOp::Measure { qubit, creg, bit } => {
                let rec = self.collapse(*qubit, force)?;
                self.cregs[*creg][*bit] = rec.outcome;
                Ok(Executed::Measured(rec))
            }
            FlatOp::Reset { qubit } => {
                let rec = self.collapse(*qubit, force)?;
                if rec.outcome == 1 {
                    self.state.apply_gate_mut(&GateKind::X.matrix(&[]), &[*qubit])?;
                }
                Ok(Executed::Reset(rec))
            }
        }
    }

    fn collapse(&mut self, qubit: usize, force: Option<u8>) -> Result<MeasurementRecord, StateError> {
        match force {
            Some(b) => self.state.project_mut(qubit, b, MIN_FORCE_PROBABILITY),
            None => {
                let u = self.rng.uniform(self.draws);
                self.draws += 1;
                self.state.measure_mut(qubit, u)
            }
        }
    }
}
