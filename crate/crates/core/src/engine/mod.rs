//! Debug sessions: stepping, breakpoints, forced measurement branches,
//! provenance and I/O logs, and inspection dispatch.

mod iolog;
pub(crate) mod machine;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inspect::{
    self, ClassicalDescription, FactorizationReport, InspectError, RegenerationReport, SeparabilityReport, SuperpositionReport,
};
use crate::provenance::{Provenance, ProvenanceEvent};
use crate::qasm::{compile, FlatOp, FlatProgram, ParseError, SourceProgram, Span};
use crate::rng::shot_stream;
use crate::state::{bitstring, complement, MeasurementRecord, StateError, StateVector, MAX_QUBITS};
use crate::stats::{
    self, AssertionVerdict, CloneResult, EmpiricalDistribution, ExpectedDistribution, Method, StatsError, TomographyEstimate,
    TomographyMode,
};
use crate::wire::{serialize_state, Num17, OrderedMap};

pub(crate) use iolog::now_ms as iolog_now_ms;
pub use iolog::{program_sha256, IoEvent, IoLog, IoLogHeader, IoLogRecord};
use machine::{Executed, Machine};

/// Automatic provenance checks are skipped above this width; replay after
/// every step is quadratic in the number of steps.
pub const VERIFY_MAX_QUBITS: usize = 14;

/// Regeneration fidelity below `1 - PROVENANCE_TOL` is a provenance fault.
pub const PROVENANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("program needs {0} qubits; the simulator supports 1..={MAX_QUBITS}")]
    Capacity(usize),
    #[error("session finished")]
    SessionFinished,
    #[error("statement index {index} out of range (program has {len} statements)")]
    Index { index: usize, len: usize },
    #[error("statement {pc} is not a measurement or reset that will execute")]
    NotMeasurement { pc: usize },
    #[error("invalid outcome {0}; expected 0 or 1")]
    BadOutcome(u8),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Inspect(#[from] InspectError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("provenance replay diverged from the live state (fidelity {0})")]
    ProvenanceMismatch(f64),
    #[error("{0}")]
    Io(String),
}

impl EngineError {
    /// Stable machine-readable code used by the protocol.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::Parse(_) => "parse_error",
            EngineError::Capacity(_) => "capacity",
            EngineError::SessionFinished => "finished",
            EngineError::Index { .. } => "index_error",
            EngineError::NotMeasurement { .. } | EngineError::BadOutcome(_) => "invalid_force",
            EngineError::State(StateError::ImpossibleOutcome { .. }) => "impossible_outcome",
            EngineError::State(_) => "state_error",
            EngineError::Inspect(InspectError::Replay(crate::provenance::ReplayError::Unavailable)) => "provenance_unavailable",
            EngineError::Inspect(_) => "inspect_error",
            EngineError::Stats(StatsError::DomainMismatch(_)) => "domain_mismatch",
            EngineError::Stats(_) => "stats_error",
            EngineError::ProvenanceMismatch(_) => "provenance_mismatch",
            EngineError::Io(_) => "io_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Entry,
    Step,
    Breakpoint,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopEvent {
    pub reason: StopReason,
    /// Index of the next statement to execute.
    pub pc: usize,
    /// Source position of the next statement, absent at the end.
    pub span: Option<Span>,
    /// Index of the last statement executed by this command.
    pub last: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementRecord>,
    /// The last statement's `if` guard was false.
    pub skipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Stopped,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionOptions {
    pub seed: u64,
    /// Replays provenance after each step and fails on divergence.
    pub verify_provenance: bool,
    /// Clone reports also show the degraded marginal of the original.
    pub physical_clone: bool,
}

impl SessionOptions {
    pub fn new(seed: u64) -> Self {
        SessionOptions {
            seed,
            verify_provenance: cfg!(debug_assertions),
            physical_clone: false,
        }
    }
}

/// Inspection requests, as carried by the protocol's `inspect` command.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InspectRequest {
    State,
    Superposition {
        subset: Vec<usize>,
        tol_sup: Option<f64>,
    },
    Separable {
        a: Vec<usize>,
        /// Defaults to the complement of `a`.
        b: Option<Vec<usize>>,
        tol: Option<f64>,
    },
    Factor {
        tol: Option<f64>,
    },
    Classical,
    Regenerate,
    Clone {
        subset: Vec<usize>,
        samples: Option<u64>,
        seed: Option<u64>,
    },
    Tomography {
        subset: Vec<usize>,
        /// Shots per setting; exact probabilities when absent.
        shots: Option<u64>,
        seed: Option<u64>,
        #[serde(default, rename = "override")]
        allow_entangled: bool,
    },
    /// Computational-basis distribution of a subset of the live state,
    /// optionally sampled and checked against an expectation.
    Distribution {
        subset: Option<Vec<usize>>,
        shots: Option<u64>,
        seed: Option<u64>,
        expected: Option<ExpectedDistribution>,
        method: Option<Method>,
        param: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct StateReport {
    pub pc: usize,
    pub status: Status,
    pub qubits: usize,
    #[serde(serialize_with = "serialize_state")]
    pub amplitudes: StateVector,
    pub cregs: OrderedMap,
}

#[derive(Debug, Clone, Serialize)]
pub struct CloneReport {
    #[serde(flatten)]
    pub result: CloneResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<EmpiricalDistribution>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport {
    pub subset: Vec<usize>,
    pub exact: BTreeMap<String, Num17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<AssertionVerdict>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    State(StateReport),
    Superposition(SuperpositionReport),
    Separable(SeparabilityReport),
    Factor(FactorizationReport),
    Classical(ClassicalDescription),
    Regenerate(RegenerationReport),
    Clone(CloneReport),
    Tomography(TomographyEstimate),
    Distribution(DistributionReport),
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }
}

/// Exact marginal distribution of `subset` in the computational basis.
pub fn marginal_distribution(s: &StateVector, subset: &[usize]) -> Result<BTreeMap<String, f64>, StateError> {
    crate::state::check_subset(subset, s.num_qubits())?;
    let mut probs = vec![0.0; 1 << subset.len()];
    for (x, p) in s.probabilities().into_iter().enumerate() {
        probs[crate::state::gather_bits(x, subset)] += p;
    }
    Ok(probs
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > 0.0)
        .map(|(k, p)| (bitstring(k, subset.len()), p))
        .collect())
}

/// A live execution of one program.
#[derive(Debug, Clone)]
pub struct DebugSession {
    id: String,
    program: FlatProgram,
    options: SessionOptions,
    machine: Machine,
    pc: usize,
    breakpoints: BTreeSet<usize>,
    provenance: Provenance,
    status: Status,
    io_log: IoLog,
    current: IoLogRecord,
}

impl DebugSession {
    /// Compiles `source` and starts a session at `|0...0>`.
    pub fn launch(source: &SourceProgram, seed: u64) -> Result<Self, EngineError> {
        Self::launch_with(source, SessionOptions::new(seed))
    }

    pub fn launch_with(source: &SourceProgram, options: SessionOptions) -> Result<Self, EngineError> {
        let program = compile(source)?;
        Self::launch_program(program, &program_sha256(&source.text), options)
    }

    pub fn launch_program(program: FlatProgram, sha256: &str, options: SessionOptions) -> Result<Self, EngineError> {
        let n = program.num_qubits();
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(EngineError::Capacity(n));
        }
        let machine = Machine::new(&program, shot_stream(options.seed, 0))?;
        let init = "0".repeat(n);
        Ok(Self::assemble(
            program,
            sha256,
            options,
            machine,
            Provenance::from_basis(init.clone()),
            init,
        ))
    }

    /// Starts from an externally supplied state. Such sessions have no
    /// provenance, so classical descriptions and regeneration are refused.
    pub fn launch_with_state(program: FlatProgram, sha256: &str, state: StateVector, options: SessionOptions) -> Result<Self, EngineError> {
        if state.num_qubits() != program.num_qubits() {
            return Err(StateError::SizeMismatch(state.num_qubits(), program.num_qubits()).into());
        }
        let machine = Machine::with_state(&program, state, shot_stream(options.seed, 0));
        Ok(Self::assemble(
            program,
            sha256,
            options,
            machine,
            Provenance::imported(),
            "imported".into(),
        ))
    }

    fn assemble(
        program: FlatProgram,
        sha256: &str,
        options: SessionOptions,
        machine: Machine,
        provenance: Provenance,
        init: String,
    ) -> Self {
        let mut s = DebugSession {
            id: "s1".into(),
            io_log: IoLog::new(options.seed, sha256),
            current: IoLogRecord {
                shot: 0,
                init,
                events: Vec::new(),
                creg: OrderedMap::default(),
                wall_ms: Some((iolog::now_ms(), 0)),
            },
            program,
            options,
            machine,
            pc: 0,
            breakpoints: BTreeSet::new(),
            provenance,
            status: Status::Stopped,
        };
        if s.program.is_empty() {
            s.finish();
        }
        s
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn program(&self) -> &FlatProgram {
        &self.program
    }

    pub fn options(&self) -> &SessionOptions {
        &self.options
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn state(&self) -> &StateVector {
        &self.machine.state
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn io_log(&self) -> &IoLog {
        &self.io_log
    }

    /// Random draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.machine.draws
    }

    pub fn breakpoints(&self) -> &BTreeSet<usize> {
        &self.breakpoints
    }

    /// Classical registers as `name -> bits` with `c[0]` leftmost.
    pub fn cregs(&self) -> OrderedMap {
        OrderedMap(
            self.program
                .cregs
                .iter()
                .zip(self.machine.creg_strings())
                .map(|(r, bits)| (r.name.clone(), bits))
                .collect(),
        )
    }

    /// Unsigned value of creg `name` with `c[0]` as least-significant bit.
    pub fn creg_value(&self, name: &str) -> Option<u128> {
        let i = self.program.cregs.iter().position(|r| r.name == name)?;
        Some(self.machine.cregs[i].iter().rev().fold(0u128, |acc, &b| acc << 1 | u128::from(b)))
    }

    fn stop_event(&self, reason: StopReason, last: Option<(usize, Executed)>) -> StopEvent {
        let (last, measurement, skipped) = match last {
            Some((i, Executed::Measured(r) | Executed::Reset(r))) => (Some(i), Some(r), false),
            Some((i, Executed::Skipped)) => (Some(i), None, true),
            Some((i, _)) => (Some(i), None, false),
            None => (None, None, false),
        };
        StopEvent {
            reason,
            pc: self.pc,
            span: self.program.statements.get(self.pc).map(|s| s.span),
            last,
            measurement,
            skipped,
        }
    }

    /// Event describing the current position, as reported right after launch.
    pub fn entry_event(&self) -> StopEvent {
        let reason = if self.status == Status::Finished {
            StopReason::Finished
        } else {
            StopReason::Entry
        };
        self.stop_event(reason, None)
    }

    fn finish(&mut self) {
        self.status = Status::Finished;
        let mut rec = self.current.clone();
        rec.creg = self.cregs();
        if let Some((start, _)) = rec.wall_ms {
            rec.wall_ms = Some((start, iolog::now_ms()));
        }
        self.io_log.records.push(rec);
    }

    fn exec_one(&mut self, force: Option<u8>) -> Result<Executed, EngineError> {
        if self.pc >= self.program.len() {
            return Err(EngineError::SessionFinished);
        }
        let idx = self.pc;
        if let Some(b) = force {
            if b > 1 {
                return Err(EngineError::BadOutcome(b));
            }
            let is_meas = matches!(self.program.statements[idx].op, FlatOp::Measure { .. } | FlatOp::Reset { .. });
            if !is_meas || !self.machine.will_execute(&self.program, idx) {
                return Err(EngineError::NotMeasurement { pc: idx });
            }
        }
        let done = self.machine.exec(&self.program, idx, force)?;
        let stmt = Some(idx);
        match &done {
            Executed::Gate => {
                if let FlatOp::Gate { gate, params, qubits } = &self.program.statements[idx].op {
                    self.provenance.push(ProvenanceEvent::Gate {
                        stmt,
                        gate: *gate,
                        params: params.clone(),
                        qubits: qubits.clone(),
                    });
                }
            }
            Executed::Measured(r) => {
                self.provenance.push(ProvenanceEvent::Measure {
                    stmt,
                    record: *r,
                    forced: force.is_some(),
                });
                self.current.events.push(IoEvent {
                    stmt: idx,
                    qubit: r.qubit,
                    outcome: r.outcome,
                });
            }
            Executed::Reset(r) => self.provenance.push(ProvenanceEvent::Reset { stmt, record: *r }),
            Executed::Skipped | Executed::Barrier => {}
        }
        self.pc += 1;
        if self.options.verify_provenance {
            self.verify()?;
        }
        if self.pc == self.program.len() {
            self.finish();
        }
        Ok(done)
    }

    fn verify(&self) -> Result<(), EngineError> {
        if self.provenance.initial_bits().is_none() || self.machine.state.num_qubits() > VERIFY_MAX_QUBITS {
            return Ok(());
        }
        let f = inspect::regenerate_and_compare(&self.provenance, &self.machine.state)?.fidelity.0;
        if f < 1.0 - PROVENANCE_TOL {
            return Err(EngineError::ProvenanceMismatch(f));
        }
        Ok(())
    }

    fn after_step(&self, idx: usize, done: Executed) -> StopEvent {
        let reason = if self.status == Status::Finished {
            StopReason::Finished
        } else {
            StopReason::Step
        };
        self.stop_event(reason, Some((idx, done)))
    }

    /// Executes exactly one flat statement.
    pub fn step(&mut self) -> Result<StopEvent, EngineError> {
        let idx = self.pc;
        let done = self.exec_one(None)?;
        Ok(self.after_step(idx, done))
    }

    /// Executes the pending measurement or reset with a chosen outcome. No
    /// random draw is consumed and the event is marked forced.
    pub fn step_forced(&mut self, outcome: u8) -> Result<StopEvent, EngineError> {
        let idx = self.pc;
        let done = self.exec_one(Some(outcome))?;
        Ok(self.after_step(idx, done))
    }

    /// Runs until the next breakpoint whose statement will execute, or to
    /// the end. The statement at the current position always runs first.
    pub fn continue_run(&mut self) -> Result<StopEvent, EngineError> {
        let mut last = None;
        while self.pc < self.program.len() {
            let idx = self.pc;
            last = Some((idx, self.exec_one(None)?));
            if self.pc < self.program.len() && self.breakpoints.contains(&self.pc) && self.machine.will_execute(&self.program, self.pc) {
                return Ok(self.stop_event(StopReason::Breakpoint, last));
            }
        }
        Ok(self.stop_event(StopReason::Finished, last))
    }

    fn check_index(&self, index: usize) -> Result<(), EngineError> {
        if index >= self.program.len() {
            return Err(EngineError::Index {
                index,
                len: self.program.len(),
            });
        }
        Ok(())
    }

    pub fn set_breakpoint(&mut self, index: usize) -> Result<(), EngineError> {
        self.check_index(index)?;
        self.breakpoints.insert(index);
        Ok(())
    }

    pub fn clear_breakpoint(&mut self, index: usize) -> Result<(), EngineError> {
        self.check_index(index)?;
        self.breakpoints.remove(&index);
        Ok(())
    }

    /// Runs an inspection. The live state is never modified.
    pub fn inspect(&self, req: &InspectRequest) -> Result<Report, EngineError> {
        let s = &self.machine.state;
        let n = s.num_qubits();
        Ok(match req {
            InspectRequest::State => Report::State(StateReport {
                pc: self.pc,
                status: self.status,
                qubits: n,
                amplitudes: s.clone(),
                cregs: self.cregs(),
            }),
            InspectRequest::Superposition { subset, tol_sup } => Report::Superposition(inspect::check_superposition(
                s,
                subset,
                tol_sup.unwrap_or(inspect::DEFAULT_TOL_SUP),
            )?),
            InspectRequest::Separable { a, b, tol } => {
                let b = b.clone().unwrap_or_else(|| complement(a, n));
                Report::Separable(inspect::is_separable(s, a, &b, tol.unwrap_or(inspect::SEPARABILITY_TOL))?)
            }
            InspectRequest::Factor { tol } => Report::Factor(inspect::factor_state(s, tol.unwrap_or(inspect::SEPARABILITY_TOL))?),
            InspectRequest::Classical => Report::Classical(inspect::classical_description(&self.provenance, s)?),
            InspectRequest::Regenerate => Report::Regenerate(inspect::regenerate_and_compare(&self.provenance, s)?),
            InspectRequest::Clone { subset, samples, seed } => {
                let mut result = stats::approximate_clone(s, subset)?;
                if self.options.physical_clone {
                    result = result.with_physical_original();
                }
                let samples = match samples {
                    Some(k) => Some(stats::sample_clone_measurements(&result, *k, seed.unwrap_or(self.options.seed))?),
                    None => None,
                };
                Report::Clone(CloneReport { result, samples })
            }
            InspectRequest::Tomography {
                subset,
                shots,
                seed,
                allow_entangled,
            } => {
                let mode = match shots {
                    None => TomographyMode::Exact,
                    Some(k) => TomographyMode::Sampled {
                        shots_per_setting: *k,
                        seed: seed.unwrap_or(self.options.seed),
                    },
                };
                Report::Tomography(stats::tomography(s, subset, mode, *allow_entangled)?)
            }
            InspectRequest::Distribution {
                subset,
                shots,
                seed,
                expected,
                method,
                param,
            } => {
                let subset = subset.clone().unwrap_or_else(|| (0..n).collect());
                let exact = marginal_distribution(s, &subset)?;
                let empirical = match shots {
                    Some(k) => Some(sample_marginal(&exact, *k, seed.unwrap_or(self.options.seed))?),
                    None => None,
                };
                let verdict = match (expected, &empirical) {
                    (Some(x), Some(e)) => {
                        let method = method.unwrap_or(Method::Tv);
                        let param = param.unwrap_or(if method == Method::Tv { 0.05 } else { 0.01 });
                        Some(stats::assert_distribution(e, x, method, param)?)
                    }
                    (Some(_), None) => return Err(StatsError::InvalidParameter("an expected distribution needs `shots`".into()).into()),
                    _ => None,
                };
                Report::Distribution(DistributionReport {
                    subset,
                    exact: exact.into_iter().map(|(k, p)| (k, Num17(p))).collect(),
                    empirical,
                    verdict,
                })
            }
        })
    }

    pub fn io_log_text(&self) -> String {
        self.io_log.to_ndjson()
    }

    /// Appends the header and finished shot records to `path`.
    pub fn export_io_log(&self, path: &Path) -> Result<usize, EngineError> {
        self.io_log
            .append_to(path)
            .map_err(|e| EngineError::Io(format!("{}: {e}", path.display())))
    }
}

fn sample_marginal(exact: &BTreeMap<String, f64>, shots: u64, seed: u64) -> Result<EmpiricalDistribution, StatsError> {
    if shots == 0 {
        return Err(StatsError::InvalidParameter("shots must be at least 1".into()));
    }
    let keys: Vec<&String> = exact.keys().collect();
    let probs: Vec<f64> = exact.values().copied().collect();
    let rng = crate::rng::CounterRng::new(seed);
    EmpiricalDistribution::from_outcomes(
        (0..shots).map(|i| keys[crate::rng::sample_index(&probs, rng.uniform(i))].clone()),
        Some(seed),
    )
}

#[cfg(test)]
mod tests;
