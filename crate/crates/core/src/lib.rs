//! Core of `qdbg`, a source-level debugger for OpenQASM 2.0 programs running
//! on an exact statevector simulator.
//!
//! The pieces, bottom-up:
//!
//! - [`qasm`]: tokenizer, parser, macro expansion.
//! - [`state`]: statevector, gate matrices, density matrices, Schmidt values.
//! - [`inspect`]: superposition, separability, factorisation, classical
//!   descriptions and regeneration from the provenance log.
//! - [`stats`]: approximate cloning, shot sampling, distribution assertions
//!   and Pauli tomography.
//! - [`engine`]: debug sessions with breakpoints, stepping and I/O logs.
//! - [`server`]: newline-delimited JSON protocol over stdio or TCP.

pub mod engine;
pub mod inspect;
pub mod provenance;
pub mod qasm;
pub mod rng;
pub mod samples;
pub mod server;
pub mod state;
pub mod stats;
mod wire;

pub use engine::{DebugSession, EngineError, InspectRequest, Report, StopEvent, StopReason};
pub use qasm::{compile, parse, Ast, FlatProgram, ParseError, SourceProgram};
pub use state::{DensityMatrix, GateKind, GateMatrix, MeasurementRecord, StateError, StateVector};
pub use stats::{EmpiricalDistribution, ExpectedDistribution};
pub use wire::{Amp, Num17, OrderedMap};
