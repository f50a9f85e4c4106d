use rayon::prelude::*;

use super::EmpiricalDistribution;
use crate::engine::machine::{Executed, Machine};
use crate::engine::{EngineError, IoEvent, IoLog, IoLogRecord};
use crate::qasm::FlatProgram;
use crate::rng::shot_stream;
use crate::wire::OrderedMap;

/// Distribution key: every creg in declaration order, each printed with
/// bit 0 leftmost, concatenated.
pub fn creg_key(cregs: &[String]) -> String {
    cregs.concat()
}

fn run_one(program: &FlatProgram, seed: u64, shot: u64, record: bool) -> Result<(String, Option<IoLogRecord>), EngineError> {
    let start = record.then(crate::engine::iolog_now_ms);
    let mut m = Machine::new(program, shot_stream(seed, shot))?;
    let mut events = Vec::new();
    for idx in 0..program.len() {
        if let Executed::Measured(r) = m.exec(program, idx, None)? {
            if record {
                events.push(IoEvent {
                    stmt: idx,
                    qubit: r.qubit,
                    outcome: r.outcome,
                });
            }
        }
    }
    let cregs = m.creg_strings();
    let key = creg_key(&cregs);
    let rec = start.map(|t0| IoLogRecord {
        shot,
        init: "0".repeat(program.num_qubits()),
        events,
        creg: OrderedMap(program.cregs.iter().map(|r| r.name.clone()).zip(cregs).collect()),
        wall_ms: Some((t0, crate::engine::iolog_now_ms())),
    });
    Ok((key, rec))
}

fn check_shots(shots: u64) -> Result<(), EngineError> {
    if shots == 0 {
        return Err(super::StatsError::InvalidParameter("shots must be at least 1".into()).into());
    }
    Ok(())
}

/// Executes the whole program `shots` times. Shot `i` draws from
/// `shot_stream(seed, i)`, so the result does not depend on scheduling.
pub fn run_shots(program: &FlatProgram, shots: u64, seed: u64) -> Result<EmpiricalDistribution, EngineError> {
    check_shots(shots)?;
    let keys: Vec<String> = (0..shots)
        .into_par_iter()
        .map(|i| run_one(program, seed, i, false).map(|(k, _)| k))
        .collect::<Result<_, _>>()?;
    Ok(EmpiricalDistribution::from_outcomes(keys, Some(seed))?)
}

/// [`run_shots`] that also returns one I/O log record per shot.
pub fn run_shots_logged(
    program: &FlatProgram,
    program_sha256: &str,
    shots: u64,
    seed: u64,
) -> Result<(EmpiricalDistribution, IoLog), EngineError> {
    check_shots(shots)?;
    let results: Vec<(String, Option<IoLogRecord>)> = (0..shots)
        .into_par_iter()
        .map(|i| run_one(program, seed, i, true))
        .collect::<Result<_, _>>()?;
    let mut log = IoLog::new(seed, program_sha256);
    let mut keys = Vec::with_capacity(results.len());
    for (k, rec) in results {
        keys.push(k);
        log.records.extend(rec);
    }
    Ok((EmpiricalDistribution::from_outcomes(keys, Some(seed))?, log))
}
