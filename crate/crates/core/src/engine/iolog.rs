//! Newline-delimited JSON log of shot inputs and outputs.
//!
//! The first line is a header naming the seed, the random generator and the
//! program hash; each following line records one shot.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::rng::ALGORITHM;
use crate::wire::OrderedMap;

/// Hex SHA-256 of program text.
pub fn program_sha256(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoLogHeader {
    pub io_log: u32,
    pub seed: u64,
    pub rng: String,
    pub program_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoEvent {
    pub stmt: usize,
    pub qubit: usize,
    pub outcome: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoLogRecord {
    pub shot: u64,
    pub init: String,
    pub events: Vec<IoEvent>,
    pub creg: OrderedMap,
    /// Wall-clock start and end in Unix milliseconds. Kept out of the
    /// default serialisation so logs of equal runs are byte-identical.
    #[serde(skip)]
    pub wall_ms: Option<(u128, u128)>,
}

pub(crate) fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoLog {
    pub header: IoLogHeader,
    pub records: Vec<IoLogRecord>,
}

impl IoLog {
    pub fn new(seed: u64, program_sha256: impl Into<String>) -> Self {
        IoLog {
            header: IoLogHeader {
                io_log: 1,
                seed,
                rng: ALGORITHM.to_string(),
                program_sha256: program_sha256.into(),
            },
            records: Vec::new(),
        }
    }

    /// Header line followed by one line per record.
    pub fn to_ndjson(&self) -> String {
        self.render(false)
    }

    /// Like [`Self::to_ndjson`] with `started_ms` / `finished_ms` added to
    /// records that carry wall-clock times.
    pub fn to_ndjson_with_timestamps(&self) -> String {
        self.render(true)
    }

    fn render(&self, timestamps: bool) -> String {
        let mut out = serde_json::to_string(&self.header).expect("serialisable");
        out.push('\n');
        for r in &self.records {
            let mut line = serde_json::to_string(r).expect("serialisable");
            if let (true, Some((start, end))) = (timestamps, r.wall_ms) {
                line.pop();
                line.push_str(&format!(",\"started_ms\":{start},\"finished_ms\":{end}}}"));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Appends this log (header and records) to `path`, creating it if needed.
    pub fn append_to(&self, path: &Path) -> std::io::Result<usize> {
        let text = self.to_ndjson();
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        f.write_all(text.as_bytes())?;
        Ok(text.len())
    }
}
