//! Line protocol: one JSON message per line.
//!
//! Requests are `{"id": n, "cmd": "...", "args": {...}}`, responses
//! `{"id": n, "ok": true, "result": ...}` or `{"id": n, "ok": false,
//! "error": {"code": "...", "message": "..."}}`, events `{"event": "...",
//! "body": ...}`.

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{Map, Value};
use thiserror::Error;

/// Longest accepted line, excluding the newline.
pub const MAX_LINE_BYTES: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {reason}")]
pub struct DecodeError {
    pub line: u64,
    pub reason: String,
    /// Request id, when one could be recovered from the bad line.
    pub id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub cmd: String,
    #[serde(default = "empty_args")]
    pub args: Value,
}

fn empty_args() -> Value {
    Value::Object(Map::new())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Response {
    pub id: Option<u64>,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Box<RawValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl Response {
    pub fn success<T: Serialize + ?Sized>(id: u64, result: &T) -> Self {
        let raw = serde_json::value::to_raw_value(result).expect("serialisable");
        Response {
            id: Some(id),
            ok: true,
            result: Some(raw),
            error: None,
        }
    }

    pub fn failure(id: Option<u64>, code: &str, message: impl Into<String>) -> Self {
        Response {
            id,
            ok: false,
            result: None,
            error: Some(ErrorBody {
                code: code.into(),
                message: message.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Event {
    pub event: String,
    pub body: Box<RawValue>,
}

impl Event {
    pub fn new<T: Serialize + ?Sized>(event: &str, body: &T) -> Self {
        Event {
            event: event.into(),
            body: serde_json::value::to_raw_value(body).expect("serialisable"),
        }
    }
}

/// Serialises a message as one line, newline included.
pub fn encode<T: Serialize>(msg: &T) -> String {
    let mut s = serde_json::to_string(msg).expect("serialisable");
    s.push('\n');
    s
}

/// Parses one request line (without its newline).
pub fn decode(line_no: u64, bytes: &[u8]) -> Result<Request, DecodeError> {
    let err = |reason: String, id| DecodeError { line: line_no, reason, id };
    if bytes.len() > MAX_LINE_BYTES {
        return Err(err(format!("line exceeds {MAX_LINE_BYTES} bytes"), None));
    }
    let text = std::str::from_utf8(bytes).map_err(|e| err(format!("invalid UTF-8: {e}"), None))?;
    let value: Value = serde_json::from_str(text).map_err(|e| err(format!("invalid JSON: {e}"), None))?;
    let id = value.get("id").and_then(Value::as_u64);
    let req: Request = serde_json::from_value(value).map_err(|e| err(format!("malformed request: {e}"), id))?;
    if !req.args.is_object() {
        return Err(err("`args` must be an object".into(), Some(req.id)));
    }
    Ok(req)
}

/// Outcome of reading one line with a length bound.
#[derive(Debug, PartialEq, Eq)]
pub enum Line {
    Data(Vec<u8>),
    /// The line was longer than the bound; its bytes were discarded.
    Oversize,
}

/// Reads up to the next `\n` without buffering more than `max` bytes of it.
/// Returns `None` at end of input. A trailing `\r` is stripped.
pub fn read_line_bounded<R: BufRead>(r: &mut R, max: usize) -> std::io::Result<Option<Line>> {
    let mut buf = Vec::new();
    let mut oversize = false;
    let mut saw_any = false;
    loop {
        let chunk = r.fill_buf()?;
        if chunk.is_empty() {
            if !saw_any {
                return Ok(None);
            }
            break;
        }
        saw_any = true;
        let (take, done) = match chunk.iter().position(|&b| b == b'\n') {
            Some(i) => (i, true),
            None => (chunk.len(), false),
        };
        if !oversize {
            if buf.len() + take > max {
                oversize = true;
                buf = Vec::new();
            } else {
                buf.extend_from_slice(&chunk[..take]);
            }
        }
        r.consume(if done { take + 1 } else { take });
        if done {
            break;
        }
    }
    if oversize {
        return Ok(Some(Line::Oversize));
    }
    if buf.last() == Some(&b'\r') {
        buf.pop();
    }
    Ok(Some(Line::Data(buf)))
}
