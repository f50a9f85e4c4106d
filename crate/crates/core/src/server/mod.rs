//! Debug server: one session per connection over the line protocol.

pub mod protocol;

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{program_sha256, DebugSession, EngineError, InspectRequest, IoLog, SessionOptions};
use crate::qasm::SourceProgram;
use crate::stats::{self, AssertionVerdict, EmpiricalDistribution, ExpectedDistribution, Method};
use protocol::{decode, encode, read_line_bounded, DecodeError, Event, Line, Request, Response, MAX_LINE_BYTES};

pub const DEFAULT_PORT: u16 = 7331;

struct Failure {
    code: &'static str,
    message: String,
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

fn bad_request(message: impl Into<String>) -> Failure {
    Failure {
        code: "bad_request",
        message: message.into(),
    }
}

fn args<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, Failure> {
    serde_json::from_value(v.clone()).map_err(|e| bad_request(format!("invalid arguments: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LaunchArgs {
    source: Option<String>,
    path: Option<PathBuf>,
    origin: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    physical_clone: bool,
    verify_provenance: Option<bool>,
}

#[derive(Serialize)]
struct LaunchResult<'a> {
    session: &'a str,
    qubits: usize,
}

#[derive(Serialize)]
struct ListingEntry {
    index: usize,
    text: String,
    line: usize,
    col: usize,
}

#[derive(Serialize)]
struct ProgramBody<'a> {
    session: &'a str,
    statements: Vec<ListingEntry>,
    cregs: Vec<(&'a str, usize)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepArgs {
    force: Option<u8>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexArgs {
    index: usize,
}

#[derive(Serialize)]
struct BreakpointsResult {
    breakpoints: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunShotsArgs {
    shots: u64,
    seed: Option<u64>,
    expected: Option<ExpectedDistribution>,
    method: Option<Method>,
    param: Option<f64>,
}

#[derive(Serialize)]
struct RunShotsResult {
    distribution: EmpiricalDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<AssertionVerdict>,
}

#[derive(Deserialize, Default, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum LogSource {
    #[default]
    Session,
    Batch,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExportArgs {
    path: Option<PathBuf>,
    #[serde(default)]
    source: LogSource,
}

#[derive(Serialize)]
struct ExportResult {
    records: usize,
    bytes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

/// Protocol state of one connection.
#[derive(Default)]
pub struct Connection {
    session: Option<DebugSession>,
    source_text: String,
    batch_log: Option<IoLog>,
    last_id: Option<u64>,
    launches: u64,
    lines: u64,
    closed: bool,
    /// Decode failures seen so far, for diagnostics.
    pub decode_errors: Vec<DecodeError>,
}

impl Connection {
    pub fn new() -> Self {
        Self::default()
    }

    /// Connection with a session already launched, so clients can start
    /// stepping without sending `launch`.
    pub fn with_session(session: DebugSession, source_text: impl Into<String>) -> Self {
        Connection {
            session: Some(session),
            source_text: source_text.into(),
            launches: 1,
            ..Self::default()
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn session(&self) -> Option<&DebugSession> {
        self.session.as_ref()
    }

    /// Handles one input line and returns the encoded output lines: the
    /// response first, then any events.
    pub fn handle_line(&mut self, bytes: &[u8]) -> Vec<String> {
        self.lines += 1;
        if bytes.iter().all(u8::is_ascii_whitespace) {
            return Vec::new();
        }
        match decode(self.lines, bytes) {
            Ok(req) => self.handle_request(req),
            Err(e) => self.reject(e),
        }
    }

    /// Handles a line that exceeded [`MAX_LINE_BYTES`].
    pub fn handle_oversize(&mut self) -> Vec<String> {
        self.lines += 1;
        self.reject(DecodeError {
            line: self.lines,
            reason: format!("line exceeds {MAX_LINE_BYTES} bytes"),
            id: None,
        })
    }

    fn reject(&mut self, e: DecodeError) -> Vec<String> {
        let out = vec![encode(&Response::failure(e.id, "bad_request", e.to_string()))];
        self.decode_errors.push(e);
        out
    }

    pub fn handle_request(&mut self, req: Request) -> Vec<String> {
        if let Some(last) = self.last_id {
            if req.id <= last {
                return vec![encode(&Response::failure(
                    Some(req.id),
                    "bad_request",
                    format!("request id {} is not greater than previous id {last}", req.id),
                ))];
            }
        }
        self.last_id = Some(req.id);
        let mut events = Vec::new();
        let response = match self.dispatch(&req, &mut events) {
            Ok(r) => r,
            Err(f) => {
                events.clear();
                Response::failure(Some(req.id), f.code, f.message)
            }
        };
        let mut out = vec![encode(&response)];
        out.extend(events.iter().map(encode));
        out
    }

    fn session_mut(&mut self) -> Result<&mut DebugSession, Failure> {
        self.session.as_mut().ok_or(Failure {
            code: "no_session",
            message: "no program launched".into(),
        })
    }

    fn dispatch(&mut self, req: &Request, events: &mut Vec<Event>) -> Result<Response, Failure> {
        let id = req.id;
        match req.cmd.as_str() {
            "launch" => {
                let a: LaunchArgs = args(&req.args)?;
                let source = match (a.source, a.path) {
                    (Some(text), None) => SourceProgram::new(text, a.origin.unwrap_or_else(|| "<inline>".into())),
                    (None, Some(p)) => SourceProgram::from_file(&p).map_err(|e| Failure {
                        code: "io_error",
                        message: format!("{}: {e}", p.display()),
                    })?,
                    _ => return Err(bad_request("launch needs exactly one of `source` or `path`")),
                };
                let mut opts = SessionOptions::new(a.seed);
                opts.physical_clone = a.physical_clone;
                if let Some(v) = a.verify_provenance {
                    opts.verify_provenance = v;
                }
                self.launches += 1;
                let s = DebugSession::launch_with(&source, opts)?.with_id(format!("s{}", self.launches));
                let result = Response::success(
                    id,
                    &LaunchResult {
                        session: s.id(),
                        qubits: s.program().num_qubits(),
                    },
                );
                let p = s.program();
                events.push(Event::new(
                    "program",
                    &ProgramBody {
                        session: s.id(),
                        statements: (0..p.len())
                            .map(|i| ListingEntry {
                                index: i,
                                text: p.statement_text(i),
                                line: p.statements[i].span.line,
                                col: p.statements[i].span.col,
                            })
                            .collect(),
                        cregs: p.cregs.iter().map(|r| (r.name.as_str(), r.size)).collect(),
                    },
                ));
                events.push(Event::new("stopped", &s.entry_event()));
                self.source_text = source.text;
                self.batch_log = None;
                self.session = Some(s);
                Ok(result)
            }
            "step" => {
                let a: StepArgs = args(&req.args)?;
                let s = self.session_mut()?;
                let ev = match a.force {
                    Some(b) => s.step_forced(b)?,
                    None => s.step()?,
                };
                events.push(Event::new("stopped", &ev));
                Ok(Response::success(id, &ev))
            }
            "continue" => {
                let _: Empty = args(&req.args)?;
                let ev = self.session_mut()?.continue_run()?;
                events.push(Event::new("stopped", &ev));
                Ok(Response::success(id, &ev))
            }
            "setBreakpoint" | "clearBreakpoint" => {
                let a: IndexArgs = args(&req.args)?;
                let s = self.session_mut()?;
                if req.cmd == "setBreakpoint" {
                    s.set_breakpoint(a.index)?;
                } else {
                    s.clear_breakpoint(a.index)?;
                }
                Ok(Response::success(
                    id,
                    &BreakpointsResult {
                        breakpoints: s.breakpoints().iter().copied().collect(),
                    },
                ))
            }
            "inspect" => {
                let r: InspectRequest = args(&req.args)?;
                let report = self.session_mut()?.inspect(&r)?;
                Ok(Response::success(id, &report))
            }
            "runShots" => {
                let a: RunShotsArgs = args(&req.args)?;
                let s = self.session_mut()?;
                let seed = a.seed.unwrap_or(s.options().seed);
                let program = s.program().clone();
                let (dist, log) = stats::run_shots_logged(&program, &program_sha256(&self.source_text), a.shots, seed)?;
                let verdict = match a.expected {
                    Some(x) => {
                        let method = a.method.unwrap_or(Method::Chi2);
                        let param = a.param.unwrap_or(if method == Method::Tv { 0.05 } else { 0.01 });
                        Some(stats::assert_distribution(&dist, &x, method, param).map_err(EngineError::from)?)
                    }
                    None => None,
                };
                self.batch_log = Some(log);
                Ok(Response::success(
                    id,
                    &RunShotsResult {
                        distribution: dist,
                        verdict,
                    },
                ))
            }
            "exportLog" => {
                let a: ExportArgs = args(&req.args)?;
                let log = match a.source {
                    LogSource::Session => self.session_mut()?.io_log().clone(),
                    LogSource::Batch => self.batch_log.clone().ok_or_else(|| Failure {
                        code: "no_log",
                        message: "no batch run yet".into(),
                    })?,
                };
                let text = log.to_ndjson();
                let result = match a.path {
                    Some(p) => {
                        log.append_to(&p).map_err(|e| Failure {
                            code: "io_error",
                            message: format!("{}: {e}", p.display()),
                        })?;
                        ExportResult {
                            records: log.records.len(),
                            bytes: text.len(),
                            path: Some(p.display().to_string()),
                            text: None,
                        }
                    }
                    None => ExportResult {
                        records: log.records.len(),
                        bytes: text.len(),
                        path: None,
                        text: Some(text),
                    },
                };
                Ok(Response::success(id, &result))
            }
            "disconnect" => {
                self.closed = true;
                self.session = None;
                Ok(Response::success(id, &Empty {}))
            }
            other => Err(bad_request(format!("unknown command `{other}`"))),
        }
    }
}

/// Serves one connection until end of input or `disconnect`.
pub fn serve_stream<R: BufRead, W: Write>(input: R, output: W) -> io::Result<Connection> {
    serve_connection(Connection::new(), input, output)
}

/// Drives an existing connection state over a stream.
pub fn serve_connection<R: BufRead, W: Write>(mut conn: Connection, mut input: R, mut output: W) -> io::Result<Connection> {
    while !conn.is_closed() {
        let out = match read_line_bounded(&mut input, MAX_LINE_BYTES)? {
            None => break,
            Some(Line::Data(bytes)) => conn.handle_line(&bytes),
            Some(Line::Oversize) => conn.handle_oversize(),
        };
        for line in out {
            output.write_all(line.as_bytes())?;
        }
        output.flush()?;
    }
    Ok(conn)
}

pub fn serve_stdio() -> io::Result<()> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    serve_stream(stdin.lock(), stdout.lock()).map(drop)
}

fn serve_tcp_stream(conn: Connection, stream: TcpStream) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    serve_connection(conn, reader, BufWriter::new(stream)).map(drop)
}

/// Accepts connections forever, one thread each, with fresh protocol state.
pub fn serve_listener(listener: TcpListener) -> io::Result<()> {
    serve_listener_with(listener, Connection::new)
}

/// Like [`serve_listener`], with the initial state of every connection
/// produced by `make`.
pub fn serve_listener_with<F>(listener: TcpListener, make: F) -> io::Result<()>
where
    F: Fn() -> Connection + Send + Sync + 'static,
{
    let make = std::sync::Arc::new(make);
    for stream in listener.incoming() {
        let stream = stream?;
        let make = make.clone();
        std::thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            if let Err(e) = serve_tcp_stream(make(), stream) {
                eprintln!("connection {peer}: {e}");
            }
        });
    }
    Ok(())
}

pub fn serve_tcp<A: ToSocketAddrs>(addr: A) -> io::Result<()> {
    serve_listener(TcpListener::bind(addr)?)
}
