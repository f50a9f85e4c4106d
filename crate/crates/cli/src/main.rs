//! `qdbg`: run, assert, inspect and debug OpenQASM 2.0 programs.

mod render;
mod repl;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qdbg_core::engine::{program_sha256, SessionOptions};
use qdbg_core::server::{self, Connection, DEFAULT_PORT};
use qdbg_core::stats::{self, Method, StatsError, TomographyMode};
use qdbg_core::{compile, DebugSession, EngineError, ExpectedDistribution, FlatProgram, InspectRequest, SourceProgram};

#[derive(Parser)]
#[command(name = "qdbg", version, about = "Debugger and test runner for OpenQASM 2.0 programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program for many shots and print the distribution of creg values.
    Run(RunArgs),
    /// Run shots and test the distribution against an expected one (exit 2 on failure).
    Assert(AssertArgs),
    /// Interactive session on stdin, or serve the session over the protocol.
    Debug(DebugArgs),
    /// Run to a flat statement and print an inspection report.
    Inspect(InspectArgs),
    /// Pauli tomography of a subset at a flat statement.
    Tomo(TomoArgs),
    /// Serve the debug protocol.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ProgramArgs {
    /// OpenQASM 2.0 source file.
    file: PathBuf,
    /// Random seed; defaults to a time-derived value printed on stderr.
    #[arg(long, env = "QDBG_SEED")]
    seed: Option<u64>,
    /// Print the flat program with statement indices and source positions, then exit.
    #[arg(long)]
    list: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    program: ProgramArgs,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Append the per-shot I/O log to this file.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct AssertArgs {
    #[command(flatten)]
    program: ProgramArgs,
    /// Expected distribution file: {"probs": {"bits": p, ...}}.
    #[arg(long)]
    expected: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Chi2)]
    method: MethodArg,
    /// Significance level for chi2.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Largest passing total variation distance for tv.
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Chi2,
    Tv,
}

#[derive(Args)]
struct DebugArgs {
    #[command(flatten)]
    program: ProgramArgs,
    /// Serve the session instead of reading commands: `stdio` or `tcp:[HOST:]PORT`.
    #[arg(long)]
    serve: Option<String>,
    /// Clone reports also show the degraded marginal of the original.
    #[arg(long)]
    physical_clone: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    State,
    Superposition,
    Separable,
    Factor,
    Classical,
    Regenerate,
    Clone,
    Tomography,
    Distribution,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    program: ProgramArgs,
    /// Flat statement index to stop before (0 = before the first statement).
    #[arg(long)]
    at: usize,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Qubit indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    subset: Vec<usize>,
    /// Other side of the cut for `separable`; defaults to the complement.
    #[arg(long, value_delimiter = ',')]
    other: Vec<usize>,
    /// Samples drawn from a clone.
    #[arg(long)]
    samples: Option<u64>,
    /// Shots for `distribution`, or shots per setting for `tomography`.
    #[arg(long)]
    shots: Option<u64>,
    /// Estimate entangled subsets' reduced states in `tomography`.
    #[arg(long = "override")]
    allow_entangled: bool,
    #[arg(long)]
    physical_clone: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct TomoArgs {
    #[command(flatten)]
    program: ProgramArgs,
    #[arg(long)]
    at: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    subset: Vec<usize>,
    /// Shots per Pauli setting.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    /// Use exact outcome probabilities instead of sampling.
    #[arg(long)]
    exact: bool,
    /// Allow subsets entangled with the rest (estimates the reduced state).
    #[arg(long = "override")]
    allow_entangled: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ServeArgs {
    /// `stdio` or `tcp:[HOST:]PORT`.
    #[arg(default_value_t = format!("tcp:{DEFAULT_PORT}"))]
    transport: String,
}

enum Transport {
    Stdio,
    Tcp(String),
}

fn parse_transport(s: &str) -> Result<Transport> {
    if s == "stdio" {
        return Ok(Transport::Stdio);
    }
    let Some(rest) = s.strip_prefix("tcp:") else {
        bail!("transport `{s}` is neither `stdio` nor `tcp:[HOST:]PORT`");
    };
    let addr = if rest.contains(':') {
        rest.to_string()
    } else {
        format!("127.0.0.1:{rest}")
    };
    Ok(Transport::Tcp(addr))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos() as u64);
        eprintln!("seed: {t}");
        t
    })
}

struct Loaded {
    source: SourceProgram,
    program: FlatProgram,
    seed: u64,
}

/// Reads and compiles the program. Returns `None` after printing the listing
/// when `--list` was given.
fn load(p: &ProgramArgs) -> Result<Option<Loaded>> {
    let source = SourceProgram::from_file(&p.file).with_context(|| format!("cannot read {}", p.file.display()))?;
    let program = compile(&source)?;
    if p.list {
        print!("{}", program.listing());
        return Ok(None);
    }
    Ok(Some(Loaded {
        source,
        program,
        seed: resolve_seed(p.seed),
    }))
}

fn session_at(l: &Loaded, at: usize, physical_clone: bool) -> Result<DebugSession> {
    if at > l.program.len() {
        bail!("--at {at} is past the end of the program ({} statements)", l.program.len());
    }
    let mut opts = SessionOptions::new(l.seed);
    opts.physical_clone = physical_clone;
    let mut s = DebugSession::launch_program(l.program.clone(), &program_sha256(&l.source.text), opts)?;
    while s.pc() < at {
        s.step()?;
    }
    Ok(s)
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    let Some(l) = load(&a.program)? else { return Ok(ExitCode::SUCCESS) };
    let dist = match &a.log {
        Some(path) => {
            let (dist, log) = stats::run_shots_logged(&l.program, &program_sha256(&l.source.text), a.shots, l.seed)?;
            log.append_to(path).with_context(|| format!("cannot write {}", path.display()))?;
            dist
        }
        None => stats::run_shots(&l.program, a.shots, l.seed)?,
    };
    match a.format {
        Format::Json => println!("{}", dist.to_json()),
        Format::Text => print!("{}", render::distribution(&dist)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_assert(a: AssertArgs) -> Result<ExitCode> {
    let Some(l) = load(&a.program)? else { return Ok(ExitCode::SUCCESS) };
    let text = std::fs::read_to_string(&a.expected).with_context(|| format!("cannot read {}", a.expected.display()))?;
    let expected = ExpectedDistribution::from_json(&text).with_context(|| a.expected.display().to_string())?;
    let dist = stats::run_shots(&l.program, a.shots, l.seed)?;
    let (method, param) = match a.method {
        MethodArg::Chi2 => (Method::Chi2, a.alpha),
        MethodArg::Tv => (Method::Tv, a.threshold),
    };
    let verdict = match stats::assert_distribution(&dist, &expected, method, param) {
        Ok(v) => v,
        Err(StatsError::DomainMismatch(k)) => {
            eprintln!(
                "FAIL: outcome `{k}` observed {} times but has zero expected probability",
                dist.count(&k)
            );
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e.into()),
    };
    match a.format {
        Format::Json => println!("{}", serde_json::to_string(&verdict)?),
        Format::Text => println!("{}", render::verdict(&verdict)),
    }
    Ok(if verdict.pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn inspect_request(a: &InspectArgs) -> Result<InspectRequest> {
    let subset = || -> Result<Vec<usize>> {
        if a.subset.is_empty() {
            bail!("--subset is required for this kind");
        }
        Ok(a.subset.clone())
    };
    Ok(match a.kind {
        Kind::State => InspectRequest::State,
        Kind::Superposition => InspectRequest::Superposition {
            subset: subset()?,
            tol_sup: None,
        },
        Kind::Separable => InspectRequest::Separable {
            a: subset()?,
            b: (!a.other.is_empty()).then(|| a.other.clone()),
            tol: None,
        },
        Kind::Factor => InspectRequest::Factor { tol: None },
        Kind::Classical => InspectRequest::Classical,
        Kind::Regenerate => InspectRequest::Regenerate,
        Kind::Clone => InspectRequest::Clone {
            subset: subset()?,
            samples: a.samples,
            seed: None,
        },
        Kind::Tomography => InspectRequest::Tomography {
            subset: subset()?,
            shots: a.shots,
            seed: None,
            allow_entangled: a.allow_entangled,
        },
        Kind::Distribution => InspectRequest::Distribution {
            subset: (!a.subset.is_empty()).then(|| a.subset.clone()),
            shots: a.shots,
            seed: None,
            expected: None,
            method: None,
            param: None,
        },
    })
}

fn cmd_inspect(a: InspectArgs) -> Result<ExitCode> {
    let Some(l) = load(&a.program)? else { return Ok(ExitCode::SUCCESS) };
    let req = inspect_request(&a)?;
    let s = session_at(&l, a.at, a.physical_clone)?;
    let report = s.inspect(&req)?;
    match a.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", render::report(&report, s.program())),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_tomo(a: TomoArgs) -> Result<ExitCode> {
    let Some(l) = load(&a.program)? else { return Ok(ExitCode::SUCCESS) };
    let s = session_at(&l, a.at, false)?;
    let mode = if a.exact {
        TomographyMode::Exact
    } else {
        TomographyMode::Sampled {
            shots_per_setting: a.shots,
            seed: l.seed,
        }
    };
    let est = stats::tomography(s.state(), &a.subset, mode, a.allow_entangled).map_err(EngineError::from)?;
    match a.format {
        Format::Json => println!("{}", serde_json::to_string(&est)?),
        Format::Text => print!("{}", render::tomography(&est)),
    }
    Ok(ExitCode::SUCCESS)
}

fn serve_on(transport: Transport, make: impl Fn() -> Connection + Send + Sync + 'static) -> Result<()> {
    match transport {
        Transport::Stdio => {
            let stdin = io::stdin();
            server::serve_connection(make(), stdin.lock(), io::stdout().lock())?;
        }
        Transport::Tcp(addr) => {
            let listener = std::net::TcpListener::bind(&addr).with_context(|| format!("cannot listen on {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            server::serve_listener_with(listener, make)?;
        }
    }
    Ok(())
}

fn cmd_debug(a: DebugArgs) -> Result<ExitCode> {
    let Some(l) = load(&a.program)? else { return Ok(ExitCode::SUCCESS) };
    let mut opts = SessionOptions::new(l.seed);
    opts.physical_clone = a.physical_clone;
    let session = DebugSession::launch_program(l.program.clone(), &program_sha256(&l.source.text), opts)?;
    match &a.serve {
        Some(t) => {
            let transport = parse_transport(t)?;
            let text = l.source.text.clone();
            serve_on(transport, move || Connection::with_session(session.clone(), text.clone()))?;
        }
        None => {
            let stdin = io::stdin();
            repl::run(session, stdin.lock(), io::stdout().lock())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_serve(a: ServeArgs) -> Result<ExitCode> {
    serve_on(parse_transport(&a.transport)?, Connection::new)?;
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Assert(a) => cmd_assert(a),
        Command::Debug(a) => cmd_debug(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Tomo(a) => cmd_tomo(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = io::stdout().flush();
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
