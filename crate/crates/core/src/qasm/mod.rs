//! OpenQASM 2.0 frontend: tokenizer, parser with semantic checks, macro
//! expansion into a flat executable program, and a pretty-printer.
//!
//! Supported subset: `OPENQASM 2.0;`, `include "qelib1.inc";` (resolved from a
//! built-in table), `qreg`/`creg`, `gate` definitions, gate applications with
//! register broadcasting, `measure`, `reset`, `barrier` and `if(c==n)`.
//! `opaque` declarations are rejected.

mod ast;
mod expand;
mod lexer;
mod parser;
mod printer;
pub mod qelib;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{Ast, BinOp, Expr, GateApply, GateDef, Operand, Register, Stmt, StmtKind};
pub use expand::{expand, Condition, FlatOp, FlatProgram, FlatStmt, RegisterLayout};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

/// Raw program text plus where it came from (a path or `<inline>`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceProgram {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn inline(text: impl Into<String>) -> Self {
        Self::new(text, "<inline>")
    }

    pub fn from_file(path: &std::path::Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::new(text, path.display().to_string()))
    }
}

/// 1-based line/column position in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticError {
    UnsupportedVersion(String),
    UnknownInclude(String),
    Unsupported(String),
    DuplicateName(String),
    UndeclaredRegister(String),
    WrongRegisterKind {
        name: String,
        expected: &'static str,
    },
    IndexOutOfBounds {
        register: String,
        index: u64,
        size: usize,
    },
    EmptyRegister(String),
    UnknownGate(String),
    ArityMismatch {
        gate: String,
        what: &'static str,
        expected: usize,
        found: usize,
    },
    RecursiveGate(String),
    UnknownIdentifier(String),
    DuplicateTarget(String),
    ConditionOutOfRange {
        register: String,
        value: u64,
        bits: usize,
    },
}

impl fmt::Display for SemanticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticError::UnsupportedVersion(v) => write!(f, "unsupported OpenQASM version {v}, only 2.0 is accepted"),
            SemanticError::UnknownInclude(name) => write!(f, "unknown include \"{name}\""),
            SemanticError::Unsupported(what) => write!(f, "{what} is not supported"),
            SemanticError::DuplicateName(name) => write!(f, "`{name}` is already declared"),
            SemanticError::UndeclaredRegister(name) => write!(f, "undeclared register `{name}`"),
            SemanticError::WrongRegisterKind { name, expected } => {
                write!(f, "`{name}` is not a {expected} register")
            }
            SemanticError::IndexOutOfBounds { register, index, size } => {
                write!(f, "index {index} out of bounds for `{register}` of size {size}")
            }
            SemanticError::EmptyRegister(name) => write!(f, "register `{name}` must have size >= 1"),
            SemanticError::UnknownGate(name) => write!(f, "unknown gate `{name}`"),
            SemanticError::ArityMismatch {
                gate,
                what,
                expected,
                found,
            } => {
                write!(f, "gate `{gate}` takes {expected} {what}, got {found}")
            }
            SemanticError::RecursiveGate(name) => write!(f, "gate `{name}` is used inside its own definition"),
            SemanticError::UnknownIdentifier(name) => write!(f, "unknown identifier `{name}`"),
            SemanticError::DuplicateTarget(what) => write!(f, "gate targets must be distinct, `{what}` repeats"),
            SemanticError::ConditionOutOfRange { register, value, bits } => {
                write!(f, "condition value {value} does not fit in {bits}-bit register `{register}`")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    InvalidCharacter(char),
    Syntax { expected: String, found: String },
    Semantic(SemanticError),
    Expansion(String),
}

/// A located frontend error. Displays as `origin:line:col: message`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{origin}:{span}: {kind}")]
pub struct ParseError {
    pub origin: String,
    pub span: Span,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::InvalidCharacter(c) => write!(f, "invalid character {c:?}"),
            ParseErrorKind::Syntax { expected, found } => write!(f, "syntax error: expected {expected}, found {found}"),
            ParseErrorKind::Semantic(e) => write!(f, "{e}"),
            ParseErrorKind::Expansion(msg) => write!(f, "expansion error: {msg}"),
        }
    }
}

/// Parses and expands in one go.
pub fn compile(source: &SourceProgram) -> Result<FlatProgram, ParseError> {
    let ast = parse(source)?;
    expand(&ast)
}
