use std::collections::HashMap;

use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Angle expression: literals, `pi`, formal parameters, `+ - * /` and
/// unary minus.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluates with formal parameters bound in `env`. Unbound names are
    /// rejected by the parser, so a miss here means a caller bug.
    pub fn eval(&self, env: &HashMap<String, f64>) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Param(name) => *env.get(name).unwrap_or_else(|| panic!("unbound gate parameter `{name}`")),
            Expr::Neg(e) => -e.eval(env),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(env), b.eval(env));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
        }
    }
}

/// A reference to a whole register or to one of its elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Register(String),
    Indexed(String, u64),
}

impl Operand {
    pub fn register(&self) -> &str {
        match self {
            Operand::Register(r) | Operand::Indexed(r, _) => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateApply {
    pub name: String,
    pub params: Vec<Expr>,
    pub targets: Vec<Operand>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Gate(GateApply),
    Measure { qubit: Operand, clbit: Operand },
    Reset(Operand),
    Barrier(Vec<Operand>),
    If { creg: String, value: u64, body: Box<StmtKind> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDef {
    pub name: String,
    pub params: Vec<String>,
    pub qubits: Vec<String>,
    pub body: Vec<GateApply>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub size: usize,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ast {
    pub origin: String,
    pub version: (u32, u32),
    pub includes: Vec<String>,
    pub qregs: Vec<Register>,
    pub cregs: Vec<Register>,
    pub gate_defs: Vec<GateDef>,
    pub statements: Vec<Stmt>,
}

impl Ast {
    /// Equality that ignores source positions and origin.
    pub fn same_structure(&self, other: &Ast) -> bool {
        let regs =
            |a: &[Register], b: &[Register]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.name == y.name && x.size == y.size);
        self.version == other.version
            && self.includes == other.includes
            && regs(&self.qregs, &other.qregs)
            && regs(&self.cregs, &other.cregs)
            && self.gate_defs.len() == other.gate_defs.len()
            && self
                .gate_defs
                .iter()
                .zip(&other.gate_defs)
                .all(|(a, b)| a.name == b.name && a.params == b.params && a.qubits == b.qubits && a.body == b.body)
            && self.statements.len() == other.statements.len()
            && self.statements.iter().zip(&other.statements).all(|(a, b)| a.kind == b.kind)
    }

    pub fn gate_def(&self, name: &str) -> Option<&GateDef> {
        self.gate_defs.iter().find(|g| g.name == name)
    }

    pub fn total_qubits(&self) -> usize {
        self.qregs.iter().map(|r| r.size).sum()
    }
}
