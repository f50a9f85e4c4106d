use std::fmt::{self, Display, Write};

use super::ast::*;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        _ => 4,
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{:?}` keeps a decimal point, so the literal re-lexes as a real
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => {
                if prec(e) < 3 {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-{e}")
                }
            }
            Expr::Bin(op, a, b) => {
                let p = prec(self);
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                if prec(a) < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {sym} ")?;
                // operators are left-associative, so an equal-precedence right
                // operand needs parentheses
                if prec(b) <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

impl Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Register(r) => f.write_str(r),
            Operand::Indexed(r, i) => write!(f, "{r}[{i}]"),
        }
    }
}

fn join<T: Display>(items: &[T]) -> String {
    let mut s = String::new();
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{it}");
    }
    s
}

impl Display for GateApply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            write!(f, "({})", join(&self.params))?;
        }
        write!(f, " {};", join(&self.targets))
    }
}

impl Display for StmtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StmtKind::Gate(g) => write!(f, "{g}"),
            StmtKind::Measure { qubit, clbit } => write!(f, "measure {qubit} -> {clbit};"),
            StmtKind::Reset(q) => write!(f, "reset {q};"),
            StmtKind::Barrier(qs) => write!(f, "barrier {};", join(qs)),
            StmtKind::If { creg, value, body } => write!(f, "if({creg}=={value}) {body}"),
        }
    }
}

impl Display for Ast {
    /// Canonical OpenQASM text for this program.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OPENQASM {}.{};", self.version.0, self.version.1)?;
        for inc in &self.includes {
            writeln!(f, "include \"{inc}\";")?;
        }
        for r in &self.qregs {
            writeln!(f, "qreg {}[{}];", r.name, r.size)?;
        }
        for r in &self.cregs {
            writeln!(f, "creg {}[{}];", r.name, r.size)?;
        }
        for g in &self.gate_defs {
            write!(f, "gate {}", g.name)?;
            if !g.params.is_empty() {
                write!(f, "({})", g.params.join(", "))?;
            }
            writeln!(f, " {} {{", g.qubits.join(", "))?;
            for b in &g.body {
                writeln!(f, "  {b}")?;
            }
            writeln!(f, "}}")?;
        }
        for s in &self.statements {
            writeln!(f, "{}", s.kind)?;
        }
        Ok(())
    }
}
