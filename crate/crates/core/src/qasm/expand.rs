//! Macro expansion and register broadcasting into a flat, executable list.

use std::collections::HashMap;

use serde::Serialize;

use super::ast::{Ast, GateApply, Operand, StmtKind};
use super::qelib;
use super::{ParseError, ParseErrorKind, Span};
use crate::state::GateKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegisterLayout {
    pub name: String,
    pub size: usize,
    /// First global index (qubit or classical bit) of this register.
    pub offset: usize,
}

/// Classical guard on a flat statement. Statements expanded from the same
/// source `if` share a `group`, so the guard is evaluated once per group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub creg: usize,
    pub value: u64,
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum FlatOp {
    Gate {
        gate: GateKind,
        params: Vec<f64>,
        qubits: Vec<usize>,
    },
    Measure {
        qubit: usize,
        creg: usize,
        bit: usize,
    },
    Reset {
        qubit: usize,
    },
    Barrier {
        qubits: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatStmt {
    pub op: FlatOp,
    pub condition: Option<Condition>,
    /// Span of the source statement this came from.
    pub span: Span,
}

/// Fully expanded program: only built-in gates, no broadcasting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatProgram {
    pub origin: String,
    pub qregs: Vec<RegisterLayout>,
    pub cregs: Vec<RegisterLayout>,
    pub statements: Vec<FlatStmt>,
}

impl FlatProgram {
    pub fn num_qubits(&self) -> usize {
        self.qregs.iter().map(|r| r.size).sum()
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Name like `q[2]` for a global qubit index.
    pub fn qubit_name(&self, qubit: usize) -> String {
        self.qregs
            .iter()
            .find(|r| qubit >= r.offset && qubit < r.offset + r.size)
            .map_or_else(|| format!("#{qubit}"), |r| format!("{}[{}]", r.name, qubit - r.offset))
    }

    /// Source-like text of one flat statement, e.g. `if(c==1) x q[2]`.
    pub fn statement_text(&self, idx: usize) -> String {
        let st = &self.statements[idx];
        let mut body = match &st.op {
            FlatOp::Gate { gate, params, qubits } => {
                let mut s = gate.name().to_string();
                if !params.is_empty() {
                    let ps: Vec<String> = params.iter().map(|p| format!("{p}")).collect();
                    s.push_str(&format!("({})", ps.join(",")));
                }
                let qs: Vec<String> = qubits.iter().map(|&q| self.qubit_name(q)).collect();
                format!("{s} {}", qs.join(","))
            }
            FlatOp::Measure { qubit, creg, bit } => {
                format!("measure {} -> {}[{bit}]", self.qubit_name(*qubit), self.cregs[*creg].name)
            }
            FlatOp::Reset { qubit } => format!("reset {}", self.qubit_name(*qubit)),
            FlatOp::Barrier { qubits } => {
                let qs: Vec<String> = qubits.iter().map(|&q| self.qubit_name(q)).collect();
                format!("barrier {}", qs.join(","))
            }
        };
        if let Some(c) = &st.condition {
            body = format!("if({}=={}) {body}", self.cregs[c.creg].name, c.value);
        }
        body
    }

    /// One listing line: index, source position and text.
    pub fn render_statement(&self, idx: usize) -> String {
        let span = self.statements[idx].span;
        format!("{idx:>4}  {:>4}:{:<3} {}", span.line, span.col, self.statement_text(idx))
    }

    pub fn listing(&self) -> String {
        (0..self.len()).map(|i| self.render_statement(i) + "\n").collect()
    }
}

struct Expander<'a> {
    ast: &'a Ast,
    qelib: bool,
    qregs: HashMap<&'a str, (usize, usize)>,
    cregs: HashMap<&'a str, (usize, usize, usize)>,
    out: Vec<FlatStmt>,
    next_group: usize,
}

/// Inlines user gate definitions and unrolls register-wide operations.
pub fn expand(ast: &Ast) -> Result<FlatProgram, ParseError> {
    let mut qregs_layout = Vec::new();
    let mut offset = 0;
    for r in &ast.qregs {
        qregs_layout.push(RegisterLayout {
            name: r.name.clone(),
            size: r.size,
            offset,
        });
        offset += r.size;
    }
    let mut cregs_layout = Vec::new();
    offset = 0;
    for r in &ast.cregs {
        cregs_layout.push(RegisterLayout {
            name: r.name.clone(),
            size: r.size,
            offset,
        });
        offset += r.size;
    }
    let mut ex = Expander {
        ast,
        qelib: ast.includes.iter().any(|i| i == qelib::QELIB1),
        qregs: ast
            .qregs
            .iter()
            .zip(&qregs_layout)
            .map(|(r, l)| (r.name.as_str(), (l.offset, l.size)))
            .collect(),
        cregs: ast
            .cregs
            .iter()
            .zip(&cregs_layout)
            .enumerate()
            .map(|(i, (r, l))| (r.name.as_str(), (i, l.offset, l.size)))
            .collect(),
        out: Vec::new(),
        next_group: 0,
    };
    for st in &ast.statements {
        let condition = match &st.kind {
            StmtKind::If { creg, value, .. } => {
                let group = ex.next_group;
                ex.next_group += 1;
                Some(Condition {
                    creg: ex.cregs[creg.as_str()].0,
                    value: *value,
                    group,
                })
            }
            _ => None,
        };
        let kind = match &st.kind {
            StmtKind::If { body, .. } => body.as_ref(),
            k => k,
        };
        ex.statement(kind, condition, st.span).map_err(|msg| ParseError {
            origin: ast.origin.clone(),
            span: st.span,
            kind: ParseErrorKind::Expansion(msg),
        })?;
    }
    Ok(FlatProgram {
        origin: ast.origin.clone(),
        qregs: qregs_layout,
        cregs: cregs_layout,
        statements: ex.out,
    })
}

impl Expander<'_> {
    fn qubits_of(&self, op: &Operand) -> Vec<usize> {
        match op {
            Operand::Register(r) => {
                let (off, size) = self.qregs[r.as_str()];
                (off..off + size).collect()
            }
            Operand::Indexed(r, i) => vec![self.qregs[r.as_str()].0 + *i as usize],
        }
    }

    /// Broadcast width of a set of operands: 1 if all are indexed, else the
    /// common register size.
    fn broadcast(&self, groups: &[Vec<usize>], what: &str) -> Result<usize, String> {
        let mut width = 1;
        for g in groups {
            if g.len() != 1 {
                if width != 1 && width != g.len() {
                    return Err(format!("register size mismatch in {what}: {width} vs {}", g.len()));
                }
                width = g.len();
            }
        }
        Ok(width)
    }

    fn push(&mut self, op: FlatOp, condition: &Option<Condition>, span: Span) {
        self.out.push(FlatStmt {
            op,
            condition: condition.clone(),
            span,
        });
    }

    fn statement(&mut self, kind: &StmtKind, cond: Option<Condition>, span: Span) -> Result<(), String> {
        match kind {
            StmtKind::Gate(g) => {
                let groups: Vec<Vec<usize>> = g.targets.iter().map(|t| self.qubits_of(t)).collect();
                let width = self.broadcast(&groups, &format!("`{}`", g.name))?;
                let env = HashMap::new();
                let params: Vec<f64> = g.params.iter().map(|p| p.eval(&env)).collect();
                for k in 0..width {
                    let qubits: Vec<usize> = groups.iter().map(|q| if q.len() == 1 { q[0] } else { q[k] }).collect();
                    for (i, a) in qubits.iter().enumerate() {
                        if qubits[..i].contains(a) {
                            return Err(format!("`{}` would act twice on qubit {a}", g.name));
                        }
                    }
                    self.apply(&g.name, &params, &qubits, &cond, span, 0)?;
                }
            }
            StmtKind::Measure { qubit, clbit } => {
                let qs = self.qubits_of(qubit);
                let cs: Vec<(usize, usize)> = match clbit {
                    Operand::Register(r) => {
                        let (idx, _, size) = self.cregs[r.as_str()];
                        (0..size).map(|b| (idx, b)).collect()
                    }
                    Operand::Indexed(r, b) => vec![(self.cregs[r.as_str()].0, *b as usize)],
                };
                if qs.len() != cs.len() {
                    return Err(format!(
                        "register size mismatch in measure: {} qubits vs {} bits",
                        qs.len(),
                        cs.len()
                    ));
                }
                for (q, (creg, bit)) in qs.into_iter().zip(cs) {
                    self.push(FlatOp::Measure { qubit: q, creg, bit }, &cond, span);
                }
            }
            StmtKind::Reset(op) => {
                for q in self.qubits_of(op) {
                    self.push(FlatOp::Reset { qubit: q }, &cond, span);
                }
            }
            StmtKind::Barrier(ops) => {
                let qubits = ops.iter().flat_map(|o| self.qubits_of(o)).collect();
                self.push(FlatOp::Barrier { qubits }, &cond, span);
            }
            StmtKind::If { .. } => unreachable!("nested if rejected by parser"),
        }
        Ok(())
    }

    fn apply(
        &mut self,
        name: &str,
        params: &[f64],
        qubits: &[usize],
        cond: &Option<Condition>,
        span: Span,
        depth: usize,
    ) -> Result<(), String> {
        if let Some(gate) = qelib::lookup(name, self.qelib) {
            self.push(
                FlatOp::Gate {
                    gate,
                    params: params.to_vec(),
                    qubits: qubits.to_vec(),
                },
                cond,
                span,
            );
            return Ok(());
        }
        // definitions can only use earlier gates, so this bound is never hit
        // by a program that passed the parser
        if depth > 256 {
            return Err(format!("gate `{name}` nests too deeply"));
        }
        let def = self.ast.gate_def(name).ok_or_else(|| format!("unknown gate `{name}`"))?;
        let env: HashMap<String, f64> = def.params.iter().cloned().zip(params.iter().copied()).collect();
        let formal: HashMap<&str, usize> = def.qubits.iter().map(String::as_str).zip(qubits.iter().copied()).collect();
        let body: Vec<GateApply> = def.body.clone();
        for inner in &body {
            let ps: Vec<f64> = inner.params.iter().map(|p| p.eval(&env)).collect();
            let qs: Vec<usize> = inner.targets.iter().map(|t| formal[t.register()]).collect();
            self.apply(&inner.name, &ps, &qs, cond, span, depth + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::{parse, SourceProgram};
    use crate::samples::SUPERPOSITION_DEMO;

    fn flat(s: &str) -> Result<FlatProgram, ParseError> {
        expand(&parse(&SourceProgram::inline(s)).unwrap())
    }

    const HDR: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[1];\n";

    #[test]
    fn no_macros_is_identity() {
        let p = flat(SUPERPOSITION_DEMO).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(
            p.statements[4].op,
            FlatOp::Gate {
                gate: GateKind::Cx,
                params: vec![],
                qubits: vec![1, 2]
            }
        );
        assert_eq!(p.statements[5].op, FlatOp::Measure { qubit: 2, creg: 0, bit: 0 });
    }

    #[test]
    fn user_gate_is_inlined_with_spans() {
        let p = flat(&format!("{HDR}gate bell a,b {{ h a; cx a,b; }}\nbell q[2], q[0];")).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(
            p.statements[1].op,
            FlatOp::Gate {
                gate: GateKind::Cx,
                params: vec![],
                qubits: vec![2, 0]
            }
        );
        assert!(p.statements.iter().all(|s| s.span.line == 6));
    }

    #[test]
    fn nested_parameterised_macros() {
        let p = flat(&format!(
            "{HDR}gate r(t) a {{ rz(t/2) a; }}\ngate rr(t) a, b {{ r(t*2) a; r(-t) b; }}\nrr(pi) q[0], q[1];"
        ))
        .unwrap();
        let angles: Vec<f64> = p
            .statements
            .iter()
            .map(|s| match &s.op {
                FlatOp::Gate { params, .. } => params[0],
                _ => panic!(),
            })
            .collect();
        assert_eq!(angles, [std::f64::consts::PI, -std::f64::consts::FRAC_PI_2]);
    }

    #[test]
    fn measure_size_mismatch() {
        let e = flat(&format!("{HDR}measure q -> c;")).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Expansion(_)));
    }

    #[test]
    fn broadcast_unrolls_index_wise() {
        let p =
            flat("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg a[2];\nqreg b[2];\ncreg c[2];\ncx a, b;\nh a;\nmeasure b -> c;").unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(
            p.statements[1].op,
            FlatOp::Gate {
                gate: GateKind::Cx,
                params: vec![],
                qubits: vec![1, 3]
            }
        );
        assert_eq!(p.statements[5].op, FlatOp::Measure { qubit: 3, creg: 0, bit: 1 });
    }

    #[test]
    fn conditional_group_shared_by_expansion() {
        let p = flat(&format!(
            "{HDR}gate bell a,b {{ h a; cx a,b; }}\nif(c==1) bell q[0],q[1];\nif(c==0) x q[2];"
        ))
        .unwrap();
        assert_eq!(p.len(), 3);
        let groups: Vec<usize> = p.statements.iter().map(|s| s.condition.as_ref().unwrap().group).collect();
        assert_eq!(groups, [0, 0, 1]);
    }

    #[test]
    fn listing_shows_index_and_span() {
        let p = flat(SUPERPOSITION_DEMO).unwrap();
        assert!(p.listing().lines().nth(4).unwrap().contains("cx q[1],q[2]"));
    }
}
