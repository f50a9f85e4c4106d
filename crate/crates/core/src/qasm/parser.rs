//! Recursive-descent parser with the semantic checks folded in.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::qelib;
use super::{ParseError, ParseErrorKind, SemanticError, SourceProgram, Span};

/// Parses `source` into a checked [`Ast`].
pub fn parse(source: &SourceProgram) -> Result<Ast, ParseError> {
    let tokens = tokenize(source)?;
    let end = end_span(&source.text);
    Parser {
        origin: &source.origin,
        tokens,
        pos: 0,
        end,
        qelib: false,
        qregs: HashMap::new(),
        cregs: HashMap::new(),
        names: HashSet::new(),
        ast: Ast {
            origin: source.origin.clone(),
            version: (2, 0),
            includes: Vec::new(),
            qregs: Vec::new(),
            cregs: Vec::new(),
            gate_defs: Vec::new(),
            statements: Vec::new(),
        },
    }
    .program()
}

fn end_span(text: &str) -> Span {
    let line = text.split('\n').count();
    let col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Span { line, col }
}

struct Parser<'a> {
    origin: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    end: Span,
    qelib: bool,
    qregs: HashMap<String, usize>,
    cregs: HashMap<String, usize>,
    names: HashSet<String>,
    ast: Ast,
}

/// Formal names visible while parsing a gate body.
struct GateScope<'s> {
    name: &'s str,
    params: &'s [String],
    qubits: &'s [String],
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn err(&self, span: Span, kind: ParseErrorKind) -> ParseError {
        ParseError {
            origin: self.origin.to_string(),
            span,
            kind,
        }
    }

    fn semantic(&self, span: Span, e: SemanticError) -> ParseError {
        self.err(span, ParseErrorKind::Semantic(e))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn span(&self) -> Span {
        self.peek().map_or(self.end, |t| t.span)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let found = self.peek().map_or_else(|| "end of input".to_string(), |t| t.kind.to_string());
        self.err(
            self.span(),
            ParseErrorKind::Syntax {
                expected: expected.to_string(),
                found,
            },
        )
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Span> {
        let span = self.span();
        if self.eat(&kind) {
            Ok(span)
        } else {
            Err(self.unexpected(&kind.to_string()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(name),
                span,
            }) => {
                let out = (name.clone(), *span);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn int(&mut self) -> PResult<(u64, Span)> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Int(v),
                span,
            }) => {
                let out = (*v, *span);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.unexpected("integer")),
        }
    }

    fn program(mut self) -> PResult<Ast> {
        self.header()?;
        while self.peek().is_some() {
            self.top_level()?;
        }
        Ok(self.ast)
    }

    fn header(&mut self) -> PResult<()> {
        self.expect(TokenKind::OpenQasm)?;
        let span = self.span();
        let version = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Real(v)) => format!("{v:?}"),
            Some(TokenKind::Int(v)) => v.to_string(),
            _ => return Err(self.unexpected("version number")),
        };
        self.pos += 1;
        if version != "2.0" {
            return Err(self.semantic(span, SemanticError::UnsupportedVersion(version)));
        }
        self.expect(TokenKind::Semi)?;
        Ok(())
    }

    fn top_level(&mut self) -> PResult<()> {
        let span = self.span();
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Include) => {
                self.pos += 1;
                let name = match self.peek().map(|t| &t.kind) {
                    Some(TokenKind::Str(s)) => s.clone(),
                    _ => return Err(self.unexpected("include file name")),
                };
                self.pos += 1;
                self.expect(TokenKind::Semi)?;
                if name != qelib::QELIB1 {
                    return Err(self.semantic(span, SemanticError::UnknownInclude(name)));
                }
                self.qelib = true;
                self.ast.includes.push(name);
            }
            Some(TokenKind::Qreg) | Some(TokenKind::Creg) => {
                let quantum = self.eat(&TokenKind::Qreg);
                if !quantum {
                    self.pos += 1;
                }
                let (name, name_span) = self.ident()?;
                self.expect(TokenKind::LBracket)?;
                let (size, size_span) = self.int()?;
                self.expect(TokenKind::RBracket)?;
                self.expect(TokenKind::Semi)?;
                if size == 0 {
                    return Err(self.semantic(size_span, SemanticError::EmptyRegister(name)));
                }
                self.declare(&name, name_span)?;
                let size = usize::try_from(size).unwrap_or(usize::MAX);
                let reg = Register {
                    name: name.clone(),
                    size,
                    span,
                };
                if quantum {
                    self.qregs.insert(name, size);
                    self.ast.qregs.push(reg);
                } else {
                    self.cregs.insert(name, size);
                    self.ast.cregs.push(reg);
                }
            }
            Some(TokenKind::Gate) => {
                self.pos += 1;
                let def = self.gate_def(span)?;
                self.ast.gate_defs.push(def);
            }
            Some(TokenKind::Opaque) => {
                return Err(self.semantic(span, SemanticError::Unsupported("`opaque` gate declaration".into())));
            }
            Some(TokenKind::OpenQasm) => return Err(self.unexpected("statement")),
            Some(_) => {
                let kind = self.statement(true)?;
                self.ast.statements.push(Stmt { kind, span });
            }
            None => return Err(self.unexpected("statement")),
        }
        Ok(())
    }

    fn declare(&mut self, name: &str, span: Span) -> PResult<()> {
        if !self.names.insert(name.to_string()) {
            return Err(self.semantic(span, SemanticError::DuplicateName(name.to_string())));
        }
        Ok(())
    }

    fn name_list(&mut self) -> PResult<Vec<(String, Span)>> {
        let mut out = vec![self.ident()?];
        while self.eat(&TokenKind::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn gate_def(&mut self, span: Span) -> PResult<GateDef> {
        let (name, name_span) = self.ident()?;
        if qelib::lookup(&name, self.qelib).is_some() {
            return Err(self.semantic(name_span, SemanticError::DuplicateName(name)));
        }
        let mut params = Vec::new();
        if self.eat(&TokenKind::LParen) && !self.eat(&TokenKind::RParen) {
            params = self.name_list()?;
            self.expect(TokenKind::RParen)?;
        }
        let qubits = self.name_list()?;
        let mut seen = HashSet::new();
        for (n, s) in params.iter().chain(&qubits) {
            if !seen.insert(n.clone()) {
                return Err(self.semantic(*s, SemanticError::DuplicateName(n.clone())));
            }
        }
        let params: Vec<String> = params.into_iter().map(|(n, _)| n).collect();
        let qubits: Vec<String> = qubits.into_iter().map(|(n, _)| n).collect();
        self.expect(TokenKind::LBrace)?;
        let mut body = Vec::new();
        let scope = GateScope {
            name: &name,
            params: &params,
            qubits: &qubits,
        };
        while !self.eat(&TokenKind::RBrace) {
            if self.peek().is_none() {
                return Err(self.unexpected("`}`"));
            }
            if self.peek().is_some_and(|t| t.kind == TokenKind::Barrier) {
                // barriers inside gate bodies carry no semantics for simulation
                self.pos += 1;
                self.name_list()?;
                self.expect(TokenKind::Semi)?;
                continue;
            }
            body.push(self.gate_apply(Some(&scope))?);
        }
        self.declare(&name, name_span)?;
        Ok(GateDef {
            name,
            params,
            qubits,
            body,
            span,
        })
    }

    /// Parses one quantum statement. `allow_if` is false inside an `if` body.
    fn statement(&mut self, allow_if: bool) -> PResult<StmtKind> {
        let span = self.span();
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Measure) => {
                self.pos += 1;
                let qubit = self.operand()?;
                self.expect(TokenKind::Arrow)?;
                let clbit = self.operand()?;
                self.expect(TokenKind::Semi)?;
                self.check_operand(&qubit, true)?;
                self.check_operand(&clbit, false)?;
                Ok(StmtKind::Measure {
                    qubit: qubit.0,
                    clbit: clbit.0,
                })
            }
            Some(TokenKind::Reset) => {
                self.pos += 1;
                let q = self.operand()?;
                self.expect(TokenKind::Semi)?;
                self.check_operand(&q, true)?;
                Ok(StmtKind::Reset(q.0))
            }
            Some(TokenKind::Barrier) => {
                self.pos += 1;
                let mut ops = vec![self.operand()?];
                while self.eat(&TokenKind::Comma) {
                    ops.push(self.operand()?);
                }
                self.expect(TokenKind::Semi)?;
                for op in &ops {
                    self.check_operand(op, true)?;
                }
                Ok(StmtKind::Barrier(ops.into_iter().map(|o| o.0).collect()))
            }
            Some(TokenKind::If) if allow_if => {
                self.pos += 1;
                self.expect(TokenKind::LParen)?;
                let (creg, creg_span) = self.ident()?;
                self.expect(TokenKind::EqEq)?;
                let (value, value_span) = self.int()?;
                self.expect(TokenKind::RParen)?;
                let Some(&bits) = self.cregs.get(&creg) else {
                    let e = if self.qregs.contains_key(&creg) {
                        SemanticError::WrongRegisterKind {
                            name: creg,
                            expected: "classical",
                        }
                    } else {
                        SemanticError::UndeclaredRegister(creg)
                    };
                    return Err(self.semantic(creg_span, e));
                };
                if bits < 64 && value >> bits != 0 {
                    return Err(self.semantic(
                        value_span,
                        SemanticError::ConditionOutOfRange {
                            register: creg,
                            value,
                            bits,
                        },
                    ));
                }
                let body = self.statement(false)?;
                if matches!(body, StmtKind::Barrier(_)) {
                    return Err(self.err(
                        span,
                        ParseErrorKind::Syntax {
                            expected: "gate, measure or reset after `if(...)`".into(),
                            found: "`barrier`".into(),
                        },
                    ));
                }
                Ok(StmtKind::If {
                    creg,
                    value,
                    body: Box::new(body),
                })
            }
            Some(TokenKind::Ident(_)) => Ok(StmtKind::Gate(self.gate_apply(None)?)),
            _ => Err(self.unexpected("statement")),
        }
    }

    fn operand(&mut self) -> PResult<(Operand, Span)> {
        let (name, span) = self.ident()?;
        if self.eat(&TokenKind::LBracket) {
            let (idx, _) = self.int()?;
            self.expect(TokenKind::RBracket)?;
            Ok((Operand::Indexed(name, idx), span))
        } else {
            Ok((Operand::Register(name), span))
        }
    }

    fn check_operand(&self, (op, span): &(Operand, Span), quantum: bool) -> PResult<()> {
        let (own, other, expected) = if quantum {
            (&self.qregs, &self.cregs, "quantum")
        } else {
            (&self.cregs, &self.qregs, "classical")
        };
        let name = op.register();
        let Some(&size) = own.get(name) else {
            let e = if other.contains_key(name) {
                SemanticError::WrongRegisterKind {
                    name: name.to_string(),
                    expected,
                }
            } else {
                SemanticError::UndeclaredRegister(name.to_string())
            };
            return Err(self.semantic(*span, e));
        };
        if let Operand::Indexed(_, idx) = op {
            if *idx >= size as u64 {
                return Err(self.semantic(
                    *span,
                    SemanticError::IndexOutOfBounds {
                        register: name.to_string(),
                        index: *idx,
                        size,
                    },
                ));
            }
        }
        Ok(())
    }

    fn gate_apply(&mut self, scope: Option<&GateScope<'_>>) -> PResult<GateApply> {
        let (name, name_span) = self.ident()?;
        let mut params = Vec::new();
        if self.eat(&TokenKind::LParen) && !self.eat(&TokenKind::RParen) {
            params.push(self.expr(scope)?);
            while self.eat(&TokenKind::Comma) {
                params.push(self.expr(scope)?);
            }
            self.expect(TokenKind::RParen)?;
        }
        let mut targets = vec![self.operand()?];
        while self.eat(&TokenKind::Comma) {
            targets.push(self.operand()?);
        }
        self.expect(TokenKind::Semi)?;

        if scope.is_some_and(|s| s.name == name) {
            return Err(self.semantic(name_span, SemanticError::RecursiveGate(name)));
        }
        let (n_params, n_qubits) = if let Some(g) = qelib::lookup(&name, self.qelib) {
            (g.num_params(), g.num_qubits())
        } else if let Some(def) = self.ast.gate_def(&name) {
            (def.params.len(), def.qubits.len())
        } else {
            return Err(self.semantic(name_span, SemanticError::UnknownGate(name)));
        };
        if params.len() != n_params {
            return Err(self.semantic(
                name_span,
                SemanticError::ArityMismatch {
                    gate: name,
                    what: "parameters",
                    expected: n_params,
                    found: params.len(),
                },
            ));
        }
        if targets.len() != n_qubits {
            return Err(self.semantic(
                name_span,
                SemanticError::ArityMismatch {
                    gate: name,
                    what: "qubit arguments",
                    expected: n_qubits,
                    found: targets.len(),
                },
            ));
        }

        match scope {
            Some(scope) => {
                for (op, span) in &targets {
                    match op {
                        Operand::Register(formal) if scope.qubits.contains(formal) => {}
                        Operand::Register(formal) => return Err(self.semantic(*span, SemanticError::UnknownIdentifier(formal.clone()))),
                        Operand::Indexed(..) => {
                            return Err(self.err(
                                *span,
                                ParseErrorKind::Syntax {
                                    expected: "formal qubit name".into(),
                                    found: "indexed register".into(),
                                },
                            ))
                        }
                    }
                }
            }
            None => {
                for t in &targets {
                    self.check_operand(t, true)?;
                }
            }
        }
        for (i, (a, span)) in targets.iter().enumerate() {
            for (b, _) in &targets[..i] {
                let clash = match (a, b) {
                    (Operand::Indexed(x, i), Operand::Indexed(y, j)) => x == y && i == j,
                    _ => a.register() == b.register(),
                };
                if clash {
                    return Err(self.semantic(*span, SemanticError::DuplicateTarget(a.register().to_string())));
                }
            }
        }
        Ok(GateApply {
            name,
            params,
            targets: targets.into_iter().map(|t| t.0).collect(),
        })
    }

    fn expr(&mut self, scope: Option<&GateScope<'_>>) -> PResult<Expr> {
        let mut lhs = self.term(scope)?;
        loop {
            let op = if self.eat(&TokenKind::Plus) {
                BinOp::Add
            } else if self.eat(&TokenKind::Minus) {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term(scope)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self, scope: Option<&GateScope<'_>>) -> PResult<Expr> {
        let mut lhs = self.unary(scope)?;
        loop {
            let op = if self.eat(&TokenKind::Star) {
                BinOp::Mul
            } else if self.eat(&TokenKind::Slash) {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary(scope)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self, scope: Option<&GateScope<'_>>) -> PResult<Expr> {
        if self.eat(&TokenKind::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary(scope)?)));
        }
        let span = self.span();
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Int(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v as f64))
            }
            Some(TokenKind::Real(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(TokenKind::Pi) => {
                self.pos += 1;
                Ok(Expr::Pi)
            }
            Some(TokenKind::Ident(name)) => {
                self.pos += 1;
                if scope.is_some_and(|s| s.params.contains(&name)) {
                    Ok(Expr::Param(name))
                } else {
                    Err(self.semantic(span, SemanticError::UnknownIdentifier(name)))
                }
            }
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let e = self.expr(scope)?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{BELL_PLUS_MINUS, SUPERPOSITION_DEMO};

    fn parse_str(s: &str) -> PResult<Ast> {
        parse(&SourceProgram::inline(s))
    }

    fn semantic(s: &str) -> SemanticError {
        match parse_str(s).unwrap_err().kind {
            ParseErrorKind::Semantic(e) => e,
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    const HDR: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[2];\n";

    #[test]
    fn superposition_demo_structure() {
        let ast = parse_str(SUPERPOSITION_DEMO).unwrap();
        assert_eq!(ast.qregs.len(), 1);
        assert_eq!((ast.qregs[0].name.as_str(), ast.qregs[0].size), ("q", 3));
        assert_eq!((ast.cregs[0].name.as_str(), ast.cregs[0].size), ("c", 1));
        let names: Vec<_> = ast
            .statements
            .iter()
            .map(|s| match &s.kind {
                StmtKind::Gate(g) => g.name.clone(),
                StmtKind::Measure { .. } => "measure".into(),
                _ => "?".into(),
            })
            .collect();
        assert_eq!(names, ["x", "h", "h", "h", "cx", "measure"]);
        assert_eq!(ast.statements[0].span, Span { line: 7, col: 1 });
    }

    #[test]
    fn bell_demo_structure() {
        let ast = parse_str(BELL_PLUS_MINUS).unwrap();
        assert_eq!(ast.cregs[0].size, 2);
        assert_eq!(ast.statements.len(), 6);
    }

    #[test]
    fn version_gate() {
        assert_eq!(
            semantic("OPENQASM 3.0;\nqreg q[1];"),
            SemanticError::UnsupportedVersion("3.0".into())
        );
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(semantic(&format!("{HDR}x r[0];")), SemanticError::UndeclaredRegister(_)));
        assert!(matches!(semantic(&format!("{HDR}x q[3];")), SemanticError::IndexOutOfBounds { .. }));
        assert!(matches!(semantic(&format!("{HDR}cx q[0];")), SemanticError::ArityMismatch { .. }));
        assert!(matches!(semantic(&format!("{HDR}rx q[0];")), SemanticError::ArityMismatch { .. }));
        assert!(matches!(
            semantic(&format!("{HDR}cx q[0],q[0];")),
            SemanticError::DuplicateTarget(_)
        ));
        assert!(matches!(semantic(&format!("{HDR}cx q,q[1];")), SemanticError::DuplicateTarget(_)));
        assert!(matches!(
            semantic(&format!("{HDR}gate g a {{ g a; }}")),
            SemanticError::RecursiveGate(_)
        ));
        assert!(matches!(
            semantic(&format!("{HDR}if(c==4) x q[0];")),
            SemanticError::ConditionOutOfRange { .. }
        ));
        assert!(matches!(
            semantic(&format!("{HDR}measure c[0] -> q[0];")),
            SemanticError::WrongRegisterKind { .. }
        ));
        assert!(matches!(semantic(&format!("{HDR}qreg q[2];")), SemanticError::DuplicateName(_)));
        assert!(matches!(semantic(&format!("{HDR}foo q[0];")), SemanticError::UnknownGate(_)));
        assert!(matches!(
            semantic(&format!("{HDR}rx(theta) q[0];")),
            SemanticError::UnknownIdentifier(_)
        ));
        assert!(matches!(semantic(&format!("{HDR}opaque g a;")), SemanticError::Unsupported(_)));
        assert!(matches!(
            semantic("OPENQASM 2.0;\ninclude \"other.inc\";"),
            SemanticError::UnknownInclude(_)
        ));
        assert!(matches!(
            semantic("OPENQASM 2.0;\nqreg q[1];\nh q[0];"),
            SemanticError::UnknownGate(_)
        ));
    }

    #[test]
    fn gate_definitions_and_expressions() {
        let ast = parse_str(&format!(
            "{HDR}gate rot(a, b) x, y {{ rx(a*2 - -b/pi) x; cx x, y; }}\nrot(pi/2, 0.5) q[0], q[1];"
        ))
        .unwrap();
        let def = &ast.gate_defs[0];
        assert_eq!(def.params, ["a", "b"]);
        assert_eq!(def.qubits, ["x", "y"]);
        assert_eq!(def.body.len(), 2);
        let mut env = HashMap::new();
        env.insert("a".to_string(), 1.0);
        env.insert("b".to_string(), std::f64::consts::PI);
        assert_eq!(def.body[0].params[0].eval(&env), 3.0);
    }

    #[test]
    fn syntax_errors_are_located() {
        let e = parse_str("OPENQASM 2.0;\nqreg q[2]\nx q[0];").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax { .. }));
        assert_eq!(e.span, Span { line: 3, col: 1 });
        assert_eq!(e.to_string(), "<inline>:3:1: syntax error: expected `;`, found identifier `x`");
        let e = parse_str("OPENQASM 2.0;\nqreg q[2];\nh q[0]").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax { .. }));
    }

    #[test]
    fn conditional_statement() {
        let ast = parse_str(&format!("{HDR}if(c==3) measure q[0] -> c[1];")).unwrap();
        assert!(matches!(
            &ast.statements[0].kind,
            StmtKind::If { creg, value: 3, body } if creg == "c" && matches!(**body, StmtKind::Measure { .. })
        ));
    }
}
