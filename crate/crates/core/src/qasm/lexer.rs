//! Tokenizer for the supported OpenQASM 2.0 subset.

use std::fmt;

use super::{ParseError, ParseErrorKind, SourceProgram, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    OpenQasm,
    Include,
    Qreg,
    Creg,
    Gate,
    Measure,
    Reset,
    Barrier,
    If,
    Opaque,
    Pi,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Arrow,
    EqEq,
    Plus,
    Minus,
    Star,
    Slash,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Int(v) => write!(f, "integer `{v}`"),
            TokenKind::Real(v) => write!(f, "real `{v}`"),
            TokenKind::Str(s) => write!(f, "string \"{s}\""),
            TokenKind::OpenQasm => f.write_str("`OPENQASM`"),
            TokenKind::Include => f.write_str("`include`"),
            TokenKind::Qreg => f.write_str("`qreg`"),
            TokenKind::Creg => f.write_str("`creg`"),
            TokenKind::Gate => f.write_str("`gate`"),
            TokenKind::Measure => f.write_str("`measure`"),
            TokenKind::Reset => f.write_str("`reset`"),
            TokenKind::Barrier => f.write_str("`barrier`"),
            TokenKind::If => f.write_str("`if`"),
            TokenKind::Opaque => f.write_str("`opaque`"),
            TokenKind::Pi => f.write_str("`pi`"),
            TokenKind::LBracket => f.write_str("`[`"),
            TokenKind::RBracket => f.write_str("`]`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::Semi => f.write_str("`;`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Arrow => f.write_str("`->`"),
            TokenKind::EqEq => f.write_str("`==`"),
            TokenKind::Plus => f.write_str("`+`"),
            TokenKind::Minus => f.write_str("`-`"),
            TokenKind::Star => f.write_str("`*`"),
            TokenKind::Slash => f.write_str("`/`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            chars: text.char_indices().peekable(),
            text,
            line: 1,
            col: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.text.len(), |&(i, _)| i)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span {
            line: self.line,
            col: self.col,
        }
    }
}

/// Splits `source` into tokens, dropping whitespace and `//` comments.
pub fn tokenize(source: &SourceProgram) -> Result<Vec<Token>, ParseError> {
    let text = source.text.as_str();
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    let err = |kind, span| ParseError {
        origin: source.origin.clone(),
        span,
        kind,
    };

    while let Some(c) = cur.peek() {
        let span = cur.span();
        if c == ' ' || c == '\t' || c == '\r' || c == '\n' {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek_second() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let start = cur.offset();
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                cur.bump();
            }
            let end = cur.offset();
            keyword_or_ident(&text[start..end])
        } else if c.is_ascii_digit() || (c == '.' && matches!(cur.peek_second(), Some(d) if d.is_ascii_digit())) {
            lex_number(&mut cur, text).map_err(|k| err(k, span))?
        } else if c == '"' {
            cur.bump();
            let start = cur.offset();
            loop {
                match cur.peek() {
                    Some('"') => break,
                    Some('\n') | None => {
                        return Err(err(
                            ParseErrorKind::Syntax {
                                expected: "closing `\"`".into(),
                                found: "end of line".into(),
                            },
                            span,
                        ))
                    }
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            let end = cur.offset();
            cur.bump();
            TokenKind::Str(text[start..end].to_string())
        } else {
            cur.bump();
            match c {
                '[' => TokenKind::LBracket,
                ']' => TokenKind::RBracket,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                '{' => TokenKind::LBrace,
                '}' => TokenKind::RBrace,
                ';' => TokenKind::Semi,
                ',' => TokenKind::Comma,
                '+' => TokenKind::Plus,
                '*' => TokenKind::Star,
                '/' => TokenKind::Slash,
                '-' if cur.peek() == Some('>') => {
                    cur.bump();
                    TokenKind::Arrow
                }
                '-' => TokenKind::Minus,
                '=' if cur.peek() == Some('=') => {
                    cur.bump();
                    TokenKind::EqEq
                }
                other => return Err(err(ParseErrorKind::InvalidCharacter(other), span)),
            }
        };
        out.push(Token { kind, span });
    }
    Ok(out)
}

fn keyword_or_ident(word: &str) -> TokenKind {
    match word {
        "OPENQASM" => TokenKind::OpenQasm,
        "include" => TokenKind::Include,
        "qreg" => TokenKind::Qreg,
        "creg" => TokenKind::Creg,
        "gate" => TokenKind::Gate,
        "measure" => TokenKind::Measure,
        "reset" => TokenKind::Reset,
        "barrier" => TokenKind::Barrier,
        "if" => TokenKind::If,
        "opaque" => TokenKind::Opaque,
        "pi" => TokenKind::Pi,
        _ => TokenKind::Ident(word.to_string()),
    }
}

fn lex_number(cur: &mut Cursor<'_>, text: &str) -> Result<TokenKind, ParseErrorKind> {
    let start = cur.offset();
    let mut is_real = false;
    while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
        cur.bump();
    }
    if cur.peek() == Some('.') {
        is_real = true;
        cur.bump();
        while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let sign_ok = match cur.peek_second() {
            Some(d) if d.is_ascii_digit() => true,
            Some('+' | '-') => true,
            _ => false,
        };
        if sign_ok {
            is_real = true;
            cur.bump();
            if matches!(cur.peek(), Some('+' | '-')) {
                cur.bump();
            }
            if !matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                return Err(ParseErrorKind::Syntax {
                    expected: "exponent digits".into(),
                    found: cur.peek().map_or("end of input".into(), |c| format!("`{c}`")),
                });
            }
            while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
    let lit = &text[start..cur.offset()];
    if is_real {
        lit.parse::<f64>().map(TokenKind::Real).map_err(|_| ParseErrorKind::Syntax {
            expected: "real literal".into(),
            found: format!("`{lit}`"),
        })
    } else {
        lit.parse::<u64>().map(TokenKind::Int).map_err(|_| ParseErrorKind::Syntax {
            expected: "integer that fits in 64 bits".into(),
            found: format!("`{lit}`"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(&SourceProgram::inline(text))
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn lexes_single_gate_statement() {
        assert_eq!(
            kinds("x q[1];"),
            vec![
                TokenKind::Ident("x".into()),
                TokenKind::Ident("q".into()),
                TokenKind::LBracket,
                TokenKind::Int(1),
                TokenKind::RBracket,
                TokenKind::Semi,
            ]
        );
    }

    #[test]
    fn control_byte_is_rejected_with_location() {
        let e = tokenize(&SourceProgram::inline("x q[1]\u{1}")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::InvalidCharacter('\u{1}'));
        assert_eq!((e.span.line, e.span.col), (1, 7));
    }

    #[test]
    fn comments_are_stripped_and_spans_track_lines() {
        let toks = tokenize(&SourceProgram::inline("// hello\r\n  h q[0]; // tail\n")).unwrap();
        assert_eq!(toks.len(), 6);
        assert_eq!((toks[0].span.line, toks[0].span.col), (2, 3));
    }

    #[test]
    fn numbers_and_operators() {
        assert_eq!(
            kinds("rz(-pi/2.5e0) -> =="),
            vec![
                TokenKind::Ident("rz".into()),
                TokenKind::LParen,
                TokenKind::Minus,
                TokenKind::Pi,
                TokenKind::Slash,
                TokenKind::Real(2.5),
                TokenKind::RParen,
                TokenKind::Arrow,
                TokenKind::EqEq,
            ]
        );
        assert_eq!(kinds(".5"), vec![TokenKind::Real(0.5)]);
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(tokenize(&SourceProgram::inline("include \"qelib1.inc;\n")).is_err());
    }
}
