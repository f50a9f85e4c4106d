//! Line-oriented interactive debugger.

use std::io::{self, BufRead, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use qdbg_core::{DebugSession, InspectRequest};

use crate::render;

const HELP: &str = "\
commands:
  s, step              execute one statement
  f, force BIT         step a measure or reset with a chosen outcome
  c, continue          run to the next breakpoint or the end
  b, break K           stop before flat statement K
  clear K              remove a breakpoint
  l, list              show the program
  state                show pc, cregs and amplitudes
  i, inspect KIND ...  superposition Q.. | separable A.. [| B..] | factor
                       | classical | regenerate | clone Q.. | tomography Q..
                       | distribution [Q..] | a JSON request object
  log [PATH]           print or append the I/O log
  q, quit              leave
";

fn numbers(words: &[&str]) -> Result<Vec<usize>> {
    words
        .iter()
        .flat_map(|w| w.split(','))
        .filter(|w| !w.is_empty())
        .map(|w| w.parse().map_err(|_| anyhow!("`{w}` is not a qubit index")))
        .collect()
}

/// Parses the argument text of `inspect`.
pub fn parse_inspect(rest: &str) -> Result<InspectRequest> {
    let rest = rest.trim();
    if rest.starts_with('{') {
        return Ok(serde_json::from_str(rest)?);
    }
    let words: Vec<&str> = rest.split_whitespace().collect();
    let Some((&kind, args)) = words.split_first() else {
        bail!("inspect needs a kind");
    };
    let subset = || -> Result<Vec<usize>> {
        let q = numbers(args)?;
        if q.is_empty() {
            bail!("`{kind}` needs qubit indices");
        }
        Ok(q)
    };
    Ok(match kind {
        "state" => InspectRequest::State,
        "superposition" | "sup" => InspectRequest::Superposition {
            subset: subset()?,
            tol_sup: None,
        },
        "separable" | "sep" => {
            let (a, b) = match args.iter().position(|w| *w == "|") {
                Some(i) => (numbers(&args[..i])?, Some(numbers(&args[i + 1..])?)),
                None => (subset()?, None),
            };
            InspectRequest::Separable { a, b, tol: None }
        }
        "factor" => InspectRequest::Factor { tol: None },
        "classical" => InspectRequest::Classical,
        "regenerate" => InspectRequest::Regenerate,
        "clone" => InspectRequest::Clone {
            subset: subset()?,
            samples: None,
            seed: None,
        },
        "tomography" | "tomo" => InspectRequest::Tomography {
            subset: subset()?,
            shots: None,
            seed: None,
            allow_entangled: false,
        },
        "distribution" | "dist" => {
            let q = numbers(args)?;
            InspectRequest::Distribution {
                subset: (!q.is_empty()).then_some(q),
                shots: None,
                seed: None,
                expected: None,
                method: None,
                param: None,
            }
        }
        other => bail!("unknown inspection `{other}`"),
    })
}

fn listing(s: &DebugSession) -> String {
    let p = s.program();
    let mut out = String::new();
    for i in 0..p.len() {
        let here = if i == s.pc() { "=>" } else { "  " };
        let bp = if s.breakpoints().contains(&i) { '*' } else { ' ' };
        let span = p.statements[i].span;
        out.push_str(&format!(
            "{here}{bp}{i:>4}  {:<32} {}:{}\n",
            p.statement_text(i),
            span.line,
            span.col
        ));
    }
    out
}

fn index(arg: Option<&str>) -> Result<usize> {
    let a = arg.ok_or_else(|| anyhow!("missing statement index"))?;
    a.parse().map_err(|_| anyhow!("`{a}` is not a statement index"))
}

/// Executes one command line. Returns `false` when the user quits.
fn command<W: Write>(s: &mut DebugSession, line: &str, out: &mut W) -> Result<bool> {
    let line = line.trim();
    let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    match cmd {
        "" => {}
        "q" | "quit" | "exit" => return Ok(false),
        "h" | "help" | "?" => out.write_all(HELP.as_bytes())?,
        "s" | "step" => {
            let ev = s.step()?;
            out.write_all(render::stop(&ev, s.program()).as_bytes())?;
        }
        "f" | "force" => {
            let bit: u8 = rest.parse().map_err(|_| anyhow!("force needs an outcome, 0 or 1"))?;
            let ev = s.step_forced(bit)?;
            out.write_all(render::stop(&ev, s.program()).as_bytes())?;
        }
        "c" | "continue" => {
            let ev = s.continue_run()?;
            out.write_all(render::stop(&ev, s.program()).as_bytes())?;
        }
        "b" | "break" => {
            let i = index(rest.split_whitespace().next())?;
            s.set_breakpoint(i)?;
            writeln!(out, "breakpoint at [{i}] {}", s.program().statement_text(i))?;
        }
        "clear" => {
            let i = index(rest.split_whitespace().next())?;
            s.clear_breakpoint(i)?;
            writeln!(out, "cleared [{i}]")?;
        }
        "l" | "list" => out.write_all(listing(s).as_bytes())?,
        "state" => {
            let r = s.inspect(&InspectRequest::State)?;
            out.write_all(render::report(&r, s.program()).as_bytes())?;
        }
        "i" | "inspect" => {
            let req = parse_inspect(rest)?;
            let r = s.inspect(&req)?;
            out.write_all(render::report(&r, s.program()).as_bytes())?;
        }
        "log" => {
            if rest.is_empty() {
                out.write_all(s.io_log_text().as_bytes())?;
            } else {
                let n = s.export_io_log(Path::new(rest))?;
                writeln!(out, "wrote {n} records to {rest}")?;
            }
        }
        other => bail!("unknown command `{other}`, try `help`"),
    }
    Ok(true)
}

/// Reads commands until end of input or `quit`. Command errors are printed
/// and do not end the session.
pub fn run<R: BufRead, W: Write>(mut s: DebugSession, input: R, mut out: W) -> io::Result<()> {
    out.write_all(render::stop(&s.entry_event(), s.program()).as_bytes())?;
    for line in input.lines() {
        let line = line?;
        match command(&mut s, &line, &mut out) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => writeln!(out, "error: {e}")?,
        }
        out.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inspect_shorthand() {
        assert_eq!(
            parse_inspect("superposition 0 1").unwrap(),
            InspectRequest::Superposition {
                subset: vec![0, 1],
                tol_sup: None
            }
        );
        assert_eq!(
            parse_inspect("sep 0 | 1,2").unwrap(),
            InspectRequest::Separable {
                a: vec![0],
                b: Some(vec![1, 2]),
                tol: None
            }
        );
        assert_eq!(parse_inspect(r#"{"kind":"factor"}"#).unwrap(), InspectRequest::Factor { tol: None });
        assert!(parse_inspect("clone").is_err());
        assert!(parse_inspect("bogus 1").is_err());
    }
}
