//! Human-readable output.

use std::fmt::Write;

use qdbg_core::inspect::{Superposition, NON_CLASSICAL};
use qdbg_core::state::DensityMatrix;
use qdbg_core::stats::{AssertionVerdict, TomographyEstimate};
use qdbg_core::{EmpiricalDistribution, FlatProgram, Report, StopEvent, StopReason};

fn qubits(q: &[usize]) -> String {
    let parts: Vec<String> = q.iter().map(|i| format!("q[{i}]")).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn distribution(d: &EmpiricalDistribution) -> String {
    let mut s = String::new();
    let width = d.counts.keys().map(String::len).max().unwrap_or(0);
    for (k, c) in &d.counts {
        let _ = writeln!(s, "{k:<width$}  {c:>8}  {:.4}", d.frequency(k));
    }
    let _ = writeln!(s, "shots: {}", d.shots);
    s
}

pub fn verdict(v: &AssertionVerdict) -> String {
    let dof = v.dof.map(|d| format!(" dof={d}")).unwrap_or_default();
    format!(
        "{} {}: statistic={:.6} critical={:.6} param={}{}",
        if v.pass { "PASS" } else { "FAIL" },
        v.method,
        v.statistic.0,
        v.critical.0,
        v.param.0,
        dof
    )
}

pub fn density(rho: &DensityMatrix) -> String {
    let m = rho.matrix();
    let mut s = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| format!("{:+.4}{:+.4}i", m[(r, c)].re, m[(r, c)].im))
            .collect();
        let _ = writeln!(s, "  [{}]", row.join("  "));
    }
    s
}

pub fn tomography(t: &TomographyEstimate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "subset {}", qubits(&t.subset));
    match t.shots_per_setting {
        Some(n) => {
            let _ = writeln!(s, "settings: {} x {n} shots", t.settings.len());
        }
        None => {
            let _ = writeln!(s, "settings: {} (exact)", t.settings.len());
        }
    }
    let _ = writeln!(s, "purity: {:.6}", t.purity.0);
    if let Some([x, y, z]) = &t.bloch {
        let _ = writeln!(s, "bloch: ({:.6}, {:.6}, {:.6})", x.0, y.0, z.0);
    }
    s.push_str("rho:\n");
    s.push_str(&density(&t.rho_hat));
    s
}

pub fn stop(ev: &StopEvent, program: &FlatProgram) -> String {
    let mut s = match ev.reason {
        StopReason::Finished => "finished".to_string(),
        reason => {
            let what = match reason {
                StopReason::Entry => "entry",
                StopReason::Breakpoint => "breakpoint",
                _ => "stopped",
            };
            format!("{what} before [{}] {}", ev.pc, program.statement_text(ev.pc))
        }
    };
    if let Some(span) = ev.span {
        let _ = write!(s, "  (line {}:{})", span.line, span.col);
    }
    if let Some(m) = ev.measurement {
        let _ = write!(
            s,
            "\n  measured {} -> {} (p={:.6})",
            program.qubit_name(m.qubit),
            m.outcome,
            m.probability
        );
    }
    if ev.skipped {
        s.push_str("\n  condition false, statement skipped");
    }
    s.push('\n');
    s
}

pub fn report(r: &Report, program: &FlatProgram) -> String {
    let mut s = String::new();
    match r {
        Report::State(st) => {
            let _ = writeln!(s, "pc {} ({:?}), {} qubits", st.pc, st.status, st.qubits);
            for (name, bits) in &st.cregs.0 {
                let _ = writeln!(s, "creg {name} = {bits}");
            }
            s.push_str(&st.amplitudes.dump());
        }
        Report::Superposition(sp) => {
            let verdict = match sp.in_superposition {
                Superposition::Yes => "yes".to_string(),
                Superposition::No => "no".to_string(),
                Superposition::IndeterminateEntangled => {
                    format!("indeterminate: entangled with the rest (sigma2={:.3e})", sp.sigma2.0)
                }
            };
            let _ = writeln!(s, "subset {} in superposition: {verdict}", qubits(&sp.subset));
            for e in &sp.support {
                let _ = writeln!(s, "  {}  p={:.6}", e.bits, e.probability.0);
            }
        }
        Report::Separable(sp) => {
            let _ = writeln!(
                s,
                "{} | {}: {} (sigma2={:.3e})",
                qubits(&sp.a),
                qubits(&sp.b),
                if sp.separable { "separable" } else { "entangled" },
                sp.sigma2.0
            );
        }
        Report::Factor(f) => {
            for b in &f.blocks {
                let _ = writeln!(s, "block {}:", qubits(&b.qubits));
                for line in b.state.dump().lines() {
                    let _ = writeln!(s, "  {line}");
                }
            }
            let _ = writeln!(s, "residual: {:.3e}", f.residual.0);
            let _ = writeln!(s, "reconstruction fidelity: {:.12}", f.reconstruction_fidelity.0);
        }
        Report::Classical(d) => {
            let _ = writeln!(s, "initial: {}", d.initial_bits);
            for (i, op) in d.operator_trace.iter().enumerate() {
                let params = if op.params.is_empty() {
                    String::new()
                } else {
                    let p: Vec<String> = op.params.iter().map(|x| format!("{x}")).collect();
                    format!("({})", p.join(","))
                };
                let _ = writeln!(s, "  {i:>3}  {}{params} {}", op.gate.name(), qubits(&op.qubits));
            }
            for f in &d.forced_outcomes {
                let what = if f.reset { "reset" } else { "measure" };
                let _ = writeln!(
                    s,
                    "  at {}: {what} {} = {}",
                    f.position,
                    program.qubit_name(f.record.qubit),
                    f.record.outcome
                );
            }
            for b in &d.per_block_basis {
                let basis = if b.basis == NON_CLASSICAL { "non-classical" } else { &b.basis };
                let _ = writeln!(s, "block {}: {basis}", qubits(&b.qubits));
            }
            let _ = writeln!(s, "replay fidelity: {:.12}", d.replay_fidelity.0);
        }
        Report::Regenerate(g) => {
            let _ = writeln!(s, "regenerated from {} events, fidelity {:.15}", g.events_replayed, g.fidelity.0);
        }
        Report::Clone(c) => {
            let _ = writeln!(
                s,
                "clone of {}: shrink factor {:.6}, expected fidelity {:.6}",
                qubits(&c.result.subset),
                c.result.shrink_factor.0,
                c.result.expected_fidelity.0
            );
            s.push_str(&density(&c.result.clone));
            if let Some(o) = &c.result.original_marginal {
                s.push_str("original after cloning:\n");
                s.push_str(&density(o));
            }
            if let Some(d) = &c.samples {
                s.push_str("samples:\n");
                s.push_str(&distribution(d));
            }
        }
        Report::Tomography(t) => s.push_str(&tomography(t)),
        Report::Distribution(d) => {
            let _ = writeln!(s, "subset {}", qubits(&d.subset));
            for (k, p) in &d.exact {
                let observed = d
                    .empirical
                    .as_ref()
                    .map(|e| format!("  observed {:.4}", e.frequency(k)))
                    .unwrap_or_default();
                let _ = writeln!(s, "  {k}  p={:.6}{observed}", p.0);
            }
            if let Some(e) = &d.empirical {
                let _ = writeln!(s, "shots: {}", e.shots);
            }
            if let Some(v) = &d.verdict {
                let _ = writeln!(s, "{}", verdict(v));
            }
        }
    }
    s
}
