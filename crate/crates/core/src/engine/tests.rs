use super::*;
use crate::inspect::Superposition;
use crate::rng::shot_stream;
use crate::samples::{BELL_PLUS_MINUS, SUPERPOSITION_DEMO};

fn fig1(seed: u64) -> DebugSession {
    DebugSession::launch(&SourceProgram::inline(SUPERPOSITION_DEMO), seed).unwrap()
}

fn session(text: &str, seed: u64) -> DebugSession {
    DebugSession::launch(&SourceProgram::inline(text), seed).unwrap()
}

fn seed_with_first_draw(below_half: bool) -> u64 {
    (0..).find(|&s| (shot_stream(s, 0).uniform(0) < 0.5) == below_half).unwrap()
}

#[test]
fn launch_shapes() {
    let s = fig1(1);
    assert_eq!(s.state(), &StateVector::basis(3, "000").unwrap());
    assert_eq!(s.cregs(), OrderedMap(vec![("c".into(), "0".into())]));
    assert_eq!(s.entry_event().reason, StopReason::Entry);
    let s2 = session(BELL_PLUS_MINUS, 1);
    assert_eq!(s2.cregs(), OrderedMap(vec![("c".into(), "00".into())]));
    let big = "OPENQASM 2.0;\nqreg q[30];\n";
    assert_eq!(
        DebugSession::launch(&SourceProgram::inline(big), 0).unwrap_err(),
        EngineError::Capacity(30)
    );
}

#[test]
fn four_steps_put_q0_in_superposition() {
    let mut s = fig1(3);
    for _ in 0..4 {
        assert_eq!(s.step().unwrap().reason, StopReason::Step);
    }
    match s
        .inspect(&InspectRequest::Superposition {
            subset: vec![0],
            tol_sup: None,
        })
        .unwrap()
    {
        Report::Superposition(r) => assert_eq!(r.in_superposition, Superposition::Yes),
        other => panic!("{other:?}"),
    }
}

#[test]
fn measuring_with_low_draw_collapses_to_zero() {
    let mut s = fig1(seed_with_first_draw(true));
    s.continue_run().unwrap();
    assert_eq!(s.cregs().0[0].1, "0");
    // 1/2 (|00> - |01> + |10> - |11>) (x) |0>, q0 leftmost: sign from q1, q2 = 0
    let amps = (0..8usize)
        .map(|x| {
            let a = if x >> 2 & 1 == 1 {
                0.0
            } else if x >> 1 & 1 == 1 {
                -0.5
            } else {
                0.5
            };
            num_complex::Complex64::new(a, 0.0)
        })
        .collect();
    let expected = StateVector::from_amplitudes(amps).unwrap();
    assert!(s.state().fidelity(&expected).unwrap() > 1.0 - 1e-12);
    let mut hi = fig1(seed_with_first_draw(false));
    hi.continue_run().unwrap();
    assert_eq!(hi.cregs().0[0].1, "1");
}

#[test]
fn step_at_end_is_finished() {
    let mut s = fig1(0);
    let ev = s.continue_run().unwrap();
    assert_eq!(ev.reason, StopReason::Finished);
    assert_eq!(s.status(), Status::Finished);
    assert_eq!(s.step().unwrap_err(), EngineError::SessionFinished);
    assert_eq!(s.step().unwrap_err().code(), "finished");
}

#[test]
fn breakpoint_stops_before_cx() {
    let mut s = fig1(0);
    s.set_breakpoint(4).unwrap();
    let ev = s.continue_run().unwrap();
    assert_eq!((ev.reason, ev.pc, ev.last), (StopReason::Breakpoint, 4, Some(3)));
    assert_eq!(ev.span.unwrap().line, 11);
    // sitting on the breakpoint, continue moves on
    assert_eq!(s.continue_run().unwrap().reason, StopReason::Finished);
    assert_eq!(s.io_log().records.len(), 1);
}

#[test]
fn breakpoint_management() {
    let mut s = fig1(0);
    s.set_breakpoint(5).unwrap();
    assert_eq!(s.set_breakpoint(99).unwrap_err(), EngineError::Index { index: 99, len: 6 });
    s.clear_breakpoint(5).unwrap();
    assert_eq!(s.continue_run().unwrap().reason, StopReason::Finished);
}

#[test]
fn breakpoint_in_skipped_branch_is_not_hit() {
    let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\ncreg c[1];\nif(c==1) x q[0];\nh q[0];\n";
    let mut s = session(src, 0);
    s.set_breakpoint(0).unwrap();
    s.set_breakpoint(1).unwrap();
    let ev = s.continue_run().unwrap();
    // statement 0 is skipped, so the first stop is at 1
    assert_eq!((ev.reason, ev.pc, ev.skipped), (StopReason::Breakpoint, 1, true));
    let mut t = session(src, 0);
    t.set_breakpoint(0).unwrap();
    assert_eq!(t.continue_run().unwrap().reason, StopReason::Finished);
}

#[test]
fn conditionals_use_c0_as_low_bit() {
    let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nx q[0];\nmeasure q[0] -> c[0];\nif(c==1) x q[1];\nif(c==2) x q[0];\n";
    let mut s = session(src, 0);
    s.continue_run().unwrap();
    assert_eq!(s.creg_value("c"), Some(1));
    assert_eq!(s.state(), &StateVector::basis(2, "11").unwrap());
}

#[test]
fn condition_is_evaluated_once_per_group() {
    // the broadcast measure changes c mid-group; both halves still run
    let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nx q;\nif(c==0) measure q -> c;\n";
    let mut s = session(src, 0);
    s.continue_run().unwrap();
    assert_eq!(s.cregs().0[0].1, "11");
}

#[test]
fn factor_after_bell_prefix() {
    let mut s = session(BELL_PLUS_MINUS, 0);
    for _ in 0..4 {
        s.step().unwrap();
    }
    let Report::Factor(r) = s.inspect(&InspectRequest::Factor { tol: None }).unwrap() else {
        panic!()
    };
    assert_eq!(r.block_qubits(), vec![vec![0, 1], vec![2]]);
    let Report::Regenerate(g) = s.inspect(&InspectRequest::Regenerate).unwrap() else {
        panic!()
    };
    assert!(g.fidelity.0 > 1.0 - 1e-12);
}

#[test]
fn classical_description_records_measurement() {
    let mut s = fig1(11);
    s.continue_run().unwrap();
    let Report::Classical(d) = s.inspect(&InspectRequest::Classical).unwrap() else {
        panic!()
    };
    assert_eq!(d.initial_bits, "010");
    assert_eq!(d.forced_outcomes.len(), 1);
    assert_eq!(d.forced_outcomes[0].record.qubit, 2);
    assert_eq!(d.forced_outcomes[0].position, 4);
    assert!(d.replay_fidelity.0 > 1.0 - 1e-9);
}

#[test]
fn forced_step_consumes_no_draw() {
    let mut s = fig1(5);
    assert_eq!(s.step_forced(0).unwrap_err().code(), "invalid_force");
    for _ in 0..5 {
        s.step().unwrap();
    }
    assert_eq!(s.step_forced(2).unwrap_err(), EngineError::BadOutcome(2));
    let ev = s.step_forced(1).unwrap();
    assert_eq!(ev.measurement.unwrap().outcome, 1);
    assert_eq!(s.draws(), 0);
    assert!(matches!(
        s.provenance().events.last(),
        Some(ProvenanceEvent::Measure { forced: true, .. })
    ));
}

#[test]
fn impossible_forced_outcome_leaves_state() {
    let src = "OPENQASM 2.0;\nqreg q[1];\ncreg c[1];\nmeasure q[0] -> c[0];\n";
    let mut s = session(src, 0);
    let err = s.step_forced(1).unwrap_err();
    assert_eq!(err.code(), "impossible_outcome");
    assert_eq!(s.pc(), 0);
    assert_eq!(s.step_forced(0).unwrap().reason, StopReason::Finished);
}

#[test]
fn io_log_contents() {
    let empty = fig1(0);
    assert_eq!(empty.io_log_text().lines().count(), 1);
    let mut s = fig1(9);
    s.continue_run().unwrap();
    let text = s.io_log_text();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let rec: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    let meas = s
        .provenance()
        .events
        .iter()
        .find_map(|e| match e {
            ProvenanceEvent::Measure { record, .. } => Some(*record),
            _ => None,
        })
        .unwrap();
    assert_eq!(rec["events"][0]["outcome"], meas.outcome);
    assert_eq!(rec["events"][0]["stmt"], 5);
    assert_eq!(rec["init"], "000");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("io.ndjson");
    s.export_io_log(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn determinism_and_step_continue_equivalence() {
    let mut a = fig1(77);
    let mut b = fig1(77);
    a.continue_run().unwrap();
    while b.step().unwrap().reason != StopReason::Finished {}
    assert_eq!(a.provenance(), b.provenance());
    assert_eq!(a.cregs(), b.cregs());
    assert!(a.state().fidelity(b.state()).unwrap() > 1.0 - 1e-15);
    assert_eq!(a.io_log_text(), b.io_log_text());
}

#[test]
fn imported_state_session() {
    let program = compile(&SourceProgram::inline(SUPERPOSITION_DEMO)).unwrap();
    let st = StateVector::basis(3, "111").unwrap();
    let s = DebugSession::launch_with_state(program, "x", st, SessionOptions::new(0)).unwrap();
    let err = s.inspect(&InspectRequest::Classical).unwrap_err();
    assert_eq!(err.code(), "provenance_unavailable");
}

#[test]
fn inspect_requests_parse_from_json() {
    let r: InspectRequest = serde_json::from_str(r#"{"kind":"superposition","subset":[0]}"#).unwrap();
    assert_eq!(
        r,
        InspectRequest::Superposition {
            subset: vec![0],
            tol_sup: None
        }
    );
    let t: InspectRequest = serde_json::from_str(r#"{"kind":"tomography","subset":[1],"shots":100,"override":true}"#).unwrap();
    assert!(matches!(t, InspectRequest::Tomography { allow_entangled: true, .. }));
    assert!(serde_json::from_str::<InspectRequest>(r#"{"kind":"nope"}"#).is_err());
}

#[test]
fn distribution_and_clone_reports() {
    let mut s = session(BELL_PLUS_MINUS, 2);
    for _ in 0..4 {
        s.step().unwrap();
    }
    let req: InspectRequest = serde_json::from_str(
        r#"{"kind":"distribution","subset":[0,1],"shots":2000,"expected":{"probs":{"00":0.5,"11":0.5}},"method":"chi2","param":0.01}"#,
    )
    .unwrap();
    let Report::Distribution(d) = s.inspect(&req).unwrap() else {
        panic!()
    };
    assert_eq!(d.exact.keys().collect::<Vec<_>>(), ["00", "11"]);
    assert!(d.verdict.unwrap().pass);
    let json = s
        .inspect(&InspectRequest::Clone {
            subset: vec![2],
            samples: Some(10),
            seed: None,
        })
        .unwrap()
        .to_json();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["kind"], "clone");
    assert_eq!(v["samples"]["shots"], 10);
    assert!(v.get("original_marginal").is_none());
}
