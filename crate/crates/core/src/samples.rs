//! Small reference programs used by tests, benches and documentation.

/// Three-qubit superposition walk-through: prepare `|010>`, Hadamard every
/// qubit, entangle q[1] with q[2] and measure q[2].
pub const SUPERPOSITION_DEMO: &str = r#"OPENQASM 2.0;
include "qelib1.inc";

qreg q[3];
creg c[1];

x q[1];
h q[0];
h q[1];
h q[2];
cx q[1],q[2];
measure q[2] -> c[0];
"#;

/// Bell pair on q[0], q[1] next to a `|->` qubit on q[2], then the pair is
/// measured.
pub const BELL_PLUS_MINUS: &str = r#"OPENQASM 2.0;
include "qelib1.inc";

qreg q[3];
creg c[2];

x q[2];
h q[0];
cx q[0], q[1];
h q[2];
measure q[0] -> c[0];
measure q[1] -> c[1];
"#;

/// `H^n |1...1>`, whose amplitudes are `(-1)^{popcount(x)} / sqrt(2^n)`.
pub fn hamming_sign_program(n: usize) -> String {
    let mut s = format!("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{n}];\n");
    s.push_str("x q;\nh q;\n");
    s
}
