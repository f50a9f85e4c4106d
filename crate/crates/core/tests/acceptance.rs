//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its runtime; the binary exits non-zero if any check fails.
//!
//! Run alone with `cargo test -p qdbg-core --test acceptance`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use qdbg_core::inspect::{classical_description, factor_state};
use qdbg_core::samples::{hamming_sign_program, BELL_PLUS_MINUS, SUPERPOSITION_DEMO};
use qdbg_core::server::Connection;
use qdbg_core::stats::{approximate_clone, expected_clone_fidelity, run_shots, sample_clone_measurements, tomography, TomographyMode};
use qdbg_core::{compile, parse, DebugSession, SourceProgram, StateVector, StopReason};

type Check = Result<(), String>;

/// Name, time limit and check function.
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn state(amps: &[Complex64]) -> StateVector {
    StateVector::from_amplitudes(amps.to_vec()).unwrap()
}

fn random_state(rng: &mut StdRng, n: usize) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// Kronecker product in the library's bit order: qubit `k` is bit `k` of the
/// index, so `a` holds the low qubits.
fn kron_low_high(low: &[Complex64], low_bits: usize, high: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); low.len() * high.len()];
    for (h, hv) in high.iter().enumerate() {
        for (l, lv) in low.iter().enumerate() {
            out[(h << low_bits) | l] = lv * hv;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// superposition walk-through

fn superposition_walkthrough() -> Check {
    let mut s = DebugSession::launch(&SourceProgram::inline(SUPERPOSITION_DEMO), 0).map_err(|e| e.to_string())?;
    for _ in 0..5 {
        s.step().map_err(|e| e.to_string())?;
    }
    let ev = s.step_forced(0).map_err(|e| e.to_string())?;
    let m = ev.measurement.ok_or("no measurement record")?;
    ensure((m.probability - 0.5).abs() <= 1e-12, || format!("P(0) = {}", m.probability))?;
    // 1/2 (|00> - |01> + |10> - |11>) (x) |0>, written q0 q1 q2 left to right
    let mut amps = vec![c(0.0, 0.0); 8];
    for (bits, sign) in [("000", 0.5), ("010", -0.5), ("100", 0.5), ("110", -0.5)] {
        let idx = bits.chars().enumerate().map(|(k, ch)| ((ch == '1') as usize) << k).sum::<usize>();
        amps[idx] = c(sign, 0.0);
    }
    let f = s.state().fidelity(&state(&amps)).unwrap();
    ensure(f >= 1.0 - 1e-9, || format!("fidelity {f}"))
}

// ---------------------------------------------------------------------------
// separable subsystem and its classical description

fn bell_prefix_factorisation() -> Check {
    let mut s = DebugSession::launch(&SourceProgram::inline(BELL_PLUS_MINUS), 0).map_err(|e| e.to_string())?;
    for _ in 0..4 {
        s.step().map_err(|e| e.to_string())?;
    }
    let r = factor_state(s.state(), 1e-9).map_err(|e| e.to_string())?;
    ensure(r.block_qubits() == vec![vec![0, 1], vec![2]], || {
        format!("blocks {:?}", r.block_qubits())
    })?;
    let h = FRAC_1_SQRT_2;
    let bell = state(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    let minus = state(&[c(h, 0.0), c(-h, 0.0)]);
    let f0 = r.blocks[0].state.fidelity(&bell).unwrap();
    let f1 = r.blocks[1].state.fidelity(&minus).unwrap();
    ensure(f0 >= 1.0 - 1e-9 && f1 >= 1.0 - 1e-9, || format!("block fidelities {f0}, {f1}"))?;

    // (CNOT (x) H)(H (x) I (x) I)|001>
    let d = classical_description(s.provenance(), s.state()).map_err(|e| e.to_string())?;
    ensure(d.initial_bits == "001", || format!("initial bits {}", d.initial_bits))?;
    let trace: Vec<(&str, Vec<usize>)> = d.operator_trace.iter().map(|op| (op.gate.name(), op.qubits.clone())).collect();
    ensure(trace == vec![("h", vec![0]), ("cx", vec![0, 1]), ("h", vec![2])], || {
        format!("trace {trace:?}")
    })?;
    ensure(d.replay_fidelity.0 >= 1.0 - 1e-9, || {
        format!("replay fidelity {}", d.replay_fidelity.0)
    })
}

// ---------------------------------------------------------------------------
// Bell correlations over many shots

fn bell_correlation() -> Check {
    let p = compile(&SourceProgram::inline(BELL_PLUS_MINUS)).map_err(|e| e.to_string())?;
    let d = run_shots(&p, 10_000, 7).map_err(|e| e.to_string())?;
    let keys: Vec<&str> = d.counts.keys().map(String::as_str).collect();
    ensure(keys.iter().all(|k| *k == "00" || *k == "11"), || format!("leakage: {keys:?}"))?;
    let f = d.frequency("00");
    ensure((0.47..=0.53).contains(&f), || format!("P(00) = {f}"))
}

// ---------------------------------------------------------------------------
// Hamming-weight signs after regeneration

fn hamming_weight_state() -> Check {
    for n in 1..=10usize {
        let mut s = DebugSession::launch(&SourceProgram::inline(hamming_sign_program(n)), 0).map_err(|e| e.to_string())?;
        s.continue_run().map_err(|e| e.to_string())?;
        let regen = s.provenance().replay().map_err(|e| e.to_string())?;
        let mag = 2f64.powf(-(n as f64) / 2.0);
        for (x, a) in regen.amplitudes().iter().enumerate() {
            let want = if x.count_ones() % 2 == 0 { mag } else { -mag };
            ensure((a.re - want).abs() <= 1e-12 && a.im.abs() <= 1e-12, || {
                format!("n={n} x={x}: {a} vs {want}")
            })?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// approximate cloning

fn cloner_fidelity() -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    for i in 0..1000 {
        let psi = random_state(&mut rng, 1);
        let clone = approximate_clone(&psi, &[0]).map_err(|e| e.to_string())?;
        let f = clone.fidelity_with(&psi).map_err(|e| e.to_string())?;
        ensure((f - 5.0 / 6.0).abs() <= 1e-12, || format!("state {i}: fidelity {f}"))?;
    }
    let zero = StateVector::basis(1, "0").unwrap();
    let clone = approximate_clone(&zero, &[0]).map_err(|e| e.to_string())?;
    let d = sample_clone_measurements(&clone, 100_000, 11).map_err(|e| e.to_string())?;
    let f0 = d.frequency("0");
    ensure((f0 - 5.0 / 6.0).abs() <= 0.01, || format!("empirical P(0) = {f0}"))?;
    let f4 = expected_clone_fidelity(4);
    ensure((f4 - 0.7).abs() <= 1e-12, || format!("d=4 fidelity {f4}"))
}

// ---------------------------------------------------------------------------
// separability classification against a brute-force oracle

/// Singular values by one-sided Jacobi rotations on the columns.
fn jacobi_singular_values(mut cols: Vec<Vec<Complex64>>) -> Vec<f64> {
    let n = cols.len();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // rephase column q so the overlap is real and positive
                let phase = gamma.conj() / g;
                for z in cols[q].iter_mut() {
                    *z *= phase;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for k in 0..cols[p].len() {
                    let (a, b) = (cols[p][k], cols[q][k]);
                    cols[p][k] = a * cs - b * sn;
                    cols[q][k] = a * sn + b * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Second singular value of the amplitude matrix across the cut `mask | rest`.
fn oracle_sigma2(s: &StateVector, mask: usize) -> f64 {
    let n = s.num_qubits();
    let a: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
    let b: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 0).collect();
    let mut cols = vec![vec![c(0.0, 0.0); 1 << a.len()]; 1 << b.len()];
    for (x, amp) in s.amplitudes().iter().enumerate() {
        let row = a.iter().enumerate().map(|(i, &k)| (x >> k & 1) << i).sum::<usize>();
        let col = b.iter().enumerate().map(|(i, &k)| (x >> k & 1) << i).sum::<usize>();
        cols[col][row] = *amp;
    }
    jacobi_singular_values(cols).get(1).copied().unwrap_or(0.0)
}

/// Finest factorisation: qubits share a block unless some product cut
/// separates them.
fn oracle_blocks(s: &StateVector, tol: f64) -> Vec<Vec<usize>> {
    let n = s.num_qubits();
    let cuts: Vec<usize> = (1..(1usize << n) - 1).filter(|&m| oracle_sigma2(s, m) <= tol).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for q in 0..n {
        let same = |p: usize| cuts.iter().all(|m| (m >> p & 1) == (m >> q & 1));
        match blocks.iter_mut().find(|b| same(b[0])) {
            Some(b) => b.push(q),
            None => blocks.push(vec![q]),
        }
    }
    blocks
}

fn sorted(mut b: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    b.sort();
    b
}

fn separability_classification() -> Check {
    let mut rng = StdRng::seed_from_u64(17);
    let singletons: Vec<Vec<usize>> = (0..4).map(|q| vec![q]).collect();
    for i in 0..100 {
        let mut amps = vec![c(1.0, 0.0)];
        for k in 0..4 {
            let q = random_state(&mut rng, 1);
            amps = kron_low_high(&amps, k, q.amplitudes());
        }
        let s = state(&amps);
        let got = sorted(factor_state(&s, 1e-9).map_err(|e| e.to_string())?.block_qubits());
        let oracle = oracle_blocks(&s, 1e-9);
        ensure(got == singletons && oracle == singletons, || {
            format!("product {i}: got {got:?}, oracle {oracle:?}")
        })?;
    }
    let mut planted = 0;
    while planted < 100 {
        // entangled pair on two random qubits, product on the other two
        let pair = random_state(&mut rng, 2);
        if oracle_sigma2(&pair, 1) < 0.1 {
            continue;
        }
        let mut qs: Vec<usize> = (0..4).collect();
        let i = rng.random_range(0..4);
        let a = qs.remove(i);
        let j = rng.random_range(0..3);
        let b = qs.remove(j);
        let (p0, p1) = (random_state(&mut rng, 1), random_state(&mut rng, 1));
        let mut amps = vec![c(0.0, 0.0); 16];
        for (x, slot) in amps.iter_mut().enumerate() {
            let bit = |q: usize| x >> q & 1;
            *slot = pair.amplitudes()[bit(a) | bit(b) << 1] * p0.amplitudes()[bit(qs[0])] * p1.amplitudes()[bit(qs[1])];
        }
        let s = state(&amps);
        let mut pair_block = vec![a, b];
        pair_block.sort();
        let want = sorted(vec![pair_block, vec![qs[0]], vec![qs[1]]]);
        let got = sorted(factor_state(&s, 1e-9).map_err(|e| e.to_string())?.block_qubits());
        let oracle = sorted(oracle_blocks(&s, 1e-9));
        ensure(got == want && oracle == want, || {
            format!("planted {planted} on ({a},{b}): got {got:?}, oracle {oracle:?}")
        })?;
        planted += 1;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// simulator against dense matrix products

type Mat = Vec<Vec<Complex64>>;

fn one_qubit(name: &str, t: f64) -> [[Complex64; 2]; 2] {
    let h = FRAC_1_SQRT_2;
    let (s, co) = (t / 2.0).sin_cos();
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match name {
        "h" => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        "x" => [[z, o], [o, z]],
        "y" => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        "z" => [[o, z], [z, -o]],
        "s" => [[o, z], [z, c(0.0, 1.0)]],
        "t" => [[o, z], [z, Complex64::from_polar(1.0, PI / 4.0)]],
        "rx" => [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]],
        "ry" => [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
        "rz" => [[Complex64::from_polar(1.0, -t / 2.0), z], [z, Complex64::from_polar(1.0, t / 2.0)]],
        _ => unreachable!(),
    }
}

fn full_one(n: usize, g: [[Complex64; 2]; 2], q: usize) -> Mat {
    let d = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); d]; d];
    for (r, row) in m.iter_mut().enumerate() {
        for (col, e) in row.iter_mut().enumerate() {
            if r & !(1 << q) == col & !(1 << q) {
                *e = g[r >> q & 1][col >> q & 1];
            }
        }
    }
    m
}

fn full_permutation(n: usize, f: impl Fn(usize) -> usize) -> Mat {
    let d = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); d]; d];
    for col in 0..d {
        m[f(col)][col] = c(1.0, 0.0);
    }
    m
}

fn full_diagonal(n: usize, f: impl Fn(usize) -> Complex64) -> Mat {
    let d = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); d]; d];
    for (x, row) in m.iter_mut().enumerate() {
        row[x] = f(x);
    }
    m
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn simulator_oracle() -> Check {
    const ONE_Q: [&str; 9] = ["h", "x", "y", "z", "s", "t", "rx", "ry", "rz"];
    let n = 3;
    let mut rng = StdRng::seed_from_u64(23);
    for circuit in 0..50 {
        let mut src = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\n");
        let mut u = full_diagonal(n, |_| c(1.0, 0.0));
        for _ in 0..20 {
            let kind = rng.random_range(0..12);
            let g = if kind < 9 {
                let name = ONE_Q[kind];
                let q = rng.random_range(0..n);
                let t = rng.random_range(-PI..PI);
                if name.starts_with('r') {
                    src.push_str(&format!("{name}({t:?}) q[{q}];\n"));
                } else {
                    src.push_str(&format!("{name} q[{q}];\n"));
                }
                full_one(n, one_qubit(name, t), q)
            } else {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                match kind {
                    9 => {
                        src.push_str(&format!("cx q[{a}],q[{b}];\n"));
                        full_permutation(n, |x| if x >> a & 1 == 1 { x ^ (1 << b) } else { x })
                    }
                    10 => {
                        src.push_str(&format!("cz q[{a}],q[{b}];\n"));
                        full_diagonal(n, |x| {
                            if x >> a & 1 == 1 && x >> b & 1 == 1 {
                                c(-1.0, 0.0)
                            } else {
                                c(1.0, 0.0)
                            }
                        })
                    }
                    _ => {
                        src.push_str(&format!("swap q[{a}],q[{b}];\n"));
                        full_permutation(n, |x| {
                            let (ba, bb) = (x >> a & 1, x >> b & 1);
                            (x & !(1 << a) & !(1 << b)) | ba << b | bb << a
                        })
                    }
                }
            };
            u = matmul(&g, &u);
        }
        let mut s = DebugSession::launch(&SourceProgram::inline(src.clone()), 0).map_err(|e| e.to_string())?;
        s.continue_run().map_err(|e| e.to_string())?;
        for (x, a) in s.state().amplitudes().iter().enumerate() {
            let dev = (a - u[x][0]).norm();
            ensure(dev < 1e-10, || format!("circuit {circuit}, amplitude {x}: deviation {dev}\n{src}"))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// tomography

fn tomography_check() -> Check {
    let mut rng = StdRng::seed_from_u64(31);
    for i in 0..20 {
        let s = random_state(&mut rng, 3);
        for subset in [vec![0], vec![2], vec![0, 1], vec![2, 0]] {
            let est = tomography(&s, &subset, TomographyMode::Exact, true).map_err(|e| e.to_string())?;
            let exact = s.partial_trace(&subset).map_err(|e| e.to_string())?;
            let diff = est.rho_hat.max_abs_diff(&exact);
            ensure(diff <= 1e-9, || format!("state {i}, subset {subset:?}: diff {diff}"))?;
        }
    }
    let plus = state(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
    let mut good = 0;
    for seed in 0..100u64 {
        let mode = TomographyMode::Sampled {
            shots_per_setting: 10_000,
            seed,
        };
        let est = tomography(&plus, &[0], mode, false).map_err(|e| e.to_string())?;
        let [x, y, z] = est.bloch.ok_or("no Bloch vector")?;
        let err = ((x.0 - 1.0).powi(2) + y.0.powi(2) + z.0.powi(2)).sqrt();
        if err < 0.05 {
            good += 1;
        }
    }
    ensure(good >= 95, || format!("only {good}/100 repetitions within 0.05"))
}

// ---------------------------------------------------------------------------
// frontend corpus

const MALFORMED: [&str; 20] = [
    "",
    "OPENQASM 3.0;\nqreg q[1];\n",
    "qreg q[1];\n",
    "OPENQASM 2.0;\nqreg q[1]\nh q[0];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nh q[1];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nfoo q[0];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncx q[0],q[0];\n",
    "OPENQASM 2.0;\nqreg q[1];\nqreg q[2];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\ncreg c[1];\nmeasure q[0] -> d[0];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nrx q[0];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nrx(0.1, 0.2) q[0];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\ncreg c[1];\nif(c==2) x q[0];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nh q[0]; $\n",
    "OPENQASM 2.0;\ninclude \"other.inc\";\nqreg q[1];\n",
    "OPENQASM 2.0;\ngate g a { g a; }\nqreg q[1];\ng q[0];\n",
    "OPENQASM 2.0;\nqreg q[0];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nrx(1/) q[0];\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[1];\nmeasure q -> c;\n",
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nh q[0];\n/* unterminated\n",
    "OPENQASM 2.0;\ngate g(t) a { U(t, 0, x) a; }\nqreg q[1];\n",
];

fn frontend_corpus() -> Check {
    for (name, text) in [("superposition", SUPERPOSITION_DEMO), ("bell", BELL_PLUS_MINUS)] {
        let src = SourceProgram::inline(text);
        let p = compile(&src).map_err(|e| e.to_string())?;
        ensure(p.len() == 6, || format!("{name}: {} flat statements", p.len()))?;
        let ast = parse(&src).map_err(|e| e.to_string())?;
        let printed = ast.to_string();
        let again = parse(&SourceProgram::inline(printed.clone())).map_err(|e| format!("{name} reparse: {e}\n{printed}"))?;
        ensure(ast.same_structure(&again), || format!("{name}: round trip differs\n{printed}"))?;
    }
    for (i, text) in MALFORMED.iter().enumerate() {
        let src = SourceProgram::new(*text, format!("bad{i}.qasm"));
        let r = catch_unwind(AssertUnwindSafe(|| compile(&src))).map_err(|_| format!("variant {i} panicked"))?;
        let err = match r {
            Ok(_) => return Err(format!("variant {i} was accepted:\n{text}")),
            Err(e) => e,
        };
        let lines = text.lines().count().max(1) + 1;
        ensure(err.span.line >= 1 && err.span.line <= lines && err.span.col >= 1, || {
            format!("variant {i}: bad location {err}")
        })?;
        ensure(err.to_string().starts_with(&format!("bad{i}.qasm:{}:", err.span.line)), || {
            format!("variant {i}: {err}")
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// protocol transcript against direct execution

fn protocol_determinism() -> Check {
    let mut conn = Connection::new();
    let mut transcript = Vec::new();
    let launch = serde_json::json!({"id": 1, "cmd": "launch", "args": {"source": SUPERPOSITION_DEMO, "seed": 42}});
    transcript.extend(conn.handle_line(launch.to_string().as_bytes()));
    for id in 2..=7 {
        transcript.extend(conn.handle_line(format!(r#"{{"id":{id},"cmd":"step"}}"#).as_bytes()));
    }
    let out = conn.handle_line(br#"{"id":8,"cmd":"exportLog"}"#);
    let resp: serde_json::Value = serde_json::from_str(&out[0]).map_err(|e| e.to_string())?;
    ensure(resp["ok"] == true, || out[0].clone())?;
    let via_protocol = resp["result"]["text"].as_str().ok_or("no log text")?.to_string();
    ensure(transcript.iter().all(|l| !l.contains("\"ok\":false")), || transcript.join(""))?;

    let mut direct = DebugSession::launch(&SourceProgram::inline(SUPERPOSITION_DEMO), 42).map_err(|e| e.to_string())?;
    while direct.step().map_err(|e| e.to_string())?.reason != StopReason::Finished {}
    let expected = direct.io_log_text();
    ensure(expected.lines().count() == 2, || format!("direct log:\n{expected}"))?;
    ensure(via_protocol == expected, || {
        format!("protocol log:\n{via_protocol}\ndirect log:\n{expected}")
    })
}

// ---------------------------------------------------------------------------

fn main() {
    let checks: [Criterion; 10] = [
        (
            "superposition walk-through, forced outcome 0",
            Duration::from_secs(1),
            superposition_walkthrough,
        ),
        (
            "factorisation and classical description of the Bell prefix",
            Duration::from_secs(1),
            bell_prefix_factorisation,
        ),
        ("Bell correlation over 10^4 shots", Duration::from_secs(5), bell_correlation),
        ("Hamming-weight signs, n = 1..10", Duration::from_secs(5), hamming_weight_state),
        ("approximate cloner fidelity", Duration::from_secs(10), cloner_fidelity),
        (
            "separability classification vs SVD oracle",
            Duration::from_secs(30),
            separability_classification,
        ),
        ("simulator vs dense matrix oracle", Duration::from_secs(10), simulator_oracle),
        ("tomography exact and sampled", Duration::from_secs(60), tomography_check),
        ("frontend corpus", Duration::from_secs(1), frontend_corpus),
        ("protocol transcript determinism", Duration::from_secs(1), protocol_determinism),
    ];
    let mut failed = 0;
    let mut err = std::io::stderr().lock();
    for (name, limit, check) in checks {
        let t0 = Instant::now();
        let result = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = t0.elapsed();
        let result = result.and_then(|()| {
            ensure(elapsed < limit, || {
                format!("took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs())
            })
        });
        let line = match &result {
            Ok(()) => format!("PASS  {name}  ({:.3}s)\n", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                format!("FAIL  {name}  ({:.3}s): {why}\n", elapsed.as_secs_f64())
            }
        };
        let _ = err.write_all(line.as_bytes());
    }
    let _ = writeln!(err, "{} of 10 acceptance checks passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
