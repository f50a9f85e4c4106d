use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bitstring, check_subset, parse_bitstring, DensityMatrix, GateMatrix, StateError, MAX_QUBITS};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const PARALLEL_FROM: usize = 16;

/// Outcome of measuring one qubit in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub outcome: u8,
    /// Probability of `outcome` before the measurement.
    pub probability: f64,
}

/// Normalised amplitude vector over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Gathers the bits of `x` at positions `qubits` into a compact local index.
#[inline]
pub(crate) fn gather_bits(x: usize, qubits: &[usize]) -> usize {
    qubits.iter().enumerate().fold(0, |acc, (j, &q)| acc | ((x >> q & 1) << j))
}

impl StateVector {
    /// Computational basis state; `bits` is in display order (`q[0]` first).
    pub fn basis(n: usize, bits: &str) -> Result<Self, StateError> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(StateError::Size(n));
        }
        if bits.chars().count() != n {
            return Err(StateError::Bits(bits.to_string()));
        }
        let idx = parse_bitstring(bits).ok_or_else(|| StateError::Bits(bits.to_string()))?;
        Self::basis_index(n, idx)
    }

    pub fn basis_index(n: usize, index: usize) -> Result<Self, StateError> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(StateError::Size(n));
        }
        if index >= 1 << n {
            return Err(StateError::Bits(format!("index {index}")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the norm
    /// within 1e-6 of one; the vector is renormalised exactly.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, StateError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(StateError::Size(len.max(1).ilog2() as usize));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(StateError::Size(n));
        }
        let mut s = StateVector { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(StateError::DegenerateState(norm));
        }
        s.scale(1.0 / norm.sqrt());
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &str) -> Option<Complex64> {
        if bits.len() != self.n {
            return None;
        }
        parse_bitstring(bits).map(|i| self.amps[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn scale(&mut self, k: f64) {
        for a in &mut self.amps {
            *a *= k;
        }
    }

    fn check_targets(&self, g: &GateMatrix, targets: &[usize]) -> Result<(), StateError> {
        let bad = |reason| StateError::Target {
            targets: targets.to_vec(),
            reason,
        };
        if targets.len() != g.arity() {
            return Err(bad("count does not match gate arity"));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n {
                return Err(bad("out of range"));
            }
            if targets[..i].contains(&t) {
                return Err(bad("duplicate"));
            }
        }
        Ok(())
    }

    /// Returns a new state with `g` applied to `targets`.
    pub fn apply_gate(&self, g: &GateMatrix, targets: &[usize]) -> Result<StateVector, StateError> {
        let mut out = self.clone();
        out.apply_gate_mut(g, targets)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, g: &GateMatrix, targets: &[usize]) -> Result<(), StateError> {
        self.check_targets(g, targets)?;
        if self.n >= PARALLEL_FROM {
            self.apply_gather(g, targets);
        } else {
            self.apply_in_place(g, targets);
        }
        Ok(())
    }

    fn target_offsets(g: &GateMatrix, targets: &[usize]) -> Vec<usize> {
        (0..g.dim())
            .map(|l| targets.iter().enumerate().fold(0, |acc, (j, &t)| acc | ((l >> j & 1) << t)))
            .collect()
    }

    fn apply_in_place(&mut self, g: &GateMatrix, targets: &[usize]) {
        let d = g.dim();
        let offsets = Self::target_offsets(g, targets);
        let mask = offsets[d - 1];
        let mut buf = [ZERO; 8];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (c, off) in offsets.iter().enumerate() {
                buf[c] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, v) in buf[..d].iter().enumerate() {
                    acc += g.get(r, c) * v;
                }
                self.amps[base | off] = acc;
            }
        }
    }

    /// Each output amplitude gathers its inputs, so rows parallelise freely.
    fn apply_gather(&mut self, g: &GateMatrix, targets: &[usize]) {
        let offsets = Self::target_offsets(g, targets);
        let mask = offsets[g.dim() - 1];
        let src = &self.amps;
        let mut out = vec![ZERO; src.len()];
        out.par_iter_mut().enumerate().for_each(|(x, slot)| {
            let row = gather_bits(x, targets);
            let base = x & !mask;
            let mut acc = ZERO;
            for (c, off) in offsets.iter().enumerate() {
                acc += g.get(row, c) * src[base | off];
            }
            *slot = acc;
        });
        self.amps = out;
    }

    /// Probability that measuring `qubit` yields 0.
    pub fn prob_zero(&self, qubit: usize) -> Result<f64, StateError> {
        if qubit >= self.n {
            return Err(StateError::Target {
                targets: vec![qubit],
                reason: "out of range",
            });
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(x, _)| x >> qubit & 1 == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    fn check_norm(&self) -> Result<(), StateError> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(StateError::DegenerateState(norm));
        }
        Ok(())
    }

    /// Measures `qubit` with the uniform draw `u`: outcome 0 iff `u < p0`.
    pub fn measure(&self, qubit: usize, u: f64) -> Result<(MeasurementRecord, StateVector), StateError> {
        let mut s = self.clone();
        let rec = s.measure_mut(qubit, u)?;
        Ok((rec, s))
    }

    pub fn measure_mut(&mut self, qubit: usize, u: f64) -> Result<MeasurementRecord, StateError> {
        self.check_norm()?;
        let p0 = self.prob_zero(qubit)?;
        let outcome = if u < p0 { 0 } else { 1 };
        let probability = if outcome == 0 { p0 } else { 1.0 - p0 };
        self.collapse(qubit, outcome, probability);
        Ok(MeasurementRecord {
            qubit,
            outcome,
            probability,
        })
    }

    /// Projects `qubit` onto `outcome` and renormalises. Fails when the
    /// outcome has probability below `min_probability`.
    pub fn project_mut(&mut self, qubit: usize, outcome: u8, min_probability: f64) -> Result<MeasurementRecord, StateError> {
        self.check_norm()?;
        let p0 = self.prob_zero(qubit)?;
        let probability = if outcome == 0 { p0 } else { 1.0 - p0 };
        if probability < min_probability || probability <= 0.0 {
            return Err(StateError::ImpossibleOutcome {
                qubit,
                outcome,
                probability,
            });
        }
        self.collapse(qubit, outcome, probability);
        Ok(MeasurementRecord {
            qubit,
            outcome,
            probability,
        })
    }

    fn collapse(&mut self, qubit: usize, outcome: u8, probability: f64) {
        let keep = usize::from(outcome);
        let k = 1.0 / probability.sqrt();
        for (x, a) in self.amps.iter_mut().enumerate() {
            if x >> qubit & 1 == keep {
                *a *= k;
            } else {
                *a = ZERO;
            }
        }
    }

    /// Amplitudes arranged as a `2^|a| x 2^|b|` matrix; bit `j` of the row
    /// index is qubit `a[j]`, bit `j` of the column index is qubit `b[j]`.
    pub fn reshape(&self, a: &[usize], b: &[usize]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(1 << a.len(), 1 << b.len());
        for (x, amp) in self.amps.iter().enumerate() {
            m[(gather_bits(x, a), gather_bits(x, b))] = *amp;
        }
        m
    }

    fn check_bipartition(&self, a: &[usize], b: &[usize]) -> Result<(), StateError> {
        check_subset(a, self.n)?;
        check_subset(b, self.n)?;
        if a.len() + b.len() != self.n || a.iter().any(|q| b.contains(q)) {
            let mut both = a.to_vec();
            both.extend_from_slice(b);
            return Err(StateError::Subset {
                subset: both,
                reason: "sides must partition all qubits",
            });
        }
        Ok(())
    }

    /// Reduced density matrix on `keep` (local bit `j` is `keep[j]`).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, StateError> {
        check_subset(keep, self.n)?;
        let rest = super::complement(keep, self.n);
        let m = self.reshape(keep, &rest);
        let rho = &m * m.adjoint();
        Ok(DensityMatrix::from_matrix_unchecked(keep.len(), rho))
    }

    /// Schmidt coefficients across `a | b`, non-increasing.
    pub fn schmidt(&self, a: &[usize], b: &[usize]) -> Result<Vec<f64>, StateError> {
        self.check_bipartition(a, b)?;
        let m = self.reshape(a, b);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        Ok(sv)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64, StateError> {
        if self.n != other.n {
            return Err(StateError::SizeMismatch(self.n, other.n));
        }
        let ip: Complex64 = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        Ok(ip.norm_sqr().min(1.0))
    }

    /// Tensor product of block states placed on the given qubits. The blocks
    /// must partition `0..n`.
    pub fn from_blocks(n: usize, blocks: &[(Vec<usize>, StateVector)]) -> Result<StateVector, StateError> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(StateError::Size(n));
        }
        let mut seen = vec![false; n];
        for (qs, st) in blocks {
            check_subset(qs, n)?;
            if qs.len() != st.n {
                return Err(StateError::SizeMismatch(qs.len(), st.n));
            }
            for &q in qs {
                if std::mem::replace(&mut seen[q], true) {
                    return Err(StateError::Subset {
                        subset: qs.clone(),
                        reason: "blocks overlap",
                    });
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(StateError::Subset {
                subset: Vec::new(),
                reason: "blocks do not cover every qubit",
            });
        }
        let amps = (0..1usize << n)
            .map(|x| blocks.iter().map(|(qs, st)| st.amps[gather_bits(x, qs)]).product())
            .collect();
        Ok(StateVector { n, amps })
    }

    /// Text dump: `bitstring  re  im` for every amplitude with `|a|^2 > 1e-12`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (x, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 1e-12 {
                s.push_str(&format!("{}  {:.16e}  {:.16e}\n", bitstring(x, self.n), a.re, a.im));
            }
        }
        s
    }

    /// Parses the output of [`Self::dump`]. Blank lines and `#` comments are
    /// skipped.
    pub fn from_dump(text: &str) -> Result<StateVector, StateError> {
        let mut n = None;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| StateError::Dump {
                line: i + 1,
                reason: reason.to_string(),
            };
            let mut parts = line.split_whitespace();
            let (Some(bits), Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected `bitstring re im`"));
            };
            let idx = parse_bitstring(bits).ok_or_else(|| bad("bad bitstring"))?;
            if *n.get_or_insert(bits.len()) != bits.len() {
                return Err(bad("inconsistent bitstring length"));
            }
            let re: f64 = re.parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = im.parse().map_err(|_| bad("bad imaginary part"))?;
            entries.push((idx, Complex64::new(re, im)));
        }
        let n = n.ok_or(StateError::Dump {
            line: 0,
            reason: "no amplitudes".into(),
        })?;
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(StateError::Size(n));
        }
        let mut amps = vec![ZERO; 1 << n];
        for (idx, a) in entries {
            amps[idx] = a;
        }
        StateVector::from_amplitudes(amps)
    }

    /// Amplitudes with probability above `1e-12`, as `(bitstring, amp)`.
    pub fn support(&self) -> Vec<(String, Complex64)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 1e-12)
            .map(|(x, a)| (bitstring(x, self.n), *a))
            .collect()
    }
}
