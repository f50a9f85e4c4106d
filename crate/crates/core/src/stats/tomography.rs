use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::StatsError;
use crate::rng::{sample_index, CounterRng};
use crate::state::{DensityMatrix, StateVector};
use crate::wire::{serialize_density, Num17};

pub const MAX_TOMOGRAPHY_QUBITS: usize = 3;

const SEPARABLE_BELOW: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TomographyMode {
    /// Uses outcome probabilities directly, as if with infinitely many shots.
    Exact,
    Sampled {
        shots_per_setting: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct TomographyEstimate {
    pub subset: Vec<usize>,
    #[serde(serialize_with = "serialize_density")]
    pub rho_hat: DensityMatrix,
    /// `None` in exact mode.
    pub shots_per_setting: Option<u64>,
    /// Measurement settings, one basis letter per subset qubit.
    pub settings: Vec<String>,
    pub purity: Num17,
    /// Bloch vector for single-qubit estimates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bloch: Option<[Num17; 3]>,
}

/// All `3^m` settings over `{X, Y, Z}`, first subset qubit leftmost, in
/// lexicographic order.
pub fn pauli_settings(m: usize) -> Vec<String> {
    (0..3usize.pow(m as u32))
        .map(|mut k| {
            let mut s = vec![' '; m];
            for j in (0..m).rev() {
                s[j] = ['X', 'Y', 'Z'][k % 3];
                k /= 3;
            }
            s.into_iter().collect()
        })
        .collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(letter: char) -> [[Complex64; 2]; 2] {
    match letter {
        'I' => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
        'X' => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
        'Y' => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
        'Z' => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        _ => unreachable!("not a Pauli letter"),
    }
}

/// Single-qubit rotation taking the `letter` eigenbasis to the computational
/// basis: H for X, H S^dagger for Y.
fn rotation(letter: char) -> [[Complex64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match letter {
        'X' => [[c(h, 0.), c(h, 0.)], [c(h, 0.), c(-h, 0.)]],
        'Y' => [[c(h, 0.), c(0., -h)], [c(h, 0.), c(0., h)]],
        _ => pauli('I'),
    }
}

/// Tensor product of 2x2 factors; factor `j` acts on local bit `j`.
fn kron_local(factors: &[[[Complex64; 2]; 2]]) -> DMatrix<Complex64> {
    let d = 1 << factors.len();
    DMatrix::from_fn(d, d, |r, col| {
        factors.iter().enumerate().map(|(j, f)| f[r >> j & 1][col >> j & 1]).product()
    })
}

/// Outcome probabilities after rotating `rho` into `setting`'s bases.
fn setting_probabilities(rho: &DensityMatrix, setting: &str) -> Vec<f64> {
    let factors: Vec<_> = setting.chars().map(rotation).collect();
    let u = kron_local(&factors);
    let rotated = &u * rho.matrix() * u.adjoint();
    (0..rotated.nrows()).map(|i| rotated[(i, i)].re.max(0.0)).collect()
}

/// Pauli linear-inversion tomography of `subset`.
///
/// Every Pauli string's expectation is averaged over all settings that
/// measure it, the estimate `(1/2^m) sum <P> P` is assembled, and the result
/// is projected onto the positive semidefinite cone. Entangled subsets are
/// refused unless `allow_entangled` is set, in which case the reduced mixed
/// state is estimated.
pub fn tomography(
    s: &StateVector,
    subset: &[usize],
    mode: TomographyMode,
    allow_entangled: bool,
) -> Result<TomographyEstimate, StatsError> {
    let m = subset.len();
    if m > MAX_TOMOGRAPHY_QUBITS {
        return Err(StatsError::Size {
            m,
            max: MAX_TOMOGRAPHY_QUBITS,
        });
    }
    let rho = s.partial_trace(subset)?;
    if !allow_entangled {
        let rest = crate::state::complement(subset, s.num_qubits());
        if !rest.is_empty() {
            let sigma2 = s.schmidt(subset, &rest)?.get(1).copied().unwrap_or(0.0);
            if sigma2 >= SEPARABLE_BELOW {
                return Err(StatsError::NotSeparable { sigma2 });
            }
        }
    }
    let settings = pauli_settings(m);
    let d = 1usize << m;

    let freqs: Vec<Vec<f64>> = match mode {
        TomographyMode::Exact => settings.iter().map(|st| setting_probabilities(&rho, st)).collect(),
        TomographyMode::Sampled { shots_per_setting, seed } => {
            if shots_per_setting == 0 {
                return Err(StatsError::InvalidParameter("shots per setting must be at least 1".into()));
            }
            let base = CounterRng::new(seed);
            settings
                .iter()
                .enumerate()
                .map(|(k, st)| {
                    let probs = setting_probabilities(&rho, st);
                    let rng = base.derive(k as u64);
                    let mut counts = vec![0u64; d];
                    for shot in 0..shots_per_setting {
                        counts[sample_index(&probs, rng.uniform(shot))] += 1;
                    }
                    counts.iter().map(|&n| n as f64 / shots_per_setting as f64).collect()
                })
                .collect()
        }
    };

    let mut estimate = DMatrix::<Complex64>::zeros(d, d);
    for p in 0..4usize.pow(m as u32) {
        let letters: Vec<char> = (0..m)
            .map(|j| ['I', 'X', 'Y', 'Z'][p / 4usize.pow((m - 1 - j) as u32) % 4])
            .collect();
        let expectation = if letters.iter().all(|&l| l == 'I') {
            1.0
        } else {
            let mut acc = 0.0;
            let mut used = 0;
            for (st, f) in settings.iter().zip(&freqs) {
                if st.chars().zip(&letters).any(|(a, &b)| b != 'I' && a != b) {
                    continue;
                }
                used += 1;
                acc += f
                    .iter()
                    .enumerate()
                    .map(|(x, &fx)| {
                        let parity = letters.iter().enumerate().filter(|&(j, &l)| l != 'I' && x >> j & 1 == 1).count();
                        if parity % 2 == 0 {
                            fx
                        } else {
                            -fx
                        }
                    })
                    .sum::<f64>();
            }
            acc / used as f64
        };
        let factors: Vec<_> = letters.iter().map(|&l| pauli(l)).collect();
        estimate += kron_local(&factors) * Complex64::new(expectation / d as f64, 0.0);
    }
    let rho_hat = DensityMatrix::from_matrix_unchecked(m, estimate).project_psd();
    let bloch = rho_hat.bloch_vector().map(|b| b.map(Num17));
    Ok(TomographyEstimate {
        subset: subset.to_vec(),
        purity: Num17(rho_hat.purity()),
        rho_hat,
        shots_per_setting: match mode {
            TomographyMode::Exact => None,
            TomographyMode::Sampled { shots_per_setting, .. } => Some(shots_per_setting),
        },
        settings,
        bloch,
    })
}
