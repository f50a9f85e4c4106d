use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{StateError, StateVector};

/// Hermitian, trace-one operator on `m` qubits. Local bit `j` of a row or
/// column index is the `j`-th qubit of whatever subset produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub(crate) fn from_matrix_unchecked(qubits: usize, rho: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(rho.nrows(), 1 << qubits);
        DensityMatrix { qubits, rho }
    }

    /// Validates Hermiticity (1e-10), unit trace (1e-9) and positivity
    /// (eigenvalues >= -1e-9).
    pub fn from_matrix(rho: DMatrix<Complex64>) -> Result<Self, StateError> {
        let d = rho.nrows();
        if d < 2 || !d.is_power_of_two() || rho.ncols() != d {
            return Err(StateError::InvalidDensity(format!("shape {}x{}", rho.nrows(), rho.ncols())));
        }
        let out = DensityMatrix {
            qubits: d.trailing_zeros() as usize,
            rho,
        };
        let herm = out.hermiticity_error();
        if herm > 1e-10 {
            return Err(StateError::InvalidDensity(format!("not Hermitian (error {herm:e})")));
        }
        let tr = out.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(StateError::InvalidDensity(format!("trace {tr}")));
        }
        let min = out.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(StateError::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(out)
    }

    pub fn pure(state: &StateVector) -> Self {
        let v = DMatrix::from_column_slice(state.amplitudes().len(), 1, state.amplitudes());
        DensityMatrix {
            qubits: state.num_qubits(),
            rho: &v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let d = 1usize << qubits;
        DensityMatrix {
            qubits,
            rho: DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum |rho_ij|^2 for Hermitian rho
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((self.rho[(r, c)] - self.rho[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Computational-basis probabilities (the real diagonal).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).collect()
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64, StateError> {
        if psi.num_qubits() != self.qubits {
            return Err(StateError::SizeMismatch(psi.num_qubits(), self.qubits));
        }
        let a = psi.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                acc += a[r].conj() * self.rho[(r, c)] * a[c];
            }
        }
        Ok(acc.re)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Nearest-in-spectrum valid state: clips negative eigenvalues to zero
    /// and rescales the trace to one.
    pub fn project_psd(&self) -> DensityMatrix {
        let eig = SymmetricEigen::new(self.hermitian_part());
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let d = self.dim();
        if total <= 0.0 {
            return DensityMatrix::maximally_mixed(self.qubits);
        }
        let mut rho = DMatrix::zeros(d, d);
        for (k, &l) in clipped.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            rho += (v * v.adjoint()) * Complex64::new(l / total, 0.0);
        }
        DensityMatrix { qubits: self.qubits, rho }
    }

    /// `eta * rho + (1 - eta) * I / d`.
    pub fn shrink(&self, eta: f64) -> DensityMatrix {
        let d = self.dim();
        let mixed = DMatrix::<Complex64>::identity(d, d) * Complex64::new((1.0 - eta) / d as f64, 0.0);
        DensityMatrix {
            qubits: self.qubits,
            rho: &self.rho * Complex64::new(eta, 0.0) + mixed,
        }
    }

    /// Bloch vector `(x, y, z)` of a single-qubit state.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.qubits != 1 {
            return None;
        }
        let off = self.rho[(0, 1)];
        Some([2.0 * off.re, -2.0 * off.im, self.rho[(0, 0)].re - self.rho[(1, 1)].re])
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.rho
            .iter()
            .zip(other.rho.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
