//! Gate matrices for the built-in gate set.
//!
//! Matrix convention: for a gate applied to `targets = [t0, t1, ...]`, bit `j`
//! of the local row/column index is the value of qubit `targets[j]`. With
//! that, `cx` on `[control, target]` maps local `c + 2t` to `c + 2(t ^ c)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;
use serde::{Serialize, Serializer};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense `2^m x 2^m` unitary on `m` qubits, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    arity: usize,
    data: Vec<Complex64>,
}

impl GateMatrix {
    /// Builds a gate from row-major entries. Panics if the length is not
    /// `4^arity` or the arity is outside 1..=3.
    pub fn new(arity: usize, data: Vec<Complex64>) -> Self {
        assert!((1..=3).contains(&arity), "gate arity must be 1..=3");
        assert_eq!(data.len(), 1 << (2 * arity), "gate matrix has wrong size");
        GateMatrix { arity, data }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> GateMatrix {
        let d = self.dim();
        let mut data = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                data[c * d + r] = self.get(r, c).conj();
            }
        }
        GateMatrix { arity: self.arity, data }
    }

    /// Largest entry-wise deviation of `U^dagger U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.get(k, r).conj() * self.get(k, c);
                }
                let expect = if r == c { ONE } else { ZERO };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }

    fn single(m: [[Complex64; 2]; 2]) -> Self {
        GateMatrix::new(1, vec![m[0][0], m[0][1], m[1][0], m[1][1]])
    }

    /// `u` controlled on `controls` qubits. Controls are the low local bits,
    /// the target is the highest.
    fn controlled(u: &GateMatrix, controls: usize) -> Self {
        assert_eq!(u.arity, 1);
        let arity = controls + 1;
        let d = 1usize << arity;
        let mask = (1usize << controls) - 1;
        let tbit = 1usize << controls;
        let mut data = vec![ZERO; d * d];
        for col in 0..d {
            if col & mask == mask {
                let tin = usize::from(col & tbit != 0);
                for tout in 0..2 {
                    let row = (col & mask) | (tout * tbit);
                    data[row * d + col] = u.get(tout, tin);
                }
            } else {
                data[col * d + col] = ONE;
            }
        }
        GateMatrix::new(arity, data)
    }

    pub fn u(theta: f64, phi: f64, lambda: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::single([
            [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
            [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
        ])
    }
}

/// The built-in gates: the `U`/`CX` primitives plus the `qelib1.inc` set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    U,
    CX,
    Id,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    U1,
    U2,
    U3,
    Cx,
    Cy,
    Cz,
    Ch,
    Swap,
    Ccx,
    Crz,
    Cu1,
    Cu3,
}

impl GateKind {
    pub const ALL: [GateKind; 26] = [
        GateKind::U,
        GateKind::CX,
        GateKind::Id,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::U1,
        GateKind::U2,
        GateKind::U3,
        GateKind::Cx,
        GateKind::Cy,
        GateKind::Cz,
        GateKind::Ch,
        GateKind::Swap,
        GateKind::Ccx,
        GateKind::Crz,
        GateKind::Cu1,
        GateKind::Cu3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::U => "U",
            GateKind::CX => "CX",
            GateKind::Id => "id",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::U1 => "u1",
            GateKind::U2 => "u2",
            GateKind::U3 => "u3",
            GateKind::Cx => "cx",
            GateKind::Cy => "cy",
            GateKind::Cz => "cz",
            GateKind::Ch => "ch",
            GateKind::Swap => "swap",
            GateKind::Ccx => "ccx",
            GateKind::Crz => "crz",
            GateKind::Cu1 => "cu1",
            GateKind::Cu3 => "cu3",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL.iter().copied().find(|g| g.name() == name)
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::U | GateKind::U3 | GateKind::Cu3 => 3,
            GateKind::U2 => 2,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::U1 | GateKind::Crz | GateKind::Cu1 => 1,
            _ => 0,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::CX
            | GateKind::Cx
            | GateKind::Cy
            | GateKind::Cz
            | GateKind::Ch
            | GateKind::Swap
            | GateKind::Crz
            | GateKind::Cu1
            | GateKind::Cu3 => 2,
            GateKind::Ccx => 3,
            _ => 1,
        }
    }

    /// Matrix for this gate. `params.len()` must equal [`Self::num_params`].
    pub fn matrix(self, params: &[f64]) -> GateMatrix {
        assert_eq!(params.len(), self.num_params(), "wrong parameter count for `{}`", self.name());
        let p = |i: usize| params[i];
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            GateKind::U | GateKind::U3 => GateMatrix::u(p(0), p(1), p(2)),
            GateKind::U2 => GateMatrix::u(FRAC_PI_2, p(0), p(1)),
            GateKind::U1 => GateMatrix::single([[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, p(0))]]),
            GateKind::Id => GateMatrix::single([[ONE, ZERO], [ZERO, ONE]]),
            GateKind::X => GateMatrix::single([[ZERO, ONE], [ONE, ZERO]]),
            GateKind::Y => GateMatrix::single([[ZERO, -I], [I, ZERO]]),
            GateKind::Z => GateMatrix::single([[ONE, ZERO], [ZERO, -ONE]]),
            GateKind::H => GateMatrix::single([[h, h], [h, -h]]),
            GateKind::S => GateMatrix::single([[ONE, ZERO], [ZERO, I]]),
            GateKind::Sdg => GateMatrix::single([[ONE, ZERO], [ZERO, -I]]),
            GateKind::T => GateMatrix::single([[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]]),
            GateKind::Tdg => GateMatrix::single([[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]]),
            GateKind::Rx => {
                let (s, c) = (p(0) / 2.0).sin_cos();
                GateMatrix::single([
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ])
            }
            GateKind::Ry => {
                let (s, c) = (p(0) / 2.0).sin_cos();
                GateMatrix::single([
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ])
            }
            GateKind::Rz => GateMatrix::single([
                [Complex64::from_polar(1.0, -p(0) / 2.0), ZERO],
                [ZERO, Complex64::from_polar(1.0, p(0) / 2.0)],
            ]),
            GateKind::CX | GateKind::Cx => GateMatrix::controlled(&GateKind::X.matrix(&[]), 1),
            GateKind::Cy => GateMatrix::controlled(&GateKind::Y.matrix(&[]), 1),
            GateKind::Cz => GateMatrix::controlled(&GateKind::Z.matrix(&[]), 1),
            GateKind::Ch => GateMatrix::controlled(&GateKind::H.matrix(&[]), 1),
            GateKind::Crz => GateMatrix::controlled(&GateKind::Rz.matrix(params), 1),
            GateKind::Cu1 => GateMatrix::controlled(&GateKind::U1.matrix(params), 1),
            GateKind::Cu3 => GateMatrix::controlled(&GateKind::U3.matrix(params), 1),
            GateKind::Ccx => GateMatrix::controlled(&GateKind::X.matrix(&[]), 2),
            GateKind::Swap => {
                let mut data = vec![ZERO; 16];
                for (row, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                    data[row * 4 + col] = ONE;
                }
                GateMatrix::new(2, data)
            }
        }
    }
}

impl Serialize for GateKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}
