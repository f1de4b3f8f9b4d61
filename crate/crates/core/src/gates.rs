//! Fixed and parameterized gate matrices.
//!
//! Rotations follow `R_a(θ) = exp(-i θ/2 σ_a)`. Two-qubit matrices are
//! written in `(control, target)` order: row/column index `2·c + t`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense `D×D` complex matrix. Constructors in this module only ever
/// produce unitaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateMatrix<const D: usize>(pub [[Complex64; D]; D]);

/// Single-qubit gate.
pub type Gate2 = GateMatrix<2>;
/// Two-qubit gate in `(control, target)` order.
pub type Gate4 = GateMatrix<4>;

impl<const D: usize> GateMatrix<D> {
    pub fn identity() -> Self {
        let mut m = [[ZERO; D]; D];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ONE;
        }
        GateMatrix(m)
    }

    pub fn dim(&self) -> usize {
        D
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut m = [[ZERO; D]; D];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.0[c][r].conj();
            }
        }
        GateMatrix(m)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..D {
            for c in 0..D {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: [Complex64; D]) -> [Complex64; D] {
        let mut out = [ZERO; D];
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (c, x) in v.iter().enumerate() {
                acc += self.0[r][c] * x;
            }
            *o = acc;
        }
        out
    }
}

impl<const D: usize> Mul for GateMatrix<D> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut m = [[ZERO; D]; D];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let mut acc = ZERO;
                for k in 0..D {
                    acc += self.0[r][k] * rhs.0[k][c];
                }
                *v = acc;
            }
        }
        GateMatrix(m)
    }
}

fn check_angle(theta: f64) -> Result<f64> {
    if theta.is_finite() {
        Ok(theta)
    } else {
        Err(Error::NonFinite(theta))
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn hadamard() -> Gate2 {
    let h = re(FRAC_1_SQRT_2);
    GateMatrix([[h, h], [h, -h]])
}

pub fn pauli_x() -> Gate2 {
    GateMatrix([[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> Gate2 {
    let i = Complex64::i();
    GateMatrix([[ZERO, -i], [i, ZERO]])
}

pub fn pauli_z() -> Gate2 {
    GateMatrix([[ONE, ZERO], [ZERO, -ONE]])
}

pub fn rx(theta: f64) -> Result<Gate2> {
    let (s, c) = (check_angle(theta)? / 2.0).sin_cos();
    let mis = Complex64::new(0.0, -s);
    Ok(GateMatrix([[re(c), mis], [mis, re(c)]]))
}

pub fn ry(theta: f64) -> Result<Gate2> {
    let (s, c) = (check_angle(theta)? / 2.0).sin_cos();
    Ok(GateMatrix([[re(c), re(-s)], [re(s), re(c)]]))
}

pub fn rz(theta: f64) -> Result<Gate2> {
    let half = check_angle(theta)? / 2.0;
    Ok(GateMatrix([
        [Complex64::from_polar(1.0, -half), ZERO],
        [ZERO, Complex64::from_polar(1.0, half)],
    ]))
}

pub fn cnot() -> Gate4 {
    controlled(&pauli_x())
}

/// Lifts a single-qubit gate to its controlled version: identity on the
/// control=0 block, `u` on the control=1 block.
pub fn controlled(u: &Gate2) -> Gate4 {
    let mut m = Gate4::identity().0;
    m[2][2] = u.0[0][0];
    m[2][3] = u.0[0][1];
    m[3][2] = u.0[1][0];
    m[3][3] = u.0[1][1];
    GateMatrix(m)
}

/// Entangling gate of the layered ansatz: controlled `RY(psi)·RZ(lambda)`.
///
/// Each angle enters through a controlled Pauli rotation, whose generator
/// has spectrum {0, 0, ±1/2}. Gradients with respect to either angle need
/// the four-term shift rule (see [`crate::gradients`]).
pub fn controlled_rot(psi: f64, lambda: f64) -> Result<Gate4> {
    Ok(controlled(&(ry(psi)? * rz(lambda)?)))
}
