//! Dense statevector of `n` qubits with in-place gate application.
//!
//! Bit order: qubit 0 is the most significant bit of an outcome index, so
//! qubit `q` of an `n`-qubit register lives at bit `n - 1 - q`. The same
//! convention is used by [`BitString`], every distribution and every file
//! format in the crate.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gates::{Gate2, Gate4};
use crate::sampling::Distribution;

/// Memory guard: 2^24 amplitudes is 256 MiB.
pub const MAX_QUBITS: usize = 24;

/// Below this many amplitudes a single gate is always applied sequentially.
pub const PAR_MIN_DIM: usize = 1 << 14;

pub(crate) fn check_qubits(n: usize) -> Result<usize> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(n)
    } else {
        Err(Error::QubitCount(n))
    }
}

/// Computational-basis outcome, MSB-first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    n_bits: usize,
    index: usize,
}

impl BitString {
    pub fn new(n_bits: usize, index: usize) -> Result<Self> {
        check_qubits(n_bits)?;
        if index >> n_bits != 0 {
            return Err(Error::InvalidArgument(format!(
                "index {index} does not fit in {n_bits} bits"
            )));
        }
        Ok(BitString { n_bits, index })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_qubits(bits.len())?;
        let mut index = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidArgument(format!("bit value {b}")));
            }
            index = (index << 1) | b as usize;
        }
        Ok(BitString {
            n_bits: bits.len(),
            index,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Value of the bit belonging to qubit `k` (k = 0 is leftmost).
    pub fn bit(&self, k: usize) -> u8 {
        ((self.index >> (self.n_bits - 1 - k)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.n_bits).map(|k| self.bit(k)).collect()
    }

    /// `self` followed by `other` (self occupies the leading qubits).
    pub fn concat(&self, other: &BitString) -> Result<Self> {
        BitString::new(
            self.n_bits + other.n_bits,
            (self.index << other.n_bits) | other.index,
        )
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.index, width = self.n_bits)
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::InvalidArgument(format!(
                    "bad character {other:?} in bitstring {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitString::from_bits(&bits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// The lower-right block of `g` when `g = diag(I, U)` exactly.
fn controlled_block(g: &[[Complex64; 4]; 4]) -> Option<[[Complex64; 2]; 2]> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    for r in 0..4 {
        for c in 0..4 {
            if (r < 2 || c < 2) && g[r][c] != if r == c { one } else { zero } {
                return None;
            }
        }
    }
    Some([[g[2][2], g[2][3]], [g[3][2], g[3][3]]])
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << check_qubits(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// `|+…+⟩`
    pub fn plus(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << check_qubits(n_qubits)?;
        let a = (dim as f64).sqrt().recip();
        Ok(StateVector {
            n_qubits,
            amps: vec![Complex64::new(a, 0.0); dim],
        })
    }

    /// Basis encoding `|x⟩`.
    pub fn basis(x: &BitString) -> Self {
        let mut s = StateVector::zero(x.n_bits).expect("BitString width is always in range");
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[x.index] = Complex64::new(1.0, 0.0);
        s
    }

    /// Takes ownership of raw amplitudes; rejects wrong lengths and
    /// vectors whose squared norm is off by more than 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {dim} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = check_qubits(dim.trailing_zeros() as usize)?;
        let s = StateVector { n_qubits, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Numerical(format!("state norm² {norm} is not 1")));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// True when the states agree up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let ov = self.inner(other);
        if ov.norm() < 1e-300 {
            return false;
        }
        let phase = ov / ov.norm();
        self.amps
            .iter()
            .zip(&other.amps)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    fn bit_of(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(self.n_qubits - 1 - qubit)
    }

    pub fn apply_1q(&mut self, gate: &Gate2, qubit: usize) -> Result<()> {
        self.apply_1q_with(Execution::default(), gate, qubit)
    }

    pub fn apply_1q_with(&mut self, exec: Execution, gate: &Gate2, qubit: usize) -> Result<()> {
        let stride = 1usize << self.bit_of(qubit)?;
        let g = gate.0;
        let kernel = move |lo: &mut [Complex64], hi: &mut [Complex64]| {
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = g[0][0] * x + g[0][1] * y;
                *b = g[1][0] * x + g[1][1] * y;
            }
        };

        #[cfg(feature = "parallel")]
        if exec.is_parallel() && self.dim() >= PAR_MIN_DIM {
            self.amps.par_chunks_mut(2 * stride).for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(stride);
                if stride >= PAR_MIN_DIM / 4 {
                    lo.par_chunks_mut(1024)
                        .zip(hi.par_chunks_mut(1024))
                        .for_each(|(l, h)| kernel(l, h));
                } else {
                    kernel(lo, hi);
                }
            });
            return Ok(());
        }
        let _ = exec;
        for chunk in self.amps.chunks_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            kernel(lo, hi);
        }
        Ok(())
    }

    pub fn apply_2q(&mut self, gate: &Gate4, control: usize, target: usize) -> Result<()> {
        self.apply_2q_with(Execution::default(), gate, control, target)
    }

    /// Applies a 4×4 gate whose basis is ordered `|control, target⟩`.
    pub fn apply_2q_with(
        &mut self,
        exec: Execution,
        gate: &Gate4,
        control: usize,
        target: usize,
    ) -> Result<()> {
        let cb = self.bit_of(control)?;
        let tb = self.bit_of(target)?;
        if cb == tb {
            return Err(Error::SameQubit(control));
        }
        let (hi_bit, lo_bit) = (cb.max(tb), cb.min(tb));
        let (hs, ls) = (1usize << hi_bit, 1usize << lo_bit);
        // Slot order in the kernel is (hi=0,lo=0), (0,1), (1,0), (1,1);
        // `perm` maps a slot to the matrix row/column 2·c + t.
        let perm: [usize; 4] = if cb > tb { [0, 1, 2, 3] } else { [0, 2, 1, 3] };
        let g = gate.0;
        let block = controlled_block(&g);
        let control_is_hi = cb > tb;
        let kernel = move |a: &mut [Complex64], b: &mut [Complex64]| {
            let (a0, a1) = a.split_at_mut(ls);
            let (b0, b1) = b.split_at_mut(ls);
            if let Some(u) = block {
                // Only the control = 1 half moves.
                let (t0, t1) = if control_is_hi { (b0, b1) } else { (a1, b1) };
                for (x, y) in t0.iter_mut().zip(t1.iter_mut()) {
                    let (p, q) = (*x, *y);
                    *x = u[0][0] * p + u[0][1] * q;
                    *y = u[1][0] * p + u[1][1] * q;
                }
                return;
            }
            for j in 0..ls {
                let mut v = [Complex64::new(0.0, 0.0); 4];
                v[perm[0]] = a0[j];
                v[perm[1]] = a1[j];
                v[perm[2]] = b0[j];
                v[perm[3]] = b1[j];
                let mut w = [Complex64::new(0.0, 0.0); 4];
                for (r, wr) in w.iter_mut().enumerate() {
                    *wr = g[r][0] * v[0] + g[r][1] * v[1] + g[r][2] * v[2] + g[r][3] * v[3];
                }
                a0[j] = w[perm[0]];
                a1[j] = w[perm[1]];
                b0[j] = w[perm[2]];
                b1[j] = w[perm[3]];
            }
        };

        #[cfg(feature = "parallel")]
        if exec.is_parallel() && self.dim() >= PAR_MIN_DIM {
            self.amps.par_chunks_mut(2 * hs).for_each(|chunk| {
                let (a, b) = chunk.split_at_mut(hs);
                a.par_chunks_mut(2 * ls)
                    .zip(b.par_chunks_mut(2 * ls))
                    .for_each(|(x, y)| kernel(x, y));
            });
            return Ok(());
        }
        let _ = exec;
        for chunk in self.amps.chunks_mut(2 * hs) {
            let (a, b) = chunk.split_at_mut(hs);
            for (x, y) in a.chunks_mut(2 * ls).zip(b.chunks_mut(2 * ls)) {
                kernel(x, y);
            }
        }
        Ok(())
    }

    /// Born distribution `p[i] = |a_i|²`.
    pub fn probabilities(&self) -> Distribution {
        Distribution::from_probs_unchecked(
            self.n_qubits,
            self.amps.iter().map(|a| a.norm_sqr()).collect(),
        )
    }

    /// Probability that `qubit` is measured as 1.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        let bit = self.bit_of(qubit)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> bit) & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}
