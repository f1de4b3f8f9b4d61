//! Layered hardware-efficient ansatz.
//!
//! Each layer applies `RY(θ_q)` to every qubit, then the entangler
//! `controlled_rot(ψ_k, λ_k)` on the nearest-neighbour chain
//! `(0,1), (1,2), …, (n−2,n−1)` in that order.
//!
//! Parameters are flat, laid out per layer as `θ_0 … θ_{n−1}` followed
//! by `(ψ_k, λ_k)` for each chain pair.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use rand_distr::{Distribution as _, Normal};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gates::{controlled_rot, ry};
use crate::rng::{seeded_rng, Rng};
use crate::statevector::{check_qubits, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputKind {
    #[default]
    Zero,
    Plus,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::Zero => "zero",
            InputKind::Plus => "plus",
        })
    }
}

impl FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" | "0" => Ok(InputKind::Zero),
            "plus" | "+" => Ok(InputKind::Plus),
            other => Err(Error::InvalidArgument(format!("unknown input kind {other:?}"))),
        }
    }
}

/// Which gate slot a parameter drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRole {
    /// `RY` angle on a qubit.
    Rotation { layer: usize, qubit: usize },
    /// `ψ` of the entangler on chain pair `pair`.
    EntanglerPsi { layer: usize, pair: usize },
    /// `λ` of the entangler on chain pair `pair`.
    EntanglerLambda { layer: usize, pair: usize },
}

impl ParamRole {
    pub fn is_entangler(self) -> bool {
        !matches!(self, ParamRole::Rotation { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredAnsatz {
    n_qubits: usize,
    n_layers: usize,
    entangler_pairs: Vec<(usize, usize)>,
    input: InputKind,
}

/// Flat parameter vector in radians.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamVector(pub Vec<f64>);

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

impl LayeredAnsatz {
    pub fn new(n_qubits: usize, n_layers: usize, input: InputKind) -> Result<Self> {
        check_qubits(n_qubits)?;
        if n_layers == 0 {
            return Err(Error::InvalidArgument("n_layers must be at least 1".into()));
        }
        let entangler_pairs = (0..n_qubits.saturating_sub(1)).map(|q| (q, q + 1)).collect();
        Ok(LayeredAnsatz {
            n_qubits,
            n_layers,
            entangler_pairs,
            input,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn input(&self) -> InputKind {
        self.input
    }

    pub fn entangler_pairs(&self) -> &[(usize, usize)] {
        &self.entangler_pairs
    }

    fn per_layer(&self) -> usize {
        self.n_qubits + 2 * self.entangler_pairs.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.n_layers * self.per_layer()
    }

    pub fn param_role(&self, index: usize) -> Result<ParamRole> {
        if index >= self.parameter_count() {
            return Err(Error::ParamIndex {
                index,
                count: self.parameter_count(),
            });
        }
        let layer = index / self.per_layer();
        let offset = index % self.per_layer();
        Ok(if offset < self.n_qubits {
            ParamRole::Rotation { layer, qubit: offset }
        } else {
            let k = offset - self.n_qubits;
            if k % 2 == 0 {
                ParamRole::EntanglerPsi { layer, pair: k / 2 }
            } else {
                ParamRole::EntanglerLambda { layer, pair: k / 2 }
            }
        })
    }

    pub fn zero_params(&self) -> ParamVector {
        ParamVector(vec![0.0; self.parameter_count()])
    }

    /// I.i.d. `N(0, scale²)` initial parameters.
    pub fn random_params(&self, scale: f64, seed: u64) -> Result<ParamVector> {
        self.random_params_from(scale, &mut seeded_rng(seed))
    }

    pub fn random_params_from(&self, scale: f64, rng: &mut Rng) -> Result<ParamVector> {
        let normal = Normal::new(0.0, scale)
            .map_err(|e| Error::InvalidArgument(format!("init scale {scale}: {e}")))?;
        Ok(ParamVector(
            (0..self.parameter_count())
                .map(|_| normal.sample(rng))
                .collect(),
        ))
    }

    pub fn input_state(&self) -> StateVector {
        match self.input {
            InputKind::Zero => StateVector::zero(self.n_qubits),
            InputKind::Plus => StateVector::plus(self.n_qubits),
        }
        .expect("qubit count validated at construction")
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::LengthMismatch {
                what: "parameter vector",
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        Ok(())
    }

    fn ops_per_layer(&self) -> usize {
        self.n_qubits + self.entangler_pairs.len()
    }

    /// Number of gates in the circuit. Gates are numbered in application
    /// order: per layer the `RY` gates by qubit, then the entanglers by
    /// chain position.
    pub fn op_count(&self) -> usize {
        self.n_layers * self.ops_per_layer()
    }

    /// Gate driven by parameter `index`. Both angles of an entangler map
    /// to the same gate.
    pub fn op_of_param(&self, index: usize) -> Result<usize> {
        Ok(match self.param_role(index)? {
            ParamRole::Rotation { layer, qubit } => layer * self.ops_per_layer() + qubit,
            ParamRole::EntanglerPsi { layer, pair } | ParamRole::EntanglerLambda { layer, pair } => {
                layer * self.ops_per_layer() + self.n_qubits + pair
            }
        })
    }

    /// Applies gate `op` with angles taken from `params`.
    pub fn apply_op(&self, exec: Execution, state: &mut StateVector, op: usize, params: &[f64]) -> Result<()> {
        let layer = op / self.ops_per_layer();
        let offset = op % self.ops_per_layer();
        let base = layer * self.per_layer();
        if offset < self.n_qubits {
            state.apply_1q_with(exec, &ry(params[base + offset])?, offset)
        } else {
            let k = offset - self.n_qubits;
            let (c, t) = self.entangler_pairs[k];
            let at = base + self.n_qubits + 2 * k;
            state.apply_2q_with(exec, &controlled_rot(params[at], params[at + 1])?, c, t)
        }
    }

    /// Runs the circuit on the configured input product state.
    pub fn evaluate(&self, params: &[f64]) -> Result<StateVector> {
        self.evaluate_from(self.input_state(), params)
    }

    /// Runs the circuit on an arbitrary initial state of matching width.
    pub fn evaluate_from(&self, state: StateVector, params: &[f64]) -> Result<StateVector> {
        self.evaluate_from_with(Execution::default(), state, params)
    }

    pub fn evaluate_from_with(
        &self,
        exec: Execution,
        mut state: StateVector,
        params: &[f64],
    ) -> Result<StateVector> {
        self.check_params(params)?;
        if state.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch {
                what: "initial state qubits",
                expected: self.n_qubits,
                got: state.n_qubits(),
            });
        }
        for op in 0..self.op_count() {
            self.apply_op(exec, &mut state, op, params)?;
        }
        Ok(state)
    }
}
