//! Exact shift-rule gradients of circuit expectations.
//!
//! `RY` angles enter through a Pauli rotation (generator eigenvalues
//! ±1/2), so the two-point rule at ±π/2 is exact. Entangler angles enter
//! through a *controlled* Pauli rotation whose generator has eigenvalues
//! {0, ±1/2}; the expectation then carries frequencies 1/2 and 1 and the
//! exact rule needs four points:
//!
//! ```text
//! f'(θ) = d₊ [f(θ+π/2) − f(θ−π/2)] − d₋ [f(θ+3π/2) − f(θ−3π/2)]
//! d± = (√2 ± 1) / (4√2)
//! ```
//!
//! Any function that is a fixed linear combination of Born probabilities
//! of the circuit can be differentiated this way, which is what
//! [`shift_gradient`] exposes.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::ansatz::{LayeredAnsatz, ParamRole};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::statevector::{check_qubits, StateVector};

const D_PLUS: f64 = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
const D_MINUS: f64 = (SQRT_2 - 1.0) / (4.0 * SQRT_2);

/// Observable diagonal in the computational basis: one real value per
/// outcome. A one-hot vector is the Born projector `|x⟩⟨x|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalObservable {
    n_bits: usize,
    values: Vec<f64>,
}

impl DiagonalObservable {
    pub fn new(n_bits: usize, values: Vec<f64>) -> Result<Self> {
        check_qubits(n_bits)?;
        if values.len() != 1 << n_bits {
            return Err(Error::LengthMismatch {
                what: "observable",
                expected: 1 << n_bits,
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        Ok(DiagonalObservable { n_bits, values })
    }

    pub fn one_hot(n_bits: usize, index: usize) -> Result<Self> {
        let mut values = vec![0.0; 1 << check_qubits(n_bits)?];
        *values
            .get_mut(index)
            .ok_or_else(|| Error::InvalidArgument(format!("outcome {index} out of range")))? = 1.0;
        Ok(DiagonalObservable { n_bits, values })
    }

    pub fn constant(n_bits: usize, value: f64) -> Result<Self> {
        DiagonalObservable::new(n_bits, vec![value; 1 << check_qubits(n_bits)?])
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_obs(ansatz: &LayeredAnsatz, obs: &DiagonalObservable) -> Result<()> {
    if obs.n_bits != ansatz.n_qubits() {
        return Err(Error::LengthMismatch {
            what: "observable qubits",
            expected: ansatz.n_qubits(),
            got: obs.n_bits,
        });
    }
    Ok(())
}

fn expectation_unchecked(
    exec: Execution,
    ansatz: &LayeredAnsatz,
    params: &[f64],
    obs: &DiagonalObservable,
) -> Result<f64> {
    let state = ansatz.evaluate_from_with(exec, ansatz.input_state(), params)?;
    Ok(observe(&state, obs))
}

/// `Σ_x p(x; params) · obs[x]`
pub fn expectation(ansatz: &LayeredAnsatz, params: &[f64], obs: &DiagonalObservable) -> Result<f64> {
    check_obs(ansatz, obs)?;
    expectation_unchecked(Execution::default(), ansatz, params, obs)
}

/// Shift-rule derivative of `f` with respect to parameter `index`.
///
/// `f` must be a fixed linear combination of Born probabilities (or
/// expectations) of `ansatz` evaluated at the given parameters.
pub fn shift_derivative<F>(ansatz: &LayeredAnsatz, params: &[f64], index: usize, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    ansatz.check_params(params)?;
    let role = ansatz.param_role(index)?;
    let mut shifted = params.to_vec();
    let mut at = |delta: f64| -> Result<f64> {
        shifted[index] = params[index] + delta;
        f(&shifted)
    };
    let near = at(FRAC_PI_2)? - at(-FRAC_PI_2)?;
    Ok(match role {
        ParamRole::Rotation { .. } => near / 2.0,
        _ => {
            let far = at(3.0 * FRAC_PI_2)? - at(-3.0 * FRAC_PI_2)?;
            D_PLUS * near - D_MINUS * far
        }
    })
}

/// Full shift-rule gradient of `f`, one entry per parameter in order.
/// Parameters are independent work items under [`Execution::Parallel`].
pub fn shift_gradient<F>(exec: Execution, ansatz: &LayeredAnsatz, params: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    ansatz.check_params(params)?;
    exec.map_indexed(ansatz.parameter_count(), |i| shift_derivative(ansatz, params, i, &f))
        .into_iter()
        .collect()
}

/// Prefix states are cached only while they fit in this many amplitudes.
const PREFIX_CACHE_AMPLITUDES: usize = 1 << 24;

/// Shift-rule gradient of `Σ_k readout(k, U(params)|inputs[k]⟩)`.
///
/// `readout` must be linear in the Born probabilities of its state. Each
/// shifted run restarts from the cached state just before the shifted
/// gate, so only the suffix of the circuit is replayed. Agrees with
/// [`shift_gradient`] up to rounding.
pub fn shift_gradient_over_inputs<F>(
    exec: Execution,
    ansatz: &LayeredAnsatz,
    params: &[f64],
    inputs: &[StateVector],
    readout: F,
) -> Result<Vec<f64>>
where
    F: Fn(usize, &StateVector) -> Result<f64> + Sync + Send,
{
    ansatz.check_params(params)?;
    let n_ops = ansatz.op_count();
    let mut total = vec![0.0; ansatz.parameter_count()];
    for (k, input) in inputs.iter().enumerate() {
        if input.n_qubits() != ansatz.n_qubits() {
            return Err(Error::LengthMismatch {
                what: "input state qubits",
                expected: ansatz.n_qubits(),
                got: input.n_qubits(),
            });
        }
        let cache = n_ops.saturating_mul(input.dim()) <= PREFIX_CACHE_AMPLITUDES;
        let mut prefixes = Vec::new();
        if cache {
            let mut state = input.clone();
            for op in 0..n_ops {
                prefixes.push(state.clone());
                ansatz.apply_op(Execution::Sequential, &mut state, op, params)?;
            }
        }
        let run = |index: usize, delta: f64| -> Result<f64> {
            let start = ansatz.op_of_param(index)?;
            let mut shifted = params.to_vec();
            shifted[index] += delta;
            let (mut state, first) = if cache {
                (prefixes[start].clone(), start)
            } else {
                (input.clone(), 0)
            };
            for op in first..n_ops {
                ansatz.apply_op(Execution::Sequential, &mut state, op, &shifted)?;
            }
            readout(k, &state)
        };
        let grads = exec.map_indexed(total.len(), |i| -> Result<f64> {
            let near = run(i, FRAC_PI_2)? - run(i, -FRAC_PI_2)?;
            Ok(if ansatz.param_role(i)?.is_entangler() {
                let far = run(i, 3.0 * FRAC_PI_2)? - run(i, -3.0 * FRAC_PI_2)?;
                D_PLUS * near - D_MINUS * far
            } else {
                near / 2.0
            })
        });
        for (t, g) in total.iter_mut().zip(grads) {
            *t += g?;
        }
    }
    Ok(total)
}

/// Derivative of `⟨obs⟩` with respect to one parameter.
pub fn parameter_shift_grad(
    ansatz: &LayeredAnsatz,
    params: &[f64],
    obs: &DiagonalObservable,
    index: usize,
) -> Result<f64> {
    check_obs(ansatz, obs)?;
    shift_derivative(ansatz, params, index, |p| {
        expectation_unchecked(Execution::Sequential, ansatz, p, obs)
    })
}

/// Central difference `[E(θ+h) − E(θ−h)] / 2h`. Test oracle.
pub fn finite_difference_grad(
    ansatz: &LayeredAnsatz,
    params: &[f64],
    obs: &DiagonalObservable,
    index: usize,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    check_obs(ansatz, obs)?;
    ansatz.check_params(params)?;
    if index >= params.len() {
        return Err(Error::ParamIndex {
            index,
            count: params.len(),
        });
    }
    let mut p = params.to_vec();
    p[index] = params[index] + h;
    let plus = expectation_unchecked(Execution::Sequential, ansatz, &p, obs)?;
    p[index] = params[index] - h;
    let minus = expectation_unchecked(Execution::Sequential, ansatz, &p, obs)?;
    Ok((plus - minus) / (2.0 * h))
}

pub fn grad_vector(ansatz: &LayeredAnsatz, params: &[f64], obs: &DiagonalObservable) -> Result<Vec<f64>> {
    grad_vector_with(Execution::default(), ansatz, params, obs)
}

pub fn grad_vector_with(
    exec: Execution,
    ansatz: &LayeredAnsatz,
    params: &[f64],
    obs: &DiagonalObservable,
) -> Result<Vec<f64>> {
    check_obs(ansatz, obs)?;
    shift_gradient_over_inputs(exec, ansatz, params, &[ansatz.input_state()], |_, state| {
        Ok(observe(state, obs))
    })
}

fn observe(state: &StateVector, obs: &DiagonalObservable) -> f64 {
    state
        .amplitudes()
        .iter()
        .zip(&obs.values)
        .map(|(a, v)| a.norm_sqr() * v)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::InputKind;
    use std::f64::consts::PI;

    fn ansatz(n: usize, l: usize) -> LayeredAnsatz {
        LayeredAnsatz::new(n, l, InputKind::Zero).unwrap()
    }

    #[test]
    fn expectation_basics() {
        let a = ansatz(2, 1);
        let p = a.random_params(1.0, 3).unwrap();
        let ones = DiagonalObservable::constant(2, 1.0).unwrap();
        assert!((expectation(&a, &p, &ones).unwrap() - 1.0).abs() < 1e-12);

        let x = 2;
        let hot = DiagonalObservable::one_hot(2, x).unwrap();
        let state = a.evaluate(&p).unwrap();
        assert!((expectation(&a, &p, &hot).unwrap() - state.amplitudes()[x].norm_sqr()).abs() < 1e-15);

        let plus = LayeredAnsatz::new(2, 1, InputKind::Plus).unwrap();
        let index_obs = DiagonalObservable::new(2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!((expectation(&plus, &plus.zero_params(), &index_obs).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_analytic_gradient() {
        // P(1) = sin²(θ/2), dP/dθ = sin(θ)/2
        let a = ansatz(1, 1);
        let obs = DiagonalObservable::one_hot(1, 1).unwrap();
        let g = parameter_shift_grad(&a, &[PI / 2.0], &obs, 0).unwrap();
        assert!((g - 0.5).abs() < 1e-14);
        for theta in [-2.0, 0.0, 0.3, 1.9] {
            let g = parameter_shift_grad(&a, &[theta], &obs, 0).unwrap();
            assert!((g - theta.sin() / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dead_parameter_has_zero_gradient() {
        // The observable reads only qubit 0; θ on qubit 1 in the last layer
        // feeds only the entangler's target and cannot reach qubit 0.
        let a = ansatz(2, 1);
        let p = a.random_params(1.0, 4).unwrap();
        let obs = DiagonalObservable::new(2, vec![0.3, 0.3, -2.0, -2.0]).unwrap();
        let g = parameter_shift_grad(&a, &p, &obs, 1).unwrap();
        assert!(g.abs() < 1e-14);
        assert!(parameter_shift_grad(&a, &p, &obs, 0).unwrap().abs() > 1e-3);
    }

    #[test]
    fn entangler_parameters_match_finite_differences() {
        let a = ansatz(3, 2);
        let obs = DiagonalObservable::new(3, (0..8).map(|i| (i as f64).sin()).collect()).unwrap();
        for seed in 0..5 {
            let p = a.random_params(1.5, seed).unwrap();
            for i in 0..a.parameter_count() {
                let ps = parameter_shift_grad(&a, &p, &obs, i).unwrap();
                let fd = finite_difference_grad(&a, &p, &obs, i, 1e-5).unwrap();
                assert!((ps - fd).abs() < 1e-6, "param {i}: {ps} vs {fd}");
            }
        }
    }

    #[test]
    fn constant_observable_has_zero_gradient() {
        let a = ansatz(3, 2);
        let p = a.random_params(1.0, 8).unwrap();
        let ones = DiagonalObservable::constant(3, 1.0).unwrap();
        let g = grad_vector(&a, &p, &ones).unwrap();
        assert_eq!(g.len(), a.parameter_count());
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        for i in 0..p.len() {
            assert!(finite_difference_grad(&a, &p, &ones, i, 1e-5).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn errors() {
        let a = ansatz(2, 1);
        let obs = DiagonalObservable::one_hot(2, 0).unwrap();
        assert!(matches!(
            parameter_shift_grad(&a, &[0.0; 4], &obs, 4),
            Err(Error::ParamIndex { index: 4, count: 4 })
        ));
        let wrong = DiagonalObservable::one_hot(3, 0).unwrap();
        assert!(grad_vector(&a, &[0.0; 4], &wrong).is_err());
        assert!(finite_difference_grad(&a, &[0.0; 4], &obs, 0, 0.0).is_err());
        assert!(DiagonalObservable::new(1, vec![0.0, f64::NAN]).is_err());
        assert!(DiagonalObservable::one_hot(1, 2).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let a = ansatz(4, 3);
        let p = a.random_params(1.0, 21).unwrap();
        let obs = DiagonalObservable::new(4, (0..16).map(|i| i as f64).collect()).unwrap();
        let s = grad_vector_with(Execution::Sequential, &a, &p, &obs).unwrap();
        let q = grad_vector_with(Execution::Parallel, &a, &p, &obs).unwrap();
        assert_eq!(s, q);
    }

    #[test]
    fn cached_gradient_matches_plain_shift_rule() {
        let a = LayeredAnsatz::new(3, 3, InputKind::Plus).unwrap();
        let p = a.random_params(1.3, 5).unwrap();
        let obs = DiagonalObservable::new(3, (0..8).map(|i| (i as f64 * 0.7).cos()).collect()).unwrap();
        let cached = grad_vector(&a, &p, &obs).unwrap();
        let plain = shift_gradient(Execution::Sequential, &a, &p, |q| {
            expectation_unchecked(Execution::Sequential, &a, q, &obs)
        })
        .unwrap();
        for (c, d) in cached.iter().zip(&plain) {
            assert!((c - d).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_over_several_inputs_is_additive() {
        let a = ansatz(2, 2);
        let p = a.random_params(1.0, 9).unwrap();
        let inputs: Vec<_> = (0..4).map(|i| StateVector::basis(&crate::statevector::BitString::new(2, i).unwrap())).collect();
        let weights = [0.5, -1.0, 2.0, 0.25];
        let joint = shift_gradient_over_inputs(Execution::Sequential, &a, &p, &inputs, |k, s| {
            Ok(weights[k] * s.prob_one(1)?)
        })
        .unwrap();
        let mut summed = vec![0.0; p.len()];
        for (k, input) in inputs.iter().enumerate() {
            let g = shift_gradient(Execution::Sequential, &a, &p, |q| {
                Ok(weights[k] * a.evaluate_from(input.clone(), q)?.prob_one(1)?)
            })
            .unwrap();
            summed.iter_mut().zip(g).for_each(|(s, v)| *s += v);
        }
        for (j, s) in joint.iter().zip(&summed) {
            assert!((j - s).abs() < 1e-13);
        }
    }
}
