//! Born-machine training by maximum likelihood.
//!
//! The loss is the mean negative log-likelihood of a batch, with model
//! probabilities floored at `epsilon_clip`. Its gradient is the
//! expectation gradient of the diagonal observable
//! `w[x] = −(n_x / N) / max(p(x), ε)` with `w` frozen at the current
//! parameters, so one shift-rule sweep covers the whole batch.

use std::time::Instant;

use rand::Rng as _;

use crate::ansatz::{LayeredAnsatz, ParamVector};
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gradients::{grad_vector_with, DiagonalObservable};
use crate::optim::{AdamParams, Optimizer, OptimizerKind};
use crate::rng::worker_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Minibatch size; draws are with replacement. 0 means full batch.
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamParams,
    /// Std of the i.i.d. normal initial parameters.
    pub init_scale: f64,
    pub epsilon_clip: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.05,
            iterations: 200,
            batch_size: 0,
            seed: 0,
            adam: AdamParams::default(),
            init_scale: 0.1,
            epsilon_clip: 1e-12,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        positive("epsilon_clip", self.epsilon_clip)?;
        positive("adam_epsilon", self.adam.epsilon)?;
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("init_scale {}", self.init_scale)));
        }
        for (name, b) in [("beta1", self.adam.beta1), ("beta2", self.adam.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Full-dataset NLL before this iteration's update.
    pub loss: f64,
    pub grad_norm: f64,
    /// Batch samples whose model probability fell below `epsilon_clip`.
    pub clipped: usize,
    pub time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub records: Vec<IterationRecord>,
    /// Full-dataset NLL after the last update.
    pub final_loss: f64,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn check_data(ansatz: &LayeredAnsatz, data: &Dataset) -> Result<()> {
    if data.n_bits() != ansatz.n_qubits() {
        return Err(Error::LengthMismatch {
            what: "dataset bits",
            expected: ansatz.n_qubits(),
            got: data.n_bits(),
        });
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

fn nll_from_probs(probs: &[f64], data: &[usize], epsilon_clip: f64) -> f64 {
    -data.iter().map(|&i| probs[i].max(epsilon_clip).ln()).sum::<f64>() / data.len() as f64
}

/// Mean negative log-likelihood `−(1/N) Σ log max(p(xᵢ), ε)`.
pub fn nll(ansatz: &LayeredAnsatz, params: &[f64], data: &Dataset, epsilon_clip: f64) -> Result<f64> {
    check_data(ansatz, data)?;
    let probs = ansatz.evaluate(params)?.probabilities();
    let idx: Vec<usize> = data.samples().iter().map(|x| x.index()).collect();
    Ok(nll_from_probs(probs.probs(), &idx, epsilon_clip))
}

fn nll_grad_indices(
    exec: Execution,
    ansatz: &LayeredAnsatz,
    params: &[f64],
    batch: &[usize],
    probs: &[f64],
    epsilon_clip: f64,
) -> Result<(Vec<f64>, usize)> {
    let n = batch.len() as f64;
    let mut weights = vec![0.0; probs.len()];
    let mut clipped = 0;
    for &i in batch {
        if probs[i] < epsilon_clip {
            clipped += 1;
        }
        weights[i] -= 1.0 / (n * probs[i].max(epsilon_clip));
    }
    let obs = DiagonalObservable::new(ansatz.n_qubits(), weights)?;
    Ok((grad_vector_with(exec, ansatz, params, &obs)?, clipped))
}

/// Gradient of [`nll`] over `batch`.
pub fn nll_grad(
    ansatz: &LayeredAnsatz,
    params: &[f64],
    batch: &Dataset,
    epsilon_clip: f64,
) -> Result<Vec<f64>> {
    check_data(ansatz, batch)?;
    let probs = ansatz.evaluate(params)?.probabilities();
    let idx: Vec<usize> = batch.samples().iter().map(|x| x.index()).collect();
    Ok(nll_grad_indices(Execution::default(), ansatz, params, &idx, probs.probs(), epsilon_clip)?.0)
}

pub fn train_mle(
    ansatz: &LayeredAnsatz,
    data: &Dataset,
    config: &TrainConfig,
) -> Result<(ParamVector, TrainHistory)> {
    let init = ansatz.random_params(config.init_scale, config.seed)?;
    train_mle_from(Execution::default(), ansatz, data, config, init)
}

/// Training from explicit initial parameters. Initial parameters come
/// from stream 0 of the seed and minibatch draws from stream 1.
pub fn train_mle_from(
    exec: Execution,
    ansatz: &LayeredAnsatz,
    data: &Dataset,
    config: &TrainConfig,
    init: ParamVector,
) -> Result<(ParamVector, TrainHistory)> {
    config.validate()?;
    check_data(ansatz, data)?;
    ansatz.check_params(&init)?;
    let all: Vec<usize> = data.samples().iter().map(|x| x.index()).collect();
    let mut params = init;
    let mut opt = Optimizer::new(
        config.optimizer,
        config.learning_rate,
        config.adam,
        params.len(),
    );
    let mut rng = worker_rng(config.seed, 1);
    let mut history = TrainHistory::default();
    let start = Instant::now();
    let mut batch = Vec::with_capacity(config.batch_size);

    for iteration in 0..config.iterations {
        let probs = ansatz
            .evaluate_from_with(exec, ansatz.input_state(), &params)?
            .probabilities();
        let loss = nll_from_probs(probs.probs(), &all, config.epsilon_clip);
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("loss {loss} at iteration {iteration}")));
        }
        let batch_ref: &[usize] = if config.batch_size == 0 {
            &all
        } else {
            batch.clear();
            batch.extend((0..config.batch_size).map(|_| all[rng.random_range(0..all.len())]));
            &batch
        };
        let (grad, clipped) = nll_grad_indices(
            exec,
            ansatz,
            &params,
            batch_ref,
            probs.probs(),
            config.epsilon_clip,
        )?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !grad_norm.is_finite() {
            return Err(Error::Numerical(format!("gradient norm {grad_norm} at iteration {iteration}")));
        }
        opt.step(&mut params, &grad);
        history.records.push(IterationRecord {
            iteration,
            loss,
            grad_norm,
            clipped,
            time_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    history.final_loss = nll(ansatz, &params, data, config.epsilon_clip)?;
    if !history.final_loss.is_finite() {
        return Err(Error::Numerical("final loss is not finite".into()));
    }
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::InputKind;
    use crate::gradients::finite_difference_grad;
    use crate::statevector::BitString;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn nll_special_cases() {
        let a = LayeredAnsatz::new(2, 1, InputKind::Zero).unwrap();
        let zero = a.zero_params();
        let perfect = Dataset::new(2, vec![bits("00"); 5]).unwrap();
        assert_eq!(nll(&a, &zero, &perfect, 1e-12).unwrap(), 0.0);

        let with_miss = Dataset::new(2, vec![bits("00"), bits("01")]).unwrap();
        let v = nll(&a, &zero, &with_miss, 1e-12).unwrap();
        assert!((v - 0.5 * -(1e-12f64).ln()).abs() < 1e-12);

        let u = LayeredAnsatz::new(3, 2, InputKind::Plus).unwrap();
        let any = Dataset::new(3, vec![bits("010"), bits("111"), bits("111")]).unwrap();
        assert!((nll(&u, &u.zero_params(), &any, 1e-12).unwrap() - 3.0 * 2f64.ln()).abs() < 1e-12);

        assert!(nll(&a, &zero, &Dataset::new(3, vec![bits("000")]).unwrap(), 1e-12).is_err());
    }

    #[test]
    fn nll_grad_matches_finite_difference() {
        let a = LayeredAnsatz::new(3, 2, InputKind::Zero).unwrap();
        let data = Dataset::new(3, ["000", "011", "011", "101", "110"].iter().map(|s| bits(s)).collect()).unwrap();
        for seed in 0..3 {
            let p = a.random_params(1.0, seed).unwrap();
            let g = nll_grad(&a, &p, &data, 1e-12).unwrap();
            let h = 1e-5;
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i] += h;
                let up = nll(&a, &q, &data, 1e-12).unwrap();
                q[i] -= 2.0 * h;
                let down = nll(&a, &q, &data, 1e-12).unwrap();
                let fd = (up - down) / (2.0 * h);
                assert!((g[i] - fd).abs() < 1e-5, "param {i}: {} vs {fd}", g[i]);
            }
        }
        // the same weights through the generic oracle
        let p = a.random_params(1.0, 9).unwrap();
        let probs = a.evaluate(&p).unwrap().probabilities();
        let mut w = vec![0.0; 8];
        for x in data.samples() {
            w[x.index()] -= 1.0 / (5.0 * probs.probs()[x.index()]);
        }
        let obs = DiagonalObservable::new(3, w).unwrap();
        let g = nll_grad(&a, &p, &data, 1e-12).unwrap();
        let fd = finite_difference_grad(&a, &p, &obs, 2, 1e-5).unwrap();
        assert!((g[2] - fd).abs() < 1e-5);
    }

    #[test]
    fn nll_grad_is_order_free() {
        let a = LayeredAnsatz::new(2, 2, InputKind::Zero).unwrap();
        let p = a.random_params(0.8, 1).unwrap();
        let fwd = Dataset::new(2, vec![bits("00"), bits("10"), bits("11")]).unwrap();
        let rev = Dataset::new(2, vec![bits("11"), bits("00"), bits("10")]).unwrap();
        let g1 = nll_grad(&a, &p, &fwd, 1e-12).unwrap();
        let g2 = nll_grad(&a, &p, &rev, 1e-12).unwrap();
        for (x, y) in g1.iter().zip(&g2) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn one_qubit_point_mass_converges() {
        let a = LayeredAnsatz::new(1, 1, InputKind::Zero).unwrap();
        let data = Dataset::new(1, vec![bits("1"); 20]).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.1,
            iterations: 200,
            ..TrainConfig::default()
        };
        let (p, hist) = train_mle(&a, &data, &cfg).unwrap();
        assert_eq!(hist.len(), 200);
        let p1 = a.evaluate(&p).unwrap().probabilities().probs()[1];
        assert!(p1 > 0.99, "P(1) = {p1}");
        assert!(hist.final_loss < hist.records[0].loss);
    }

    #[test]
    fn loss_decreases_for_every_seed() {
        let a = LayeredAnsatz::new(1, 1, InputKind::Zero).unwrap();
        let data = Dataset::new(1, vec![bits("1"); 8]).unwrap();
        for seed in 0..10 {
            let cfg = TrainConfig { learning_rate: 0.1, iterations: 200, seed, batch_size: 4, ..TrainConfig::default() };
            let (_, hist) = train_mle(&a, &data, &cfg).unwrap();
            assert!(hist.final_loss < hist.records[0].loss, "seed {seed}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let a = LayeredAnsatz::new(2, 2, InputKind::Zero).unwrap();
        let data = Dataset::new(2, vec![bits("00"), bits("11"), bits("11")]).unwrap();
        let cfg = TrainConfig { iterations: 30, batch_size: 2, seed: 5, ..TrainConfig::default() };
        let (p1, h1) = train_mle(&a, &data, &cfg).unwrap();
        let (p2, h2) = train_mle(&a, &data, &cfg).unwrap();
        assert_eq!(p1, p2);
        let strip = |h: &TrainHistory| h.records.iter().map(|r| (r.loss, r.grad_norm, r.clipped)).collect::<Vec<_>>();
        assert_eq!(strip(&h1), strip(&h2));
        let (p3, _) = train_mle_from(Execution::Sequential, &a, &data, &cfg, a.random_params(0.1, 5).unwrap()).unwrap();
        assert_eq!(p1, p3);
    }

    #[test]
    fn clipping_is_recorded() {
        // θ = 1e-7 gives P(1) ≈ 2.5e-15, below the floor
        let a = LayeredAnsatz::new(1, 1, InputKind::Zero).unwrap();
        let data = Dataset::new(1, vec![bits("1"); 4]).unwrap();
        let cfg = TrainConfig { iterations: 50, learning_rate: 0.1, ..TrainConfig::default() };
        let (_, hist) =
            train_mle_from(Execution::Sequential, &a, &data, &cfg, vec![1e-7].into()).unwrap();
        assert_eq!(hist.records[0].clipped, 4);
        assert_eq!(hist.records.last().unwrap().clipped, 0);
    }

    #[test]
    fn invalid_config() {
        let a = LayeredAnsatz::new(1, 1, InputKind::Zero).unwrap();
        let data = Dataset::new(1, vec![bits("1")]).unwrap();
        for cfg in [
            TrainConfig { iterations: 0, ..TrainConfig::default() },
            TrainConfig { learning_rate: -1.0, ..TrainConfig::default() },
            TrainConfig { epsilon_clip: 0.0, ..TrainConfig::default() },
        ] {
            assert!(train_mle(&a, &data, &cfg).is_err());
        }
    }
}
