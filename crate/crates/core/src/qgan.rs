//! Quantum GAN: a layered-ansatz generator against a quantum
//! discriminator, trained by alternating exact-expectation updates.
//!
//! The discriminator acts on `n_data + n_readout` qubits. A candidate
//! sample `x` is basis-encoded on the data qubits, the readout qubits
//! start in `|0⟩`, and `D(x)` is the probability of measuring the first
//! readout qubit (qubit `n_data`) as 1, read as "x is real".
//!
//! Losses are the standard cross-entropy GAN losses taken as exact sums
//! over all `2^n_data` outcomes:
//!
//! ```text
//! L_D = −Σ_x t(x) log D(x) − Σ_x p_G(x) log(1 − D(x))
//! L_G = −Σ_x p_G(x) log D(x)          (non-saturating)
//! ```

use rand_distr::{Distribution as _, Normal};

use crate::ansatz::{InputKind, LayeredAnsatz, ParamVector};
use crate::datasets::{js, kl, tv};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gradients::{grad_vector_with, shift_gradient_over_inputs, DiagonalObservable};
use crate::optim::{AdamParams, Optimizer, OptimizerKind};
use crate::rng::{seeded_rng, worker_rng};
use crate::sampling::{sample, sample_with, Distribution, SampleSet};
use crate::statevector::{BitString, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub ansatz: LayeredAnsatz,
}

impl GeneratorSpec {
    pub fn new(n_data: usize, n_layers: usize, input: InputKind) -> Result<Self> {
        Ok(GeneratorSpec {
            ansatz: LayeredAnsatz::new(n_data, n_layers, input)?,
        })
    }

    pub fn n_data(&self) -> usize {
        self.ansatz.n_qubits()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorSpec {
    n_data: usize,
    n_readout: usize,
    pub ansatz: LayeredAnsatz,
}

impl DiscriminatorSpec {
    pub fn new(n_data: usize, n_readout: usize, n_layers: usize) -> Result<Self> {
        if n_readout == 0 {
            return Err(Error::InvalidArgument("discriminator needs a readout qubit".into()));
        }
        Ok(DiscriminatorSpec {
            n_data,
            n_readout,
            ansatz: LayeredAnsatz::new(n_data + n_readout, n_layers, InputKind::Zero)?,
        })
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn n_readout(&self) -> usize {
        self.n_readout
    }

    pub fn readout_qubit(&self) -> usize {
        self.n_data
    }

    fn input_for(&self, index: usize) -> StateVector {
        StateVector::basis(
            &BitString::new(self.n_data + self.n_readout, index << self.n_readout)
                .expect("width validated at construction"),
        )
    }

    fn output_unchecked(&self, params: &[f64], index: usize) -> Result<f64> {
        let out = self
            .ansatz
            .evaluate_from_with(Execution::Sequential, self.input_for(index), params)?;
        out.prob_one(self.readout_qubit())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QganConfig {
    pub iterations: usize,
    /// Samples per side per iteration in sampled mode; informational otherwise.
    pub batch_size: usize,
    pub lr_gen: f64,
    pub lr_disc: f64,
    pub disc_steps_per_gen_step: usize,
    pub seed: u64,
    pub eval_interval: usize,
    pub optimizer: OptimizerKind,
    pub adam: AdamParams,
    pub init_scale: f64,
    pub epsilon_clip: f64,
    /// Replace `t` and `p_G` in the discriminator loss by minibatch
    /// empirical distributions of `batch_size` draws each.
    pub sampled_mode: bool,
}

impl Default for QganConfig {
    fn default() -> Self {
        QganConfig {
            iterations: 500,
            batch_size: 10,
            lr_gen: 0.05,
            lr_disc: 0.05,
            disc_steps_per_gen_step: 1,
            seed: 0,
            eval_interval: 10,
            optimizer: OptimizerKind::Adam,
            adam: AdamParams::default(),
            init_scale: 0.1,
            epsilon_clip: 1e-12,
            sampled_mode: false,
        }
    }
}

impl QganConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lr_gen", self.lr_gen),
            ("lr_disc", self.lr_disc),
            ("epsilon_clip", self.epsilon_clip),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("iterations", self.iterations),
            ("batch_size", self.batch_size),
            ("disc_steps", self.disc_steps_per_gen_step),
            ("eval_interval", self.eval_interval),
        ] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("init_scale {}", self.init_scale)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QganRecord {
    /// Completed iterations when the metrics were taken.
    pub iteration: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub js: f64,
    /// `KL(target ‖ generated)` in nats.
    pub kl: f64,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QganHistory {
    pub records: Vec<QganRecord>,
}

fn check_data_width(gen: &GeneratorSpec, disc: &DiscriminatorSpec) -> Result<()> {
    if gen.n_data() != disc.n_data {
        return Err(Error::LengthMismatch {
            what: "discriminator data qubits",
            expected: gen.n_data(),
            got: disc.n_data,
        });
    }
    Ok(())
}

/// `D(x)`: probability that the readout qubit reads 1.
pub fn discriminator_output(disc: &DiscriminatorSpec, d_params: &[f64], x: &BitString) -> Result<f64> {
    if x.n_bits() != disc.n_data {
        return Err(Error::LengthMismatch {
            what: "bitstring",
            expected: disc.n_data,
            got: x.n_bits(),
        });
    }
    disc.ansatz.check_params(d_params)?;
    disc.output_unchecked(d_params, x.index())
}

/// `D(x)` for every outcome `x`, in index order.
pub fn discriminator_outputs(disc: &DiscriminatorSpec, d_params: &[f64]) -> Result<Vec<f64>> {
    discriminator_outputs_with(Execution::default(), disc, d_params)
}

pub fn discriminator_outputs_with(
    exec: Execution,
    disc: &DiscriminatorSpec,
    d_params: &[f64],
) -> Result<Vec<f64>> {
    disc.ansatz.check_params(d_params)?;
    exec.map_indexed(1 << disc.n_data, |i| disc.output_unchecked(d_params, i))
        .into_iter()
        .collect()
}

pub fn generator_distribution(gen: &GeneratorSpec, g_params: &[f64]) -> Result<Distribution> {
    Ok(gen.ansatz.evaluate(g_params)?.probabilities())
}

fn d_loss_from(target: &[f64], p_gen: &[f64], d: &[f64], eps: f64) -> f64 {
    -target
        .iter()
        .zip(p_gen)
        .zip(d)
        .map(|((t, g), dx)| t * dx.max(eps).ln() + g * (1.0 - dx).max(eps).ln())
        .sum::<f64>()
}

fn g_loss_from(p_gen: &[f64], d: &[f64], eps: f64) -> f64 {
    -p_gen.iter().zip(d).map(|(g, dx)| g * dx.max(eps).ln()).sum::<f64>()
}

pub fn disc_loss(
    gen: &GeneratorSpec,
    g_params: &[f64],
    disc: &DiscriminatorSpec,
    d_params: &[f64],
    target: &Distribution,
    epsilon_clip: f64,
) -> Result<f64> {
    check_data_width(gen, disc)?;
    if target.n_bits() != gen.n_data() {
        return Err(Error::LengthMismatch {
            what: "target bits",
            expected: gen.n_data(),
            got: target.n_bits(),
        });
    }
    let p_gen = generator_distribution(gen, g_params)?;
    let d = discriminator_outputs(disc, d_params)?;
    Ok(d_loss_from(target.probs(), p_gen.probs(), &d, epsilon_clip))
}

pub fn gen_loss(
    gen: &GeneratorSpec,
    g_params: &[f64],
    disc: &DiscriminatorSpec,
    d_params: &[f64],
    epsilon_clip: f64,
) -> Result<f64> {
    check_data_width(gen, disc)?;
    let p_gen = generator_distribution(gen, g_params)?;
    let d = discriminator_outputs(disc, d_params)?;
    Ok(g_loss_from(p_gen.probs(), &d, epsilon_clip))
}

/// Gradient of the discriminator loss over `d_params` for fixed weights
/// `target` and `p_gen`.
pub fn disc_loss_grad(
    exec: Execution,
    disc: &DiscriminatorSpec,
    d_params: &[f64],
    target: &[f64],
    p_gen: &[f64],
    epsilon_clip: f64,
) -> Result<Vec<f64>> {
    let d = discriminator_outputs_with(exec, disc, d_params)?;
    // ∂L_D/∂D(x), frozen at the current parameters
    let weights: Vec<f64> = d
        .iter()
        .zip(target)
        .zip(p_gen)
        .map(|((dx, t), g)| -t / dx.max(epsilon_clip) + g / (1.0 - dx).max(epsilon_clip))
        .collect();
    let active: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] != 0.0).collect();
    let inputs: Vec<StateVector> = active.iter().map(|&i| disc.input_for(i)).collect();
    shift_gradient_over_inputs(exec, &disc.ansatz, d_params, &inputs, |k, state| {
        Ok(weights[active[k]] * state.prob_one(disc.readout_qubit())?)
    })
}

/// Gradient of the generator loss over `g_params`: the expectation
/// gradient of the diagonal observable `−log D(x)`.
pub fn gen_loss_grad(
    exec: Execution,
    gen: &GeneratorSpec,
    g_params: &[f64],
    disc: &DiscriminatorSpec,
    d_params: &[f64],
    epsilon_clip: f64,
) -> Result<Vec<f64>> {
    check_data_width(gen, disc)?;
    let d = discriminator_outputs_with(exec, disc, d_params)?;
    let obs = DiagonalObservable::new(
        gen.n_data(),
        d.iter().map(|dx| -dx.max(epsilon_clip).ln()).collect(),
    )?;
    grad_vector_with(exec, &gen.ansatz, g_params, &obs)
}

/// Result of one adversarial training run.
#[derive(Debug, Clone, PartialEq)]
pub struct QganRun {
    pub g_params: ParamVector,
    pub d_params: ParamVector,
    pub history: QganHistory,
}

/// Initial generator parameters come from stream 0 of the seed,
/// discriminator parameters from stream 1 and sampled-mode minibatches
/// from stream 2.
pub fn train_qgan(
    gen: &GeneratorSpec,
    disc: &DiscriminatorSpec,
    target: &Distribution,
    config: &QganConfig,
) -> Result<QganRun> {
    config.validate()?;
    let g0 = gen
        .ansatz
        .random_params_from(config.init_scale, &mut worker_rng(config.seed, 0))?;
    let d0 = disc
        .ansatz
        .random_params_from(config.init_scale, &mut worker_rng(config.seed, 1))?;
    train_qgan_from(Execution::default(), gen, disc, target, config, g0, d0)
}

fn record(
    gen: &GeneratorSpec,
    g_params: &[f64],
    disc: &DiscriminatorSpec,
    d_params: &[f64],
    target: &Distribution,
    eps: f64,
    iteration: usize,
) -> Result<QganRecord> {
    let p_gen = generator_distribution(gen, g_params)?;
    let d = discriminator_outputs(disc, d_params)?;
    let rec = QganRecord {
        iteration,
        d_loss: d_loss_from(target.probs(), p_gen.probs(), &d, eps),
        g_loss: g_loss_from(p_gen.probs(), &d, eps),
        js: js(target, &p_gen)?,
        kl: kl(target, &p_gen)?,
        tv: tv(target, &p_gen)?,
    };
    if !(rec.d_loss.is_finite() && rec.g_loss.is_finite()) {
        return Err(Error::Numerical(format!("non-finite loss at iteration {iteration}")));
    }
    Ok(rec)
}

pub fn train_qgan_from(
    exec: Execution,
    gen: &GeneratorSpec,
    disc: &DiscriminatorSpec,
    target: &Distribution,
    config: &QganConfig,
    g_init: ParamVector,
    d_init: ParamVector,
) -> Result<QganRun> {
    config.validate()?;
    check_data_width(gen, disc)?;
    if target.n_bits() != gen.n_data() {
        return Err(Error::LengthMismatch {
            what: "target bits",
            expected: gen.n_data(),
            got: target.n_bits(),
        });
    }
    gen.ansatz.check_params(&g_init)?;
    disc.ansatz.check_params(&d_init)?;

    let eps = config.epsilon_clip;
    let mut g_params = g_init;
    let mut d_params = d_init;
    let mut g_opt = Optimizer::new(config.optimizer, config.lr_gen, config.adam, g_params.len());
    let mut d_opt = Optimizer::new(config.optimizer, config.lr_disc, config.adam, d_params.len());
    let mut rng = worker_rng(config.seed, 2);
    let mut history = QganHistory::default();
    history
        .records
        .push(record(gen, &g_params, disc, &d_params, target, eps, 0)?);

    for it in 0..config.iterations {
        for _ in 0..config.disc_steps_per_gen_step {
            let p_gen = gen
                .ansatz
                .evaluate_from_with(exec, gen.ansatz.input_state(), &g_params)?
                .probabilities();
            let (t_w, g_w) = if config.sampled_mode {
                let real = sample_with(target, config.batch_size as u64, &mut rng)?;
                let fake = sample_with(&p_gen, config.batch_size as u64, &mut rng)?;
                (
                    Distribution::from_samples(&real)?.probs().to_vec(),
                    Distribution::from_samples(&fake)?.probs().to_vec(),
                )
            } else {
                (target.probs().to_vec(), p_gen.probs().to_vec())
            };
            let grad = disc_loss_grad(exec, disc, &d_params, &t_w, &g_w, eps)?;
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numerical(format!("discriminator gradient at iteration {it}")));
            }
            d_opt.step(&mut d_params, &grad);
        }
        let grad = gen_loss_grad(exec, gen, &g_params, disc, &d_params, eps)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical(format!("generator gradient at iteration {it}")));
        }
        g_opt.step(&mut g_params, &grad);

        let done = it + 1;
        if done % config.eval_interval == 0 || done == config.iterations {
            history
                .records
                .push(record(gen, &g_params, disc, &d_params, target, eps, done)?);
        }
    }
    Ok(QganRun {
        g_params,
        d_params,
        history,
    })
}

pub fn sample_generator(gen: &GeneratorSpec, g_params: &[f64], n_samples: u64, seed: u64) -> Result<SampleSet> {
    sample(&generator_distribution(gen, g_params)?, n_samples, seed)
}

/// `params + N(0, σ²)` i.i.d., seeded.
pub fn perturb_params(params: &[f64], sigma: f64, seed: u64) -> Result<ParamVector> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma {sigma} must be nonnegative")));
    }
    if sigma == 0.0 {
        return Ok(ParamVector(params.to_vec()));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = seeded_rng(seed);
    Ok(ParamVector(
        params.iter().map(|p| p + normal.sample(&mut rng)).collect(),
    ))
}
