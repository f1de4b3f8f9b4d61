//! The `qgen` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure during training.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::ansatz::LayeredAnsatz;
use crate::config::{DataSource, MleExperiment, QganExperiment, TargetSpec};
use crate::datasets::{dataset_from_distribution, js, kl, tv, OutcomeMoments};
use crate::error::Error;
use crate::io;
use crate::mle::train_mle;
use crate::qgan::{generator_distribution, perturb_params, train_qgan};
use crate::sampling::{sample, Distribution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qgen", version, about = "Quantum-circuit generative modeling")]
pub struct Cli {
    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    /// Overrides the seed of the command (training seed, sampling seed
    /// or perturbation seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a Born machine by maximum likelihood.
    TrainMle { config: PathBuf },
    /// Train a quantum GAN.
    TrainQgan { config: PathBuf },
    /// Sample measurement outcomes from a trained circuit.
    Sample {
        params: PathBuf,
        #[arg(long, short = 'n', default_value_t = 1000)]
        n_samples: u64,
    },
    /// Score a trained circuit against a target, optionally after
    /// Gaussian parameter noise.
    Eval {
        params: PathBuf,
        /// `uniform`, `gaussian[:mean=…,std=…]`, `bas[:rows=…,cols=…]`,
        /// `point:index=…`, `teacher:layers=…,seed=…` or a `.tsv` path.
        #[arg(long)]
        target: Option<String>,
        /// Standard deviation of the parameter noise.
        #[arg(long)]
        perturb: Option<f64>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    fn usage(error: anyhow::Error) -> Self {
        CliError { code: EXIT_USAGE, error }
    }

    /// Numerical failures inside training map to exit code 3.
    fn from_training(error: anyhow::Error) -> Self {
        let numerical = error
            .chain()
            .any(|e| matches!(e.downcast_ref::<Error>(), Some(Error::Numerical(_))));
        CliError {
            code: if numerical { EXIT_NUMERICAL } else { EXIT_USAGE },
            error,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

trait UsageContext<T> {
    fn usage(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> UsageContext<T> for std::result::Result<T, E> {
    fn usage(self) -> CliResult<T> {
        self.map_err(|e| CliError::usage(e.into()))
    }
}

/// Parses `args` (program name first) and runs the command, returning
/// the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => match run(&cli) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {:#}", e.error);
                e.code
            }
        },
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::TrainMle { config } => cmd_train_mle(cli, config),
        Command::TrainQgan { config } => cmd_train_qgan(cli, config),
        Command::Sample { params, n_samples } => cmd_sample(cli, params, *n_samples),
        Command::Eval {
            params,
            target,
            perturb,
        } => cmd_eval(cli, params, target.as_deref(), *perturb),
    }
}

fn log(cli: &Cli, msg: impl AsRef<str>) {
    if !cli.quiet {
        eprintln!("{}", msg.as_ref());
    }
}

fn read_config(path: &Path) -> CliResult<(String, PathBuf)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .usage()?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((text, base))
}

fn write_out(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .usage()?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .usage()
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).usage()?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    fn of(d: &Distribution) -> anyhow::Result<Self> {
        let (mean, std) = d.mean_std()?;
        Ok(Moments { mean, std })
    }
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Divergences {
    /// `KL(target ‖ model)`, nats.
    pub kl: f64,
    /// Base-2 Jensen–Shannon divergence.
    pub js: f64,
    pub tv: f64,
}

impl Divergences {
    fn between(target: &Distribution, model: &Distribution) -> anyhow::Result<Self> {
        Ok(Divergences {
            kl: kl(target, model)?,
            js: js(target, model)?,
            tv: tv(target, model)?,
        })
    }
}

#[derive(Debug, Serialize)]
struct MleSummary {
    parameter_count: usize,
    iterations: usize,
    dataset_size: usize,
    initial_nll: f64,
    final_nll: f64,
    model: Moments,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<Moments>,
    #[serde(skip_serializing_if = "Option::is_none")]
    divergence: Option<Divergences>,
}

fn cmd_train_mle(cli: &Cli, config: &Path) -> CliResult<()> {
    let (text, base) = read_config(config)?;
    let mut exp = MleExperiment::parse(&text).usage()?;
    if let Some(seed) = cli.seed {
        exp.train.seed = seed;
    }
    let n = exp.ansatz.n_qubits();
    let target = exp
        .target
        .as_ref()
        .map(|t| t.build(n, &base))
        .transpose()
        .usage()?;
    let data = match &exp.data {
        DataSource::FromTarget { dataset_size, seed } => {
            let t = target.as_ref().ok_or_else(|| CliError::usage(anyhow!("no target to sample data from")))?;
            dataset_from_distribution(t, *dataset_size, *seed).usage()?
        }
        DataSource::File(p) => {
            let full = base.join(p);
            let text = fs::read_to_string(&full)
                .with_context(|| format!("reading dataset {}", full.display()))
                .usage()?;
            io::parse_dataset(&text).usage()?
        }
    };
    log(cli, format!(
        "train-mle: {} qubits, {} layers, {} parameters, {} samples",
        n,
        exp.ansatz.n_layers(),
        exp.ansatz.parameter_count(),
        data.len()
    ));
    let (params, history) =
        train_mle(&exp.ansatz, &data, &exp.train).map_err(|e| CliError::from_training(e.into()))?;
    let model = exp.ansatz.evaluate(&params).usage()?.probabilities();

    let out = &cli.out_dir;
    write_out(out, "config-echo.txt", &exp.render())?;
    write_out(out, "params.txt", &io::format_params(&exp.ansatz, &params))?;
    write_out(out, "history.csv", &io::format_mle_history(&history, exp.record_time).usage()?)?;
    write_out(out, "distribution.tsv", &io::format_distribution(&model).usage()?)?;
    let summary = MleSummary {
        parameter_count: exp.ansatz.parameter_count(),
        iterations: exp.train.iterations,
        dataset_size: data.len(),
        initial_nll: history.records[0].loss,
        final_nll: history.final_loss,
        model: Moments::of(&model).usage()?,
        target: target.as_ref().map(Moments::of).transpose().usage()?,
        divergence: target
            .as_ref()
            .map(|t| Divergences::between(t, &model))
            .transpose()
            .usage()?,
    };
    write_out(out, "summary.json", &json(&summary)?)?;
    log(cli, format!("final nll {:.6}; artifacts in {}", history.final_loss, out.display()));
    Ok(())
}

#[derive(Debug, Serialize)]
struct QganSummary {
    generator_parameters: usize,
    discriminator_parameters: usize,
    iterations: usize,
    batch_size: usize,
    d_loss: f64,
    g_loss: f64,
    divergence: Divergences,
    generated: Moments,
    target: Moments,
}

fn cmd_train_qgan(cli: &Cli, config: &Path) -> CliResult<()> {
    let (text, base) = read_config(config)?;
    let mut exp = QganExperiment::parse(&text).usage()?;
    if let Some(seed) = cli.seed {
        exp.train.seed = seed;
    }
    let target = exp
        .target
        .build(exp.generator.n_data(), &base)
        .usage()?;
    log(cli, format!(
        "train-qgan: generator {} qubits × {} layers, discriminator {}+{} qubits × {} layers",
        exp.generator.n_data(),
        exp.generator.ansatz.n_layers(),
        exp.discriminator.n_data(),
        exp.discriminator.n_readout(),
        exp.discriminator.ansatz.n_layers()
    ));
    let run = train_qgan(&exp.generator, &exp.discriminator, &target, &exp.train)
        .map_err(|e| CliError::from_training(e.into()))?;
    let generated = generator_distribution(&exp.generator, &run.g_params).usage()?;
    let last = *run.history.records.last().expect("history holds the initial record");

    let out = &cli.out_dir;
    write_out(out, "config-echo.txt", &exp.render())?;
    write_out(out, "params.txt", &io::format_params(&exp.generator.ansatz, &run.g_params))?;
    write_out(out, "disc_params.txt", &io::format_params(&exp.discriminator.ansatz, &run.d_params))?;
    write_out(out, "history.csv", &io::format_qgan_history(&run.history).usage()?)?;
    write_out(out, "distribution.tsv", &io::format_distribution(&generated).usage()?)?;
    let summary = QganSummary {
        generator_parameters: run.g_params.len(),
        discriminator_parameters: run.d_params.len(),
        iterations: exp.train.iterations,
        batch_size: exp.train.batch_size,
        d_loss: last.d_loss,
        g_loss: last.g_loss,
        divergence: Divergences::between(&target, &generated).usage()?,
        generated: Moments::of(&generated).usage()?,
        target: Moments::of(&target).usage()?,
    };
    write_out(out, "summary.json", &json(&summary)?)?;
    log(cli, format!(
        "js {:.5}, tv {:.5}; artifacts in {}",
        summary.divergence.js,
        summary.divergence.tv,
        out.display()
    ));
    Ok(())
}

fn load_model(params: &Path) -> CliResult<(LayeredAnsatz, crate::ansatz::ParamVector)> {
    io::read_params(params).usage()
}

fn cmd_sample(cli: &Cli, params: &Path, n_samples: u64) -> CliResult<()> {
    if n_samples == 0 {
        return Err(CliError::usage(anyhow!("--n-samples must be at least 1")));
    }
    let (ansatz, p) = load_model(params)?;
    let dist = ansatz.evaluate(&p).usage()?.probabilities();
    let set = sample(&dist, n_samples, cli.seed.unwrap_or(0)).usage()?;
    write_out(&cli.out_dir, "samples.tsv", &io::format_samples(&set).usage()?)?;
    log(cli, format!("{n_samples} samples written to {}", cli.out_dir.join("samples.tsv").display()));
    Ok(())
}

#[derive(Debug, Serialize)]
struct Metrics {
    #[serde(flatten)]
    divergence: Divergences,
    #[serde(flatten)]
    moments: Moments,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    target: Moments,
    before: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    after: Option<Metrics>,
    /// JS between the distributions before and after perturbation.
    #[serde(skip_serializing_if = "Option::is_none")]
    js_shift: Option<f64>,
}

fn cmd_eval(cli: &Cli, params: &Path, target: Option<&str>, perturb: Option<f64>) -> CliResult<()> {
    let spec: TargetSpec = target
        .ok_or_else(|| CliError::usage(anyhow!("eval needs --target")))?
        .parse()
        .usage()?;
    let (ansatz, p) = load_model(params)?;
    let target = spec.build(ansatz.n_qubits(), Path::new(".")).usage()?;
    let metrics = |d: &Distribution| -> CliResult<Metrics> {
        Ok(Metrics {
            divergence: Divergences::between(&target, d).usage()?,
            moments: Moments::of(d).usage()?,
        })
    };
    let before = ansatz.evaluate(&p).usage()?.probabilities();
    let mut report = EvalReport {
        target: Moments::of(&target).usage()?,
        before: metrics(&before)?,
        sigma: perturb,
        after: None,
        js_shift: None,
    };
    if let Some(sigma) = perturb {
        let noisy = perturb_params(&p, sigma, cli.seed.unwrap_or(0)).usage()?;
        let after = ansatz.evaluate(&noisy).usage()?.probabilities();
        report.after = Some(metrics(&after)?);
        report.js_shift = Some(js(&before, &after).usage()?);
    }
    print!("{}", json(&report)?);
    Ok(())
}
