//! Experiment configuration files.
//!
//! INI-style key/value text with `[ansatz]`, `[train]` and `[target]`
//! sections, plus `[discriminator]` for adversarial runs. Keys are listed
//! in the README; unknown sections or keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;

use crate::ansatz::{InputKind, LayeredAnsatz};
use crate::datasets::{bars_and_stripes_target, default_gaussian_params, gaussian_target, uniform_target};
use crate::io::parse_distribution;
use crate::mle::TrainConfig;
use crate::optim::{AdamParams, OptimizerKind};
use crate::qgan::{DiscriminatorSpec, GeneratorSpec, QganConfig};
use crate::sampling::Distribution;

/// Where a target distribution comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Uniform,
    /// `None` fields fall back to [`default_gaussian_params`].
    Gaussian { mean: Option<f64>, std: Option<f64> },
    BarsAndStripes { rows: usize, cols: usize },
    PointMass { index: usize },
    /// Born distribution of a random layered circuit (teacher–student).
    Teacher { layers: usize, seed: u64, scale: f64 },
    File { path: PathBuf },
}

impl TargetSpec {
    /// Materializes the target over `n_bits` outcomes. Relative file paths
    /// resolve against `base_dir`.
    pub fn build(&self, n_bits: usize, base_dir: &Path) -> Result<Distribution> {
        let dist = match self {
            TargetSpec::Uniform => uniform_target(n_bits)?,
            TargetSpec::Gaussian { mean, std } => {
                let (m, s) = default_gaussian_params(n_bits);
                gaussian_target(n_bits, mean.unwrap_or(m), std.unwrap_or(s))?
            }
            TargetSpec::BarsAndStripes { rows, cols } => bars_and_stripes_target(*rows, *cols)?,
            TargetSpec::PointMass { index } => Distribution::point_mass(n_bits, *index)?,
            TargetSpec::Teacher { layers, seed, scale } => {
                let teacher = LayeredAnsatz::new(n_bits, *layers, InputKind::Zero)?;
                let p = teacher.random_params(*scale, *seed)?;
                teacher.evaluate(&p)?.probabilities()
            }
            TargetSpec::File { path } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let text = std::fs::read_to_string(&full)
                    .with_context(|| format!("reading target {}", full.display()))?;
                parse_distribution(&text)?
            }
        };
        if dist.n_bits() != n_bits {
            bail!("target has {} bits but the circuit has {n_bits} qubits", dist.n_bits());
        }
        Ok(dist)
    }

    fn from_map(kind: &str, kv: &mut Fields) -> Result<Self> {
        Ok(match kind {
            "uniform" => TargetSpec::Uniform,
            "gaussian" => TargetSpec::Gaussian {
                mean: kv.opt("mean")?,
                std: kv.opt("std")?,
            },
            "bars_and_stripes" | "bas" => TargetSpec::BarsAndStripes {
                rows: kv.opt("rows")?.unwrap_or(2),
                cols: kv.opt("cols")?.unwrap_or(2),
            },
            "point_mass" | "point" => TargetSpec::PointMass {
                index: kv.req("index")?,
            },
            "teacher" => TargetSpec::Teacher {
                layers: kv.opt("layers")?.unwrap_or(2),
                seed: kv.opt("seed")?.unwrap_or(0),
                scale: kv.opt("scale")?.unwrap_or(std::f64::consts::PI),
            },
            "file" => TargetSpec::File {
                path: PathBuf::from(kv.req::<String>("path")?),
            },
            other => bail!("unknown target kind {other:?}"),
        })
    }

    fn write_fields(&self, out: &mut String) {
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match self {
            TargetSpec::Uniform => line("kind", "uniform".into()),
            TargetSpec::Gaussian { mean, std } => {
                line("kind", "gaussian".into());
                if let Some(m) = mean {
                    line("mean", m.to_string());
                }
                if let Some(s) = std {
                    line("std", s.to_string());
                }
            }
            TargetSpec::BarsAndStripes { rows, cols } => {
                line("kind", "bars_and_stripes".into());
                line("rows", rows.to_string());
                line("cols", cols.to_string());
            }
            TargetSpec::PointMass { index } => {
                line("kind", "point_mass".into());
                line("index", index.to_string());
            }
            TargetSpec::Teacher { layers, seed, scale } => {
                line("kind", "teacher".into());
                line("layers", layers.to_string());
                line("seed", seed.to_string());
                line("scale", scale.to_string());
            }
            TargetSpec::File { path } => {
                line("kind", "file".into());
                line("path", path.display().to_string());
            }
        }
    }
}

/// Compact form used on the command line: `kind[:key=value,…]`, e.g.
/// `uniform`, `gaussian:mean=3.5,std=1.2`, `bas:rows=2,cols=2`. Anything
/// containing a path separator or ending in `.tsv` is read as a file.
impl FromStr for TargetSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            bail!("empty target spec");
        }
        if s.ends_with(".tsv") || (s.contains('/') && !s.contains(':')) {
            return Ok(TargetSpec::File { path: PathBuf::from(s) });
        }
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut map = BTreeMap::new();
        for pair in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value in target spec, got {pair:?}"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut fields = Fields::new("target", map);
        let spec = TargetSpec::from_map(kind, &mut fields)?;
        fields.finish()?;
        Ok(spec)
    }
}

/// Key/value pairs of one section, consumed as they are read so that
/// leftovers can be reported as unknown keys.
struct Fields {
    section: &'static str,
    map: BTreeMap<String, String>,
}

impl Fields {
    fn new(section: &'static str, map: BTreeMap<String, String>) -> Self {
        Fields { section, map }
    }

    fn from_ini(ini: &Ini, section: &'static str) -> Self {
        let map = ini
            .section(Some(section))
            .map(|p| p.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
            .unwrap_or_default();
        Fields { section, map }
    }

    fn opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("[{}] {key} = {v:?}: {e}", self.section)),
        }
    }

    fn req<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(key)?
            .ok_or_else(|| anyhow!("[{}] missing required key {key:?}", self.section))
    }

    fn finish(self) -> Result<()> {
        if let Some(k) = self.map.keys().next() {
            bail!("[{}] unknown key {k:?}", self.section);
        }
        Ok(())
    }
}

fn check_sections(ini: &Ini, allowed: &[&str]) -> Result<()> {
    for (name, props) in ini.iter() {
        match name {
            None if props.is_empty() => {}
            None => bail!("keys outside of any section"),
            Some(n) if allowed.contains(&n) => {}
            Some(n) => bail!("unknown section [{n}]"),
        }
    }
    Ok(())
}

fn parse_ansatz(ini: &Ini, section: &'static str) -> Result<LayeredAnsatz> {
    let mut f = Fields::from_ini(ini, section);
    let a = LayeredAnsatz::new(
        f.req("n_qubits")?,
        f.opt("n_layers")?.unwrap_or(1),
        f.opt::<InputKind>("input")?.unwrap_or_default(),
    )?;
    f.finish()?;
    Ok(a)
}

fn parse_target(ini: &Ini) -> Result<Option<TargetSpec>> {
    if ini.section(Some("target")).is_none() {
        return Ok(None);
    }
    let mut f = Fields::from_ini(ini, "target");
    let kind: String = f.req("kind")?;
    let spec = TargetSpec::from_map(&kind, &mut f)?;
    f.finish()?;
    Ok(Some(spec))
}

fn parse_adam(f: &mut Fields) -> Result<AdamParams> {
    let d = AdamParams::default();
    Ok(AdamParams {
        beta1: f.opt("beta1")?.unwrap_or(d.beta1),
        beta2: f.opt("beta2")?.unwrap_or(d.beta2),
        epsilon: f.opt("adam_epsilon")?.unwrap_or(d.epsilon),
    })
}

/// Training data for likelihood training.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// `dataset_size` seeded draws from the target.
    FromTarget { dataset_size: usize, seed: u64 },
    /// Count table (`bitstring<TAB>count`).
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleExperiment {
    pub ansatz: LayeredAnsatz,
    pub train: TrainConfig,
    pub record_time: bool,
    pub data: DataSource,
    pub target: Option<TargetSpec>,
}

impl MleExperiment {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text)?;
        check_sections(&ini, &["ansatz", "train", "target"])?;
        let ansatz = parse_ansatz(&ini, "ansatz")?;
        let mut f = Fields::from_ini(&ini, "train");
        let d = TrainConfig::default();
        let train = TrainConfig {
            optimizer: f.opt("optimizer")?.unwrap_or(d.optimizer),
            learning_rate: f.opt("learning_rate")?.unwrap_or(d.learning_rate),
            iterations: f.opt("iterations")?.unwrap_or(d.iterations),
            batch_size: f.opt("batch_size")?.unwrap_or(d.batch_size),
            seed: f.opt("seed")?.unwrap_or(d.seed),
            adam: parse_adam(&mut f)?,
            init_scale: f.opt("init_scale")?.unwrap_or(d.init_scale),
            epsilon_clip: f.opt("epsilon_clip")?.unwrap_or(d.epsilon_clip),
        };
        let record_time = f.opt("record_time")?.unwrap_or(false);
        let data_path: Option<String> = f.opt("data")?;
        let dataset_size: Option<usize> = f.opt("dataset_size")?;
        let data_seed: Option<u64> = f.opt("data_seed")?;
        f.finish()?;
        let target = parse_target(&ini)?;
        let data = match (data_path, &target) {
            (Some(p), _) => {
                if dataset_size.is_some() || data_seed.is_some() {
                    bail!("[train] data file excludes dataset_size and data_seed");
                }
                DataSource::File(PathBuf::from(p))
            }
            (None, Some(_)) => DataSource::FromTarget {
                dataset_size: dataset_size.unwrap_or(1000),
                seed: data_seed.unwrap_or(train.seed),
            },
            (None, None) => bail!("likelihood training needs [train] data or a [target] section"),
        };
        train.validate()?;
        if let DataSource::FromTarget { dataset_size: 0, .. } = data {
            bail!("[train] dataset_size must be at least 1");
        }
        Ok(MleExperiment {
            ansatz,
            train,
            record_time,
            data,
            target,
        })
    }

    /// Normalized config text; parses back to the same experiment.
    pub fn render(&self) -> String {
        let mut s = String::new();
        render_ansatz(&mut s, "ansatz", &self.ansatz);
        let t = &self.train;
        let _ = writeln!(
            s,
            "\n[train]\noptimizer = {}\nlearning_rate = {}\niterations = {}\nbatch_size = {}\nseed = {}\nbeta1 = {}\nbeta2 = {}\nadam_epsilon = {}\ninit_scale = {}\nepsilon_clip = {}\nrecord_time = {}",
            t.optimizer, t.learning_rate, t.iterations, t.batch_size, t.seed,
            t.adam.beta1, t.adam.beta2, t.adam.epsilon, t.init_scale, t.epsilon_clip, self.record_time
        );
        match &self.data {
            DataSource::FromTarget { dataset_size, seed } => {
                let _ = writeln!(s, "dataset_size = {dataset_size}\ndata_seed = {seed}");
            }
            DataSource::File(p) => {
                let _ = writeln!(s, "data = {}", p.display());
            }
        }
        if let Some(t) = &self.target {
            s.push_str("\n[target]\n");
            t.write_fields(&mut s);
        }
        s
    }
}

fn render_ansatz(s: &mut String, section: &str, a: &LayeredAnsatz) {
    let _ = writeln!(
        s,
        "[{section}]\nn_qubits = {}\nn_layers = {}\ninput = {}",
        a.n_qubits(),
        a.n_layers(),
        a.input()
    );
}

#[derive(Debug, Clone, PartialEq)]
pub struct QganExperiment {
    pub generator: GeneratorSpec,
    pub discriminator: DiscriminatorSpec,
    pub train: QganConfig,
    pub target: TargetSpec,
}

impl QganExperiment {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text)?;
        check_sections(&ini, &["ansatz", "discriminator", "train", "target"])?;
        let gen_ansatz = parse_ansatz(&ini, "ansatz")?;
        let mut f = Fields::from_ini(&ini, "discriminator");
        let discriminator = DiscriminatorSpec::new(
            gen_ansatz.n_qubits(),
            f.opt("n_readout")?.unwrap_or(1),
            f.opt("n_layers")?.unwrap_or(2),
        )?;
        f.finish()?;

        let mut f = Fields::from_ini(&ini, "train");
        let d = QganConfig::default();
        let train = QganConfig {
            iterations: f.opt("iterations")?.unwrap_or(d.iterations),
            batch_size: f.opt("batch_size")?.unwrap_or(d.batch_size),
            lr_gen: f.opt("lr_gen")?.unwrap_or(d.lr_gen),
            lr_disc: f.opt("lr_disc")?.unwrap_or(d.lr_disc),
            disc_steps_per_gen_step: f.opt("disc_steps")?.unwrap_or(d.disc_steps_per_gen_step),
            seed: f.opt("seed")?.unwrap_or(d.seed),
            eval_interval: f.opt("eval_interval")?.unwrap_or(d.eval_interval),
            optimizer: f.opt::<OptimizerKind>("optimizer")?.unwrap_or(d.optimizer),
            adam: parse_adam(&mut f)?,
            init_scale: f.opt("init_scale")?.unwrap_or(d.init_scale),
            epsilon_clip: f.opt("epsilon_clip")?.unwrap_or(d.epsilon_clip),
            sampled_mode: f.opt("sampled_mode")?.unwrap_or(d.sampled_mode),
        };
        f.finish()?;
        train.validate()?;
        let target = parse_target(&ini)?.ok_or_else(|| anyhow!("missing [target] section"))?;
        Ok(QganExperiment {
            generator: GeneratorSpec { ansatz: gen_ansatz },
            discriminator,
            train,
            target,
        })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        render_ansatz(&mut s, "ansatz", &self.generator.ansatz);
        let _ = writeln!(
            s,
            "\n[discriminator]\nn_readout = {}\nn_layers = {}",
            self.discriminator.n_readout(),
            self.discriminator.ansatz.n_layers()
        );
        let t = &self.train;
        let _ = writeln!(
            s,
            "\n[train]\niterations = {}\nbatch_size = {}\nlr_gen = {}\nlr_disc = {}\ndisc_steps = {}\nseed = {}\neval_interval = {}\noptimizer = {}\nbeta1 = {}\nbeta2 = {}\nadam_epsilon = {}\ninit_scale = {}\nepsilon_clip = {}\nsampled_mode = {}",
            t.iterations, t.batch_size, t.lr_gen, t.lr_disc, t.disc_steps_per_gen_step, t.seed,
            t.eval_interval, t.optimizer, t.adam.beta1, t.adam.beta2, t.adam.epsilon,
            t.init_scale, t.epsilon_clip, t.sampled_mode
        );
        s.push_str("\n[target]\n");
        self.target.write_fields(&mut s);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MLE: &str = "
[ansatz]
n_qubits = 1
n_layers = 1

[train]
iterations = 50
learning_rate = 0.1
dataset_size = 20

[target]
kind = point_mass
index = 1
";

    const QGAN: &str = "
[ansatz]
n_qubits = 2
n_layers = 2
input = zero

[discriminator]
n_readout = 1
n_layers = 2

[train]
iterations = 500
batch_size = 10
seed = 3

[target]
kind = uniform
";

    #[test]
    fn mle_config_parses_and_renders() {
        let e = MleExperiment::parse(MLE).unwrap();
        assert_eq!(e.train.iterations, 50);
        assert_eq!(e.train.learning_rate, 0.1);
        assert_eq!(e.data, DataSource::FromTarget { dataset_size: 20, seed: 0 });
        assert_eq!(e.target, Some(TargetSpec::PointMass { index: 1 }));
        assert_eq!(MleExperiment::parse(&e.render()).unwrap(), e);
    }

    #[test]
    fn qgan_config_parses_and_renders() {
        let e = QganExperiment::parse(QGAN).unwrap();
        assert_eq!(e.discriminator.ansatz.n_qubits(), 3);
        assert_eq!(e.train.batch_size, 10);
        assert_eq!(e.train.seed, 3);
        assert_eq!(QganExperiment::parse(&e.render()).unwrap(), e);
    }

    #[test]
    fn validation_errors() {
        assert!(MleExperiment::parse(&MLE.replace("iterations = 50", "iterations = 0")).is_err());
        assert!(MleExperiment::parse(&MLE.replace("n_layers = 1", "n_layerz = 1")).is_err());
        assert!(MleExperiment::parse(&format!("{MLE}\n[extra]\na = 1\n")).is_err());
        assert!(MleExperiment::parse(&MLE.replace("index = 1", "")).is_err());
        assert!(MleExperiment::parse("[ansatz]\nn_qubits = 1\n").is_err());
        assert!(QganExperiment::parse(&QGAN.replace("kind = uniform", "kind = bogus")).is_err());
        assert!(QganExperiment::parse(&QGAN.replace("n_readout = 1", "n_readout = 0")).is_err());
        assert!(QganExperiment::parse(&QGAN.replace("learning", "")).is_ok());
        assert!(QganExperiment::parse(&QGAN.replace("seed = 3", "seed = -3")).is_err());
    }

    #[test]
    fn target_spec_strings() {
        assert_eq!("uniform".parse::<TargetSpec>().unwrap(), TargetSpec::Uniform);
        assert_eq!(
            "gaussian:mean=3.5,std=1.2".parse::<TargetSpec>().unwrap(),
            TargetSpec::Gaussian { mean: Some(3.5), std: Some(1.2) }
        );
        assert_eq!("bas".parse::<TargetSpec>().unwrap(), TargetSpec::BarsAndStripes { rows: 2, cols: 2 });
        assert_eq!(
            "out/distribution.tsv".parse::<TargetSpec>().unwrap(),
            TargetSpec::File { path: "out/distribution.tsv".into() }
        );
        assert!("gaussian:mean".parse::<TargetSpec>().is_err());
        assert!("gaussian:median=2".parse::<TargetSpec>().is_err());
        assert!("".parse::<TargetSpec>().is_err());
    }

    #[test]
    fn targets_build() {
        let here = Path::new(".");
        let g = TargetSpec::Gaussian { mean: None, std: None }.build(3, here).unwrap();
        assert_eq!(g, gaussian_target(3, 3.5, 8.0 / 6.0).unwrap());
        assert!(TargetSpec::BarsAndStripes { rows: 2, cols: 2 }.build(3, here).is_err());
        let t = TargetSpec::Teacher { layers: 2, seed: 1, scale: 1.0 };
        assert_eq!(t.build(3, here).unwrap(), t.build(3, here).unwrap());
    }
}
