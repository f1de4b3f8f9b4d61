//! Target distributions, datasets and the divergences used to score
//! generated distributions.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::sampling::{CdfSampler, Distribution, SampleSet};
use crate::statevector::{check_qubits, BitString};

/// Probability floor used inside `kl`.
pub const KL_FLOOR: f64 = 1e-12;

pub fn uniform_target(n_bits: usize) -> Result<Distribution> {
    let dim = 1usize << check_qubits(n_bits)?;
    Distribution::new(n_bits, vec![1.0 / dim as f64; dim])
}

/// Discretized Gaussian over bin indices `0 … 2^n − 1`.
pub fn gaussian_target(n_bits: usize, mean: f64, std: f64) -> Result<Distribution> {
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::InvalidArgument(format!("std {std} must be positive")));
    }
    if !mean.is_finite() {
        return Err(Error::NonFinite(mean));
    }
    let dim = 1usize << check_qubits(n_bits)?;
    let weights = (0..dim)
        .map(|i| (-(i as f64 - mean).powi(2) / (2.0 * std * std)).exp())
        .collect();
    Distribution::from_weights(n_bits, weights)
}

/// Default Gaussian parameters for `n_bits`: centred, std = 2^n / 6.
pub fn default_gaussian_params(n_bits: usize) -> (f64, f64) {
    let dim = (1usize << n_bits) as f64;
    ((dim - 1.0) / 2.0, dim / 6.0)
}

/// All bar/stripe images on a `rows × cols` grid. Pixel `(r, c)` is
/// qubit `r·cols + c`, so the top-left pixel is the leading bit.
pub fn bars_and_stripes_patterns(rows: usize, cols: usize) -> Result<Vec<usize>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
    }
    let n = check_qubits(rows * cols)?;
    let pixel = |r: usize, c: usize| 1usize << (n - 1 - (r * cols + c));
    let mut set = BTreeSet::new();
    for mask in 0..(1usize << rows) {
        let img = (0..rows)
            .filter(|r| mask >> r & 1 == 1)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .fold(0, |acc, (r, c)| acc | pixel(r, c));
        set.insert(img);
    }
    for mask in 0..(1usize << cols) {
        let img = (0..cols)
            .filter(|c| mask >> c & 1 == 1)
            .flat_map(|c| (0..rows).map(move |r| (r, c)))
            .fold(0, |acc, (r, c)| acc | pixel(r, c));
        set.insert(img);
    }
    Ok(set.into_iter().collect())
}

/// Uniform over the `2^rows + 2^cols − 2` bar/stripe images.
pub fn bars_and_stripes_target(rows: usize, cols: usize) -> Result<Distribution> {
    let patterns = bars_and_stripes_patterns(rows, cols)?;
    let n = rows * cols;
    let mut probs = vec![0.0; 1 << n];
    let p = 1.0 / patterns.len() as f64;
    for i in patterns {
        probs[i] = p;
    }
    Distribution::new(n, probs)
}

/// Ordered training samples, repeats allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n_bits: usize,
    samples: Vec<BitString>,
}

impl Dataset {
    pub fn new(n_bits: usize, samples: Vec<BitString>) -> Result<Self> {
        check_qubits(n_bits)?;
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(bad) = samples.iter().find(|s| s.n_bits() != n_bits) {
            return Err(Error::LengthMismatch {
                what: "dataset sample",
                expected: n_bits,
                got: bad.n_bits(),
            });
        }
        Ok(Dataset { n_bits, samples })
    }

    /// Expands a count table into samples in ascending outcome order.
    pub fn from_counts(counts: &SampleSet) -> Result<Self> {
        let samples = counts
            .iter()
            .flat_map(|(x, c)| std::iter::repeat_n(x, c as usize))
            .collect();
        Dataset::new(counts.n_bits(), samples)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[BitString] {
        &self.samples
    }

    pub fn counts(&self) -> SampleSet {
        let mut set = SampleSet::new(self.n_bits).expect("validated width");
        for s in &self.samples {
            set.add(s, 1).expect("validated width");
        }
        set
    }

    pub fn empirical(&self) -> Distribution {
        Distribution::from_samples(&self.counts()).expect("nonempty")
    }
}

/// `n_samples` seeded i.i.d. draws from `dist`, in draw order.
pub fn dataset_from_distribution(dist: &Distribution, n_samples: usize, seed: u64) -> Result<Dataset> {
    if n_samples == 0 {
        return Err(Error::EmptyDataset);
    }
    let sampler = CdfSampler::new(dist);
    let mut rng = seeded_rng(seed);
    let samples = (0..n_samples)
        .map(|_| BitString::new(dist.n_bits(), sampler.draw(&mut rng)))
        .collect::<Result<_>>()?;
    Dataset::new(dist.n_bits(), samples)
}

/// Mean and population standard deviation of the outcome index.
pub trait OutcomeMoments {
    fn mean_std(&self) -> Result<(f64, f64)>;
}

fn moments(weights: impl Iterator<Item = (usize, f64)> + Clone) -> Result<(f64, f64)> {
    let total: f64 = weights.clone().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::EmptyDataset);
    }
    let mean = weights.clone().map(|(i, w)| i as f64 * w).sum::<f64>() / total;
    let var = weights.map(|(i, w)| (i as f64 - mean).powi(2) * w).sum::<f64>() / total;
    Ok((mean, var.sqrt()))
}

impl OutcomeMoments for Distribution {
    fn mean_std(&self) -> Result<(f64, f64)> {
        moments(self.probs().iter().copied().enumerate())
    }
}

impl OutcomeMoments for SampleSet {
    fn mean_std(&self) -> Result<(f64, f64)> {
        let pairs: Vec<(usize, f64)> = self.iter().map(|(x, c)| (x.index(), c as f64)).collect();
        moments(pairs.into_iter())
    }
}

/// `KL(p ‖ q)` in nats; `q` is floored at [`KL_FLOOR`].
pub fn kl(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_shape(q)?;
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b.max(KL_FLOOR)).ln())
        .sum())
}

/// Jensen–Shannon divergence in bits, in `[0, 1]`.
pub fn js(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_shape(q)?;
    let half_kl = |a: &[f64], m: &[f64]| -> f64 {
        a.iter()
            .zip(m)
            .filter(|(&x, _)| x > 0.0)
            .map(|(&x, &y)| x * (x / y).log2())
            .sum()
    };
    let m: Vec<f64> = p.probs().iter().zip(q.probs()).map(|(a, b)| 0.5 * (a + b)).collect();
    let v = 0.5 * half_kl(p.probs(), &m) + 0.5 * half_kl(q.probs(), &m);
    Ok(v.clamp(0.0, 1.0))
}

/// Total variation: half the L1 distance.
pub fn tv(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_shape(q)?;
    Ok(0.5 * p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}
