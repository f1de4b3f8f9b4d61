//! Born distributions, measurement sampling and count tables.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::ansatz::{LayeredAnsatz, ParamVector};
use crate::error::{Error, Result};
use crate::rng::{seeded_rng, Rng};
use crate::statevector::{check_qubits, BitString};

const NORM_TOL: f64 = 1e-9;

/// Probability vector over the `2^n_bits` outcomes, indexed MSB-first.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    n_bits: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(n_bits: usize, probs: Vec<f64>) -> Result<Self> {
        check_qubits(n_bits)?;
        if probs.len() != 1 << n_bits {
            return Err(Error::LengthMismatch {
                what: "distribution",
                expected: 1 << n_bits,
                got: probs.len(),
            });
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("probability {bad}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Distribution { n_bits, probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(n_bits: usize, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidArgument(format!("weights sum to {total}")));
        }
        Distribution::new(n_bits, weights.into_iter().map(|w| w / total).collect())
    }

    pub(crate) fn from_probs_unchecked(n_bits: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), 1 << n_bits);
        Distribution { n_bits, probs }
    }

    pub fn point_mass(n_bits: usize, index: usize) -> Result<Self> {
        let x = BitString::new(n_bits, index)?;
        let mut probs = vec![0.0; 1 << n_bits];
        probs[x.index()] = 1.0;
        Ok(Distribution { n_bits, probs })
    }

    /// Empirical distribution of a count table.
    pub fn from_samples(samples: &SampleSet) -> Result<Self> {
        if samples.total == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut probs = vec![0.0; 1 << samples.n_bits];
        for (&i, &c) in &samples.counts {
            probs[i] = c as f64 / samples.total as f64;
        }
        Ok(Distribution {
            n_bits: samples.n_bits,
            probs,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &BitString) -> Result<f64> {
        if x.n_bits() != self.n_bits {
            return Err(Error::LengthMismatch {
                what: "bitstring",
                expected: self.n_bits,
                got: x.n_bits(),
            });
        }
        Ok(self.probs[x.index()])
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub(crate) fn check_same_shape(&self, other: &Distribution) -> Result<()> {
        if self.n_bits != other.n_bits {
            return Err(Error::LengthMismatch {
                what: "distribution",
                expected: self.probs.len(),
                got: other.probs.len(),
            });
        }
        Ok(())
    }
}

/// Outcome counts from repeated measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    n_bits: usize,
    counts: BTreeMap<usize, u64>,
    total: u64,
}

impl SampleSet {
    pub fn new(n_bits: usize) -> Result<Self> {
        check_qubits(n_bits)?;
        Ok(SampleSet {
            n_bits,
            counts: BTreeMap::new(),
            total: 0,
        })
    }

    pub fn add(&mut self, x: &BitString, count: u64) -> Result<()> {
        if x.n_bits() != self.n_bits {
            return Err(Error::LengthMismatch {
                what: "bitstring",
                expected: self.n_bits,
                got: x.n_bits(),
            });
        }
        if count > 0 {
            *self.counts.entry(x.index()).or_insert(0) += count;
            self.total += count;
        }
        Ok(())
    }

    pub(crate) fn add_index(&mut self, index: usize) {
        *self.counts.entry(index).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    /// Nonzero counts in ascending outcome order.
    pub fn iter(&self) -> impl Iterator<Item = (BitString, u64)> + '_ {
        self.counts.iter().map(|(&i, &c)| {
            (
                BitString::new(self.n_bits, i).expect("stored indices fit"),
                c,
            )
        })
    }

    pub fn frequency(&self, index: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(index) as f64 / self.total as f64
        }
    }
}

/// Inverse-CDF sampler over a precomputed cumulative table.
#[derive(Debug, Clone)]
pub struct CdfSampler {
    n_bits: usize,
    cdf: Vec<f64>,
    last_positive: usize,
}

impl CdfSampler {
    pub fn new(dist: &Distribution) -> Self {
        let mut acc = 0.0;
        let cdf = dist
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = dist.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        CdfSampler {
            n_bits: dist.n_bits,
            cdf,
            last_positive,
        }
    }

    /// One draw: the first index whose cumulative mass exceeds
    /// `u · total`, with `u` uniform in [0, 1).
    pub fn draw(&self, rng: &mut Rng) -> usize {
        let total = *self.cdf.last().expect("nonempty");
        let u = rng.random::<f64>() * total;
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.last_positive)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }
}

/// `n_samples` i.i.d. measurement outcomes drawn with `ChaCha8(seed)`.
pub fn sample(dist: &Distribution, n_samples: u64, seed: u64) -> Result<SampleSet> {
    sample_with(dist, n_samples, &mut seeded_rng(seed))
}

pub fn sample_with(dist: &Distribution, n_samples: u64, rng: &mut Rng) -> Result<SampleSet> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let sampler = CdfSampler::new(dist);
    let mut set = SampleSet::new(dist.n_bits)?;
    for _ in 0..n_samples {
        set.add_index(sampler.draw(rng));
    }
    Ok(set)
}

/// `p(x) = |⟨x|ψ(params)⟩|²`.
pub fn born_probability(ansatz: &LayeredAnsatz, params: &ParamVector, x: &BitString) -> Result<f64> {
    if x.n_bits() != ansatz.n_qubits() {
        return Err(Error::LengthMismatch {
            what: "bitstring",
            expected: ansatz.n_qubits(),
            got: x.n_bits(),
        });
    }
    let state = ansatz.evaluate(params)?;
    Ok(state.amplitudes()[x.index()].norm_sqr())
}

/// Pearson chi-square statistic of observed counts against `dist`, with
/// its degrees of freedom (support size − 1). Outcomes with zero expected
/// probability are excluded; an observation on one gives an infinite
/// statistic.
pub fn chi_square_statistic(samples: &SampleSet, dist: &Distribution) -> Result<(f64, usize)> {
    if samples.n_bits != dist.n_bits {
        return Err(Error::LengthMismatch {
            what: "sample set",
            expected: dist.n_bits,
            got: samples.n_bits,
        });
    }
    let n = samples.total as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (i, &p) in dist.probs.iter().enumerate() {
        let observed = samples.count(i) as f64;
        if p > 0.0 {
            let expected = n * p;
            stat += (observed - expected).powi(2) / expected;
            bins += 1;
        } else if observed > 0.0 {
            return Ok((f64::INFINITY, bins.saturating_sub(1)));
        }
    }
    Ok((stat, bins.saturating_sub(1)))
}
