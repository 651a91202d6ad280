//! Planted parity targets and the noisy labeled-example oracle.
//!
//! An [`ExampleSource`] draws `x` from its distribution and returns
//! `(x, x·c ⊕ flip)` where `flip` is a fresh Bernoulli(η) bit on every draw,
//! even when the same `x` repeats. Sources are deterministic functions of their
//! seed: the target (when random) comes from the `"target"` lane and the draws
//! from the `"draws"` lane (see [`crate::seed`]).

pub mod format;

use std::sync::Arc;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::seed::{self, LaneRng};

/// Random classification noise rate, `0 <= η < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseRate(f64);

impl NoiseRate {
    pub const ZERO: NoiseRate = NoiseRate(0.0);

    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() && (0.0..0.5).contains(&eta) {
            Ok(Self(eta))
        } else {
            Err(Error::InvalidNoiseRate(eta))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// The secret vector `c` of a parity function `x ↦ x·c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParityTarget(BitVec);

impl ParityTarget {
    pub fn new(c: BitVec) -> Self {
        Self(c)
    }

    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        Self(random_vector(k, rng))
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    pub fn into_bits(self) -> BitVec {
        self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn label(&self, x: &BitVec) -> Result<bool> {
        x.dot(&self.0)
    }
}

impl std::fmt::Display for ParityTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

pub enum TargetSpec {
    Given(ParityTarget),
    Random,
}

pub(crate) fn random_vector<R: Rng + ?Sized>(k: usize, rng: &mut R) -> BitVec {
    let n = k.div_ceil(64);
    let mut words = [0u64; 4];
    if n <= words.len() {
        for w in words.iter_mut().take(n) {
            *w = rng.next_u64();
        }
        BitVec::from_words(k, &words[..n])
    } else {
        let words: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
        BitVec::from_words(k, &words)
    }
}

/// A finite support with probabilities.
#[derive(Debug, Clone)]
pub struct ExplicitDistribution {
    support: Arc<[BitVec]>,
    probabilities: Arc<[f64]>,
    sampler: WeightedIndex<f64>,
}

impl ExplicitDistribution {
    pub fn new(support: Vec<BitVec>, probabilities: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probabilities.len() {
            return Err(Error::MalformedDistribution(format!(
                "{} support points for {} probabilities",
                support.len(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::MalformedDistribution("negative or non-finite probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::MalformedDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let sampler = WeightedIndex::new(&probabilities)
            .map_err(|e| Error::MalformedDistribution(e.to_string()))?;
        Ok(Self {
            support: support.into(),
            probabilities: probabilities.into(),
            sampler,
        })
    }

    pub fn support(&self) -> &[BitVec] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

#[derive(Debug, Clone)]
pub enum Distribution {
    Uniform,
    Explicit(ExplicitDistribution),
    /// Externally supplied inputs, consumed in order.
    Stream(Arc<[BitVec]>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub x: BitVec,
    pub label: bool,
    /// Draw sequence number within the issuing source.
    pub index: u64,
}

/// Anything that hands out labeled examples one at a time.
pub trait ExampleOracle {
    fn k(&self) -> usize;

    fn draw(&mut self) -> Result<LabeledExample>;

    /// Number of examples issued so far.
    fn draw_count(&self) -> u64;

    /// The planted target, when known (generated instances and fixtures).
    fn target(&self) -> Option<&ParityTarget>;

    /// An independent oracle for the same problem on its own seed lane, if the
    /// oracle can be split at all.
    fn split(&self, lane: u64) -> Option<Self>
    where
        Self: Sized;
}

#[derive(Debug, Clone)]
pub struct ExampleSource {
    k: usize,
    target: ParityTarget,
    eta: NoiseRate,
    distribution: Distribution,
    seed: u64,
    draw_count: u64,
    rng: LaneRng,
}

/// Builds a seeded source. Equal arguments give identical example streams.
pub fn new_source(
    k: usize,
    eta: f64,
    distribution: Distribution,
    seed: u64,
    target: TargetSpec,
) -> Result<ExampleSource> {
    let eta = NoiseRate::new(eta)?;
    match &distribution {
        Distribution::Uniform => {}
        Distribution::Explicit(d) => {
            if let Some(bad) = d.support().iter().find(|x| x.len() != k) {
                return Err(Error::MalformedDistribution(format!(
                    "support vector of length {} for k={k}",
                    bad.len()
                )));
            }
        }
        Distribution::Stream(xs) => {
            if let Some(bad) = xs.iter().find(|x| x.len() != k) {
                return Err(Error::MalformedDistribution(format!(
                    "stream vector of length {} for k={k}",
                    bad.len()
                )));
            }
        }
    }
    let target = match target {
        TargetSpec::Given(t) => {
            if t.k() != k {
                return Err(Error::LengthMismatch {
                    left: t.k(),
                    right: k,
                });
            }
            t
        }
        TargetSpec::Random => {
            ParityTarget::random(k, &mut seed::rng(seed::named_lane(seed, "target")))
        }
    };
    Ok(ExampleSource {
        k,
        target,
        eta,
        distribution,
        seed,
        draw_count: 0,
        rng: seed::rng(seed::named_lane(seed, "draws")),
    })
}

impl ExampleSource {
    pub fn uniform(k: usize, eta: f64, seed: u64, target: TargetSpec) -> Result<Self> {
        new_source(k, eta, Distribution::Uniform, seed, target)
    }

    pub fn eta(&self) -> NoiseRate {
        self.eta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> &Distribution {
        &self.distribution
    }

    pub fn planted(&self) -> &ParityTarget {
        &self.target
    }

    pub fn draw_many(&mut self, n: usize) -> Result<Vec<LabeledExample>> {
        (0..n).map(|_| self.draw()).collect()
    }
}

impl ExampleOracle for ExampleSource {
    fn k(&self) -> usize {
        self.k
    }

    fn draw(&mut self) -> Result<LabeledExample> {
        let x = match &self.distribution {
            Distribution::Uniform => random_vector(self.k, &mut self.rng),
            Distribution::Explicit(d) => d.support[d.sampler.sample(&mut self.rng)].clone(),
            Distribution::Stream(xs) => xs
                .get(self.draw_count as usize)
                .cloned()
                .ok_or(Error::StreamExhausted(self.draw_count))?,
        };
        let eta = self.eta.get();
        let flip = eta > 0.0 && self.rng.gen::<f64>() < eta;
        let label = x.dot_unchecked(self.target.bits()) ^ flip;
        let index = self.draw_count;
        self.draw_count += 1;
        Ok(LabeledExample { x, label, index })
    }

    fn draw_count(&self) -> u64 {
        self.draw_count
    }

    fn target(&self) -> Option<&ParityTarget> {
        Some(&self.target)
    }

    fn split(&self, lane: u64) -> Option<Self> {
        if matches!(self.distribution, Distribution::Stream(_)) {
            return None;
        }
        let seed = seed::lane(self.seed, lane);
        Some(ExampleSource {
            k: self.k,
            target: self.target.clone(),
            eta: self.eta,
            distribution: self.distribution.clone(),
            seed,
            draw_count: 0,
            rng: seed::rng(seed::named_lane(seed, "draws")),
        })
    }
}

/// Replays a fixed list of already-labeled examples, e.g. from an instance file.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    k: usize,
    examples: Arc<[LabeledExample]>,
    position: usize,
    target: Option<ParityTarget>,
}

impl ReplaySource {
    pub fn new(k: usize, examples: Vec<LabeledExample>, target: Option<ParityTarget>) -> Result<Self> {
        if let Some(bad) = examples.iter().find(|e| e.x.len() != k) {
            return Err(Error::LengthMismatch {
                left: bad.x.len(),
                right: k,
            });
        }
        Ok(Self {
            k,
            examples: examples.into(),
            position: 0,
            target,
        })
    }

    pub fn remaining(&self) -> usize {
        self.examples.len() - self.position
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }
}

impl ExampleOracle for ReplaySource {
    fn k(&self) -> usize {
        self.k
    }

    fn draw(&mut self) -> Result<LabeledExample> {
        let e = self
            .examples
            .get(self.position)
            .cloned()
            .ok_or(Error::StreamExhausted(self.position as u64))?;
        self.position += 1;
        Ok(e)
    }

    fn draw_count(&self) -> u64 {
        self.position as u64
    }

    fn target(&self) -> Option<&ParityTarget> {
        self.target.as_ref()
    }

    fn split(&self, _lane: u64) -> Option<Self> {
        None
    }
}

/// Fraction of `sample` on which `x·h` disagrees with the recorded label.
pub fn empirical_error(h: &ParityTarget, sample: &[LabeledExample]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut wrong = 0usize;
    for e in sample {
        if h.label(&e.x)? != e.label {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / sample.len() as f64)
}
