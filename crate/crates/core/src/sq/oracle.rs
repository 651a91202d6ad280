//! Statistical queries and the oracles that answer them.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::seed;

use super::concept::{Concept, FiniteDistribution};

/// Largest product space `|support|^k` that `kwise_answer` enumerates exactly.
pub const KWISE_EXACT_CAP: u128 = 1 << 24;

type UnaryPredicate = Arc<dyn Fn(&BitVec, bool) -> bool + Send + Sync>;
type KWisePredicate = Arc<dyn Fn(&[BitVec], &[bool]) -> bool + Send + Sync>;

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance {tau} outside (0, 1]")))
    }
}

/// A property `Q(x, ℓ)` of labeled examples with tolerance `τ`.
#[derive(Clone)]
pub struct SqQuery {
    predicate: UnaryPredicate,
    tau: f64,
    tag: u64,
}

impl fmt::Debug for SqQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SqQuery").field("tau", &self.tau).field("tag", &self.tag).finish()
    }
}

impl SqQuery {
    pub fn new<F>(tau: f64, predicate: F) -> Result<Self>
    where
        F: Fn(&BitVec, bool) -> bool + Send + Sync + 'static,
    {
        check_tau(tau)?;
        Ok(Self {
            predicate: Arc::new(predicate),
            tau,
            tag: 0,
        })
    }

    /// Sets the lane tag used by sampling oracles, so a query's sample does
    /// not depend on the order queries are asked in.
    pub fn with_tag(mut self, tag: u64) -> Self {
        self.tag = tag;
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn eval(&self, x: &BitVec, label: bool) -> bool {
        (self.predicate)(x, label)
    }
}

/// A property `Q(x₁…x_k, ℓ₁…ℓ_k)` of k-tuples of labeled examples.
#[derive(Clone)]
pub struct KWiseQuery {
    arity: usize,
    predicate: KWisePredicate,
    tau: f64,
    tag: u64,
}

impl fmt::Debug for KWiseQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KWiseQuery")
            .field("arity", &self.arity)
            .field("tau", &self.tau)
            .field("tag", &self.tag)
            .finish()
    }
}

impl KWiseQuery {
    pub fn new<F>(arity: usize, tau: f64, predicate: F) -> Result<Self>
    where
        F: Fn(&[BitVec], &[bool]) -> bool + Send + Sync + 'static,
    {
        if arity == 0 {
            return Err(Error::ZeroCount("arity"));
        }
        check_tau(tau)?;
        Ok(Self {
            arity,
            predicate: Arc::new(predicate),
            tau,
            tag: 0,
        })
    }

    /// The arity-1 query asking the same thing as `q`.
    pub fn from_unary(q: &SqQuery) -> Self {
        let inner = q.predicate.clone();
        Self {
            arity: 1,
            predicate: Arc::new(move |xs, ls| inner(&xs[0], ls[0])),
            tau: q.tau,
            tag: q.tag,
        }
    }

    pub fn with_tag(mut self, tag: u64) -> Self {
        self.tag = tag;
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn eval(&self, xs: &[BitVec], labels: &[bool]) -> bool {
        (self.predicate)(xs, labels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMode {
    Exact,
    /// Moves the exact answer by the full tolerance, away from ½, clamped to [0, 1].
    AdversarialWorst,
    /// Empirical frequency over `m` fresh draws on lane `(seed, query tag)`.
    Sampled { m: usize, seed: u64 },
}

fn adversarial(p: f64, tau: f64) -> f64 {
    let moved = if p >= 0.5 { p + tau } else { p - tau };
    moved.clamp(0.0, 1.0)
}

pub fn sq_answer(query: &SqQuery, concept: &Concept, dist: &FiniteDistribution, mode: OracleMode) -> Result<f64> {
    let exact = || dist.probability(|x| query.eval(x, concept.eval(x)));
    match mode {
        OracleMode::Exact => Ok(exact()),
        OracleMode::AdversarialWorst => Ok(adversarial(exact(), query.tau)),
        OracleMode::Sampled { m, seed } => {
            if m == 0 {
                return Err(Error::ZeroCount("m"));
            }
            let mut rng = seed::rng(seed::lane(seed, query.tag));
            let hits = (0..m)
                .filter(|_| {
                    let x = &dist.support()[dist.sample_index(&mut rng)];
                    query.eval(x, concept.eval(x))
                })
                .count();
            Ok(hits as f64 / m as f64)
        }
    }
}

/// `|support|^k`, checked against the exact-enumeration cap.
pub(crate) fn product_size(support: usize, k: usize) -> Result<usize> {
    let size = (support as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if size > KWISE_EXACT_CAP {
        return Err(Error::ProductSpaceTooLarge { size, cap: KWISE_EXACT_CAP });
    }
    Ok(size as usize)
}

/// `Σ` over all of `support^k` of `Π weights · f(tuple)`, split by first coordinate.
pub(crate) fn product_sum<F>(dist: &FiniteDistribution, k: usize, f: F) -> Result<f64>
where
    F: Fn(&[usize], &[BitVec]) -> f64 + Sync + Send,
{
    product_size(dist.len(), k)?;
    let support = dist.support();
    let weights = dist.weights();
    let partial = Exec::default().map(0..support.len(), |first| {
        let mut idx = vec![0usize; k];
        idx[0] = first;
        let mut xs: Vec<BitVec> = idx.iter().map(|&i| support[i].clone()).collect();
        let mut sum = 0.0;
        loop {
            let w: f64 = idx.iter().map(|&i| weights[i]).product();
            if w > 0.0 {
                sum += w * f(&idx, &xs);
            }
            // Odometer over positions 1..k.
            let mut pos = k;
            loop {
                pos -= 1;
                if pos == 0 {
                    return sum;
                }
                idx[pos] += 1;
                if idx[pos] < support.len() {
                    xs[pos] = support[idx[pos]].clone();
                    break;
                }
                idx[pos] = 0;
                xs[pos] = support[0].clone();
            }
        }
    });
    Ok(partial.iter().sum())
}

/// Probability of `query` over the k-fold product of `dist`, labels from `concept`.
pub fn kwise_answer(
    query: &KWiseQuery,
    concept: &Concept,
    dist: &FiniteDistribution,
    mode: OracleMode,
) -> Result<f64> {
    let k = query.arity;
    let labels: Vec<bool> = dist.support().iter().map(|x| concept.eval(x)).collect();
    let exact = || {
        product_sum(dist, k, |idx, xs| {
            let ls: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
            f64::from(u8::from(query.eval(xs, &ls)))
        })
    };
    match mode {
        OracleMode::Exact => exact(),
        OracleMode::AdversarialWorst => Ok(adversarial(exact()?, query.tau)),
        OracleMode::Sampled { m, seed } => {
            if m == 0 {
                return Err(Error::ZeroCount("m"));
            }
            let mut rng = seed::rng(seed::lane(seed, query.tag));
            let mut xs = Vec::with_capacity(k);
            let mut ls = Vec::with_capacity(k);
            let mut hits = 0usize;
            for _ in 0..m {
                xs.clear();
                ls.clear();
                for _ in 0..k {
                    let i = dist.sample_index(&mut rng);
                    xs.push(dist.support()[i].clone());
                    ls.push(labels[i]);
                }
                hits += usize::from(query.eval(&xs, &ls));
            }
            Ok(hits as f64 / m as f64)
        }
    }
}

/// `Pr_D[h = c] − ½`.
pub fn weak_advantage(h: &Concept, c: &Concept, dist: &FiniteDistribution) -> f64 {
    dist.probability(|x| h.eval(x) == c.eval(x)) - 0.5
}

pub trait UnaryOracle: Sync {
    fn answer(&self, query: &SqQuery) -> Result<f64>;
}

pub trait KWiseOracle: Sync {
    fn answer_kwise(&self, query: &KWiseQuery) -> Result<f64>;
}

/// Answers queries about a known concept and distribution.
#[derive(Debug)]
pub struct SimulatedOracle {
    concept: Concept,
    dist: FiniteDistribution,
    mode: OracleMode,
    budget: Option<usize>,
    answered: AtomicUsize,
}

impl SimulatedOracle {
    pub fn new(concept: Concept, dist: FiniteDistribution, mode: OracleMode) -> Self {
        Self {
            concept,
            dist,
            mode,
            budget: None,
            answered: AtomicUsize::new(0),
        }
    }

    /// Refuses queries after `budget` have been answered.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn answered(&self) -> usize {
        self.answered.load(Ordering::Relaxed)
    }

    pub fn concept(&self) -> &Concept {
        &self.concept
    }

    pub fn distribution(&self) -> &FiniteDistribution {
        &self.dist
    }

    fn charge(&self) -> Result<()> {
        let used = self.answered.fetch_add(1, Ordering::Relaxed);
        match self.budget {
            Some(b) if used >= b => {
                self.answered.fetch_sub(1, Ordering::Relaxed);
                Err(Error::QueryBudgetExceeded(b))
            }
            _ => Ok(()),
        }
    }
}

impl UnaryOracle for SimulatedOracle {
    fn answer(&self, query: &SqQuery) -> Result<f64> {
        self.charge()?;
        sq_answer(query, &self.concept, &self.dist, self.mode)
    }
}

impl KWiseOracle for SimulatedOracle {
    fn answer_kwise(&self, query: &KWiseQuery) -> Result<f64> {
        self.charge()?;
        kwise_answer(query, &self.concept, &self.dist, self.mode)
    }
}
