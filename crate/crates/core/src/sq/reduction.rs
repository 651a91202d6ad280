//! Simulating a k-wise statistical query with unary queries and unlabeled data.
//!
//! For a random tuple `z` of unlabeled examples, each slot `i` and each label
//! vector `ℓ` give a candidate `h(x) = Q(z with x at slot i, ℓ)`. If some
//! candidate satisfies `|Pr[h ∧ c=1] − ½Pr[h]| ≥ ε`, it (or its complement) is
//! a weak hypothesis. Otherwise labels barely matter to `Q`, and averaging
//! `Pr_z[Q(z, ℓ)]` over all `ℓ` estimates the k-wise answer from unlabeled data.

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::seed;

use super::concept::{Concept, FiniteDistribution};
use super::oracle::{product_sum, KWiseQuery, SqQuery, UnaryOracle};

/// Largest arity whose `2^k` label vectors are enumerated.
pub const REDUCTION_MAX_ARITY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateMode {
    /// Exhaustive over the unlabeled product space.
    Exact,
    /// `m` random unlabeled tuples.
    Sampled { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConfig {
    pub eps: f64,
    pub delta: f64,
    /// Tuples to try before falling back to estimation; `None` means
    /// `⌈4/ε·ln(1/δ)⌉`.
    pub tuples: Option<usize>,
    pub estimate: EstimateMode,
    pub max_queries: Option<usize>,
    pub seed: u64,
    pub exec: Exec,
}

impl ReductionConfig {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::InvalidParameter(format!("eps {eps} outside (0, 1/2]")));
        }
        Ok(Self {
            eps,
            delta: 0.05,
            tuples: None,
            estimate: EstimateMode::Exact,
            max_queries: None,
            seed: 0,
            exec: Exec::default(),
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1)")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_tuples(mut self, tuples: usize) -> Self {
        self.tuples = Some(tuples);
        self
    }

    pub fn with_estimate(mut self, estimate: EstimateMode) -> Self {
        self.estimate = estimate;
        self
    }

    pub fn with_max_queries(mut self, max_queries: usize) -> Self {
        self.max_queries = Some(max_queries);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn tuple_count(&self) -> usize {
        self.tuples
            .unwrap_or_else(|| (4.0 / self.eps * (1.0 / self.delta).ln()).ceil() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisSource {
    /// The target is unbalanced; predict its majority value.
    Balance { predict: bool },
    Candidate {
        tuple: usize,
        /// 1-based slot replaced by the input.
        slot: usize,
        /// Label vector, `ℓ_i` in bit `i − 1`.
        labels: u64,
        complemented: bool,
    },
}

#[derive(Debug, Clone)]
pub enum ReductionOutcome {
    WeakHypothesis {
        hypothesis: Concept,
        /// Measured `Pr[h = c] − ½`.
        advantage: f64,
        source: HypothesisSource,
    },
    Estimate { value: f64, error_bound: f64 },
}

#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub outcome: ReductionOutcome,
    pub queries_used: usize,
    pub tuples_tried: usize,
}

/// `4ε(2^k − 1)/2^k`.
pub fn estimate_error_bound(eps: f64, k: usize) -> f64 {
    let scale = (1u64 << k) as f64;
    4.0 * eps * (scale - 1.0) / scale
}

fn candidate(query: &KWiseQuery, z: &[BitVec], slot: usize, labels: u64, tuple: usize) -> Concept {
    let q = query.clone();
    let z = z.to_vec();
    let ls: Vec<bool> = (0..z.len()).map(|i| labels >> i & 1 == 1).collect();
    let id = format!("h[t={tuple},i={},l={labels}]", slot + 1);
    Concept::from_fn(id, move |x| {
        let mut xs = z.clone();
        xs[slot] = x.clone();
        q.eval(&xs, &ls)
    })
}

fn tag(tuple: usize, slot: usize, labels: u64, k: usize, kind: u64) -> u64 {
    ((((tuple * k + slot) as u64) << k | labels) << 2) | kind
}

struct Hit {
    tuple: usize,
    position: usize,
    hypothesis: Concept,
    source: HypothesisSource,
}

/// Runs the reduction for `query` against `oracle`, drawing unlabeled tuples
/// from `unlabeled` on lanes of `config.seed`.
pub fn kwise_to_unary_reduce<O: UnaryOracle>(
    query: &KWiseQuery,
    oracle: &O,
    unlabeled: &FiniteDistribution,
    config: &ReductionConfig,
) -> Result<ReductionReport> {
    let k = query.arity();
    if k > REDUCTION_MAX_ARITY {
        return Err(Error::TooManyBits { k, cap: REDUCTION_MAX_ARITY });
    }
    let eps = config.eps;
    let budget = config.max_queries.unwrap_or(usize::MAX);
    let charge = |used: usize| {
        if used > budget {
            Err(Error::QueryBudgetExceeded(budget))
        } else {
            Ok(used)
        }
    };

    let balance = SqQuery::new(eps / 2.0, |_, l| l)?.with_tag(u64::MAX);
    let p_one = oracle.answer(&balance)?;
    let mut used = charge(1)?;
    if (p_one - 0.5).abs() >= eps {
        let predict = p_one > 0.5;
        return Ok(ReductionReport {
            outcome: ReductionOutcome::WeakHypothesis {
                hypothesis: Concept::constant(predict),
                advantage: (p_one - 0.5).abs(),
                source: HypothesisSource::Balance { predict },
            },
            queries_used: used,
            tuples_tried: 0,
        });
    }

    let label_vectors = 1u64 << k;
    let per_tuple = 2 * k * label_vectors as usize;
    let total = config.tuple_count();
    let affordable = (budget - used) / per_tuple;
    let limit = total.min(affordable.saturating_add(1));
    let tau = eps / 4.0;

    let hit = config.exec.find_first(0..limit, |t| {
        let mut rng = seed::rng(seed::lane(seed::named_lane(config.seed, "tuples"), t as u64));
        let z: Vec<BitVec> = (0..k).map(|_| unlabeled.sample(&mut rng)).collect();
        for slot in 0..k {
            for labels in 0..label_vectors {
                let h = candidate(query, &z, slot, labels, t);
                let (h1, h2) = (h.clone(), h.clone());
                let joint = SqQuery::new(tau, move |x, l| l && h1.eval(x)).ok()?;
                let mass = SqQuery::new(tau, move |x, _| h2.eval(x)).ok()?;
                let a = oracle.answer(&joint.with_tag(tag(t, slot, labels, k, 0)));
                let b = oracle.answer(&mass.with_tag(tag(t, slot, labels, k, 1)));
                let (a, b) = match (a, b) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => return Some(Err(e)),
                };
                let gap = a - 0.5 * b;
                if gap.abs() >= eps {
                    let complemented = gap < 0.0;
                    return Some(Ok(Hit {
                        tuple: t,
                        position: slot * label_vectors as usize + labels as usize,
                        hypothesis: if complemented { h.complement() } else { h },
                        source: HypothesisSource::Candidate {
                            tuple: t,
                            slot: slot + 1,
                            labels,
                            complemented,
                        },
                    }));
                }
            }
        }
        None
    });

    match hit.transpose()? {
        Some(hit) => {
            used = charge(used + hit.tuple * per_tuple + 2 * (hit.position + 1))?;
            let h = hit.hypothesis.clone();
            let agree = SqQuery::new(tau, move |x, l| h.eval(x) == l)?
                .with_tag(tag(hit.tuple, 0, 0, k, 2));
            let advantage = oracle.answer(&agree)? - 0.5;
            used = charge(used + 1)?;
            Ok(ReductionReport {
                outcome: ReductionOutcome::WeakHypothesis {
                    hypothesis: hit.hypothesis,
                    advantage,
                    source: hit.source,
                },
                queries_used: used,
                tuples_tried: hit.tuple + 1,
            })
        }
        None => {
            used = charge(used + total.saturating_mul(per_tuple))?;
            let value = unlabeled_estimate(query, unlabeled, config)?;
            Ok(ReductionReport {
                outcome: ReductionOutcome::Estimate {
                    value,
                    error_bound: estimate_error_bound(eps, k),
                },
                queries_used: used,
                tuples_tried: total,
            })
        }
    }
}

/// `Σ_ℓ 2^{−k}·Pr_z[Q(z, ℓ)]`, from unlabeled tuples only.
pub fn unlabeled_estimate(query: &KWiseQuery, unlabeled: &FiniteDistribution, config: &ReductionConfig) -> Result<f64> {
    let k = query.arity();
    let label_vectors = 1u64 << k;
    let all_labels: Vec<Vec<bool>> = (0..label_vectors)
        .map(|l| (0..k).map(|i| l >> i & 1 == 1).collect())
        .collect();
    let fraction = |xs: &[BitVec]| {
        all_labels.iter().filter(|ls| query.eval(xs, ls)).count() as f64 / label_vectors as f64
    };
    match config.estimate {
        EstimateMode::Exact => product_sum(unlabeled, k, |_, xs| fraction(xs)),
        EstimateMode::Sampled { m } => {
            if m == 0 {
                return Err(Error::ZeroCount("m"));
            }
            let mut rng = seed::rng(seed::named_lane(config.seed, "estimate"));
            let mut sum = 0.0;
            for _ in 0..m {
                let xs: Vec<BitVec> = (0..k).map(|_| unlabeled.sample(&mut rng)).collect();
                sum += fraction(&xs);
            }
            Ok(sum / m as f64)
        }
    }
}

/// True when some tuple in the support, slot and label vector satisfies the
/// weak-hypothesis test exactly, i.e. the estimation branch's premise fails.
pub fn case_one_exists(
    query: &KWiseQuery,
    concept: &Concept,
    dist: &FiniteDistribution,
    eps: f64,
) -> Result<bool> {
    let k = query.arity();
    if k > REDUCTION_MAX_ARITY {
        return Err(Error::TooManyBits { k, cap: REDUCTION_MAX_ARITY });
    }
    let labels: Vec<bool> = dist.support().iter().map(|x| concept.eval(x)).collect();
    let firing = product_sum(dist, k, |_, z| {
        let mut xs = z.to_vec();
        for slot in 0..k {
            for l in 0..1u64 << k {
                let ls: Vec<bool> = (0..k).map(|i| l >> i & 1 == 1).collect();
                let (mut joint, mut mass) = (0.0, 0.0);
                for ((x, w), &c) in dist.support().iter().zip(dist.weights()).zip(&labels) {
                    xs[slot] = x.clone();
                    if query.eval(&xs, &ls) {
                        mass += w;
                        if c {
                            joint += w;
                        }
                    }
                }
                xs[slot] = z[slot].clone();
                if (joint - 0.5 * mass).abs() >= eps {
                    return 1.0;
                }
            }
        }
        0.0
    })?;
    Ok(firing > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sq::{kwise_answer, weak_advantage, OracleMode, SimulatedOracle};
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn exact_oracle(c: &Concept, d: &FiniteDistribution) -> SimulatedOracle {
        SimulatedOracle::new(c.clone(), d.clone(), OracleMode::Exact)
    }

    #[test]
    fn default_tuple_count() {
        let c = ReductionConfig::new(0.05).unwrap();
        assert_eq!(c.tuple_count(), (80.0 * 20f64.ln()).ceil() as usize);
        assert_eq!(c.with_tuples(7).tuple_count(), 7);
        assert!(ReductionConfig::new(0.0).is_err());
        assert!(c.with_delta(1.0).is_err());
    }

    #[test]
    fn label_independent_query_estimates_exactly() {
        let d = FiniteDistribution::uniform(3).unwrap();
        let c = Concept::parity(bv("101"));
        let q = KWiseQuery::new(2, 0.1, |xs, _| xs[0].get(0) || xs[1].get(2)).unwrap();
        let cfg = ReductionConfig::new(0.05).unwrap().with_tuples(20);
        let r = kwise_to_unary_reduce(&q, &exact_oracle(&c, &d), &d, &cfg).unwrap();
        let truth = kwise_answer(&q, &c, &d, OracleMode::Exact).unwrap();
        match r.outcome {
            ReductionOutcome::Estimate { value, error_bound } => {
                assert_eq!(value, truth);
                assert!((error_bound - 0.15).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(r.tuples_tried, 20);
        assert_eq!(r.queries_used, 1 + 20 * 2 * 2 * 4);
    }

    #[test]
    fn label_matters_gives_weak_hypothesis() {
        let d = FiniteDistribution::uniform(4).unwrap();
        let c = Concept::parity(bv("1000"));
        let q = KWiseQuery::new(1, 0.1, |xs, ls| ls[0] == xs[0].get(0)).unwrap();
        let cfg = ReductionConfig::new(0.05).unwrap();
        let r = kwise_to_unary_reduce(&q, &exact_oracle(&c, &d), &d, &cfg).unwrap();
        let ReductionOutcome::WeakHypothesis { hypothesis, advantage, source } = r.outcome else {
            panic!("expected a weak hypothesis");
        };
        assert_eq!(advantage, 0.5);
        assert_eq!(weak_advantage(&hypothesis, &c, &d), 0.5);
        // ℓ = 0 is tried first: h(x) = [x₁ = 0], so the complement is returned.
        assert_eq!(
            source,
            HypothesisSource::Candidate { tuple: 0, slot: 1, labels: 0, complemented: true }
        );
        assert_eq!(r.queries_used, 1 + 2 + 1);
    }

    #[test]
    fn equal_labels_is_case_two() {
        let d = FiniteDistribution::uniform(4).unwrap();
        let c = Concept::parity(bv("0110"));
        let q = KWiseQuery::new(2, 0.1, |_, ls| ls[0] == ls[1]).unwrap();
        let cfg = ReductionConfig::new(0.05).unwrap();
        let r = kwise_to_unary_reduce(&q, &exact_oracle(&c, &d), &d, &cfg).unwrap();
        let ReductionOutcome::Estimate { value, .. } = r.outcome else {
            panic!("expected an estimate");
        };
        assert_eq!(value, 0.5);
        assert!(!case_one_exists(&q, &c, &d, 0.05).unwrap());
    }

    #[test]
    fn unbalanced_target_short_circuits() {
        let d = FiniteDistribution::uniform(3).unwrap();
        let c = Concept::conjunction(bv("110"));
        let q = KWiseQuery::new(1, 0.1, |_, ls| ls[0]).unwrap();
        let r = kwise_to_unary_reduce(&q, &exact_oracle(&c, &d), &d, &ReductionConfig::new(0.1).unwrap()).unwrap();
        let ReductionOutcome::WeakHypothesis { hypothesis, advantage, source } = r.outcome else {
            panic!("expected a weak hypothesis");
        };
        assert_eq!(source, HypothesisSource::Balance { predict: false });
        assert_eq!(advantage, 0.25);
        assert_eq!(weak_advantage(&hypothesis, &c, &d), 0.25);
        assert_eq!(r.queries_used, 1);
    }

    #[test]
    fn budget_is_deterministic() {
        let d = FiniteDistribution::uniform(3).unwrap();
        let c = Concept::parity(bv("111"));
        let q = KWiseQuery::new(1, 0.1, |_, _| true).unwrap();
        let cfg = ReductionConfig::new(0.05).unwrap().with_tuples(10);
        let o = exact_oracle(&c, &d);
        let full = kwise_to_unary_reduce(&q, &o, &d, &cfg).unwrap();
        assert_eq!(full.queries_used, 1 + 10 * 4);
        assert!(kwise_to_unary_reduce(&q, &o, &d, &cfg.with_max_queries(41)).is_ok());
        assert_eq!(
            kwise_to_unary_reduce(&q, &o, &d, &cfg.with_max_queries(40)).unwrap_err(),
            Error::QueryBudgetExceeded(40)
        );
    }

    #[test]
    fn exec_modes_agree() {
        let d = FiniteDistribution::uniform(3).unwrap();
        let c = Concept::parity(bv("010"));
        // Fires only on tuples whose first entry has x₁ = 1.
        let q = KWiseQuery::new(2, 0.1, |xs, ls| xs[0].get(0) && ls[1] == xs[1].get(1)).unwrap();
        let base = ReductionConfig::new(0.05).unwrap().with_seed(11);
        let runs: Vec<_> = [Exec::Sequential, Exec::Parallel]
            .into_iter()
            .map(|e| kwise_to_unary_reduce(&q, &exact_oracle(&c, &d), &d, &base.with_exec(e)).unwrap())
            .collect();
        let (ReductionOutcome::WeakHypothesis { source: a, .. }, ReductionOutcome::WeakHypothesis { source: b, .. }) =
            (&runs[0].outcome, &runs[1].outcome)
        else {
            panic!("expected weak hypotheses");
        };
        assert_eq!(a, b);
        assert_eq!(runs[0].queries_used, runs[1].queries_used);
    }

    #[test]
    fn sampled_estimate_is_close() {
        let d = FiniteDistribution::uniform(3).unwrap();
        let c = Concept::parity(bv("101"));
        let q = KWiseQuery::new(2, 0.1, |xs, _| xs[0].get(0) && xs[1].get(1)).unwrap();
        let cfg = ReductionConfig::new(0.05)
            .unwrap()
            .with_tuples(5)
            .with_estimate(EstimateMode::Sampled { m: 40_000 });
        let ReductionOutcome::Estimate { value, .. } =
            kwise_to_unary_reduce(&q, &exact_oracle(&c, &d), &d, &cfg).unwrap().outcome
        else {
            panic!("expected an estimate");
        };
        let sigma = (0.25f64 * 0.75 / 40_000.0).sqrt();
        assert!((value - 0.25).abs() <= 3.0 * sigma);
    }

    fn table_query(k: usize, n: usize, table: u64) -> KWiseQuery {
        KWiseQuery::new(k, 0.1, move |xs, ls| {
            let mut key = 0u64;
            for (x, &l) in xs.iter().zip(ls) {
                key = (key << (n + 1)) | (x.to_u64().unwrap() << 1) | u64::from(l);
            }
            table >> (key % 64) & 1 == 1
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]
        #[test]
        fn reduction_soundness(k in 1usize..=2, table in any::<u64>(), ctable in 0u64..16, eps in 0.02f64..0.2, seed in any::<u64>()) {
            let n = 2;
            let d = FiniteDistribution::uniform(n).unwrap();
            let c = Concept::from_fn("c", move |x| ctable >> x.to_u64().unwrap() & 1 == 1);
            let q = table_query(k, n, table);
            let cfg = ReductionConfig::new(eps).unwrap().with_seed(seed);
            let r = kwise_to_unary_reduce(&q, &exact_oracle(&c, &d), &d, &cfg).unwrap();
            match r.outcome {
                ReductionOutcome::WeakHypothesis { hypothesis, advantage, .. } => {
                    let true_adv = weak_advantage(&hypothesis, &c, &d);
                    prop_assert!((advantage - true_adv).abs() < 1e-12);
                    prop_assert!(true_adv >= eps - 1e-12, "advantage {} below eps {}", true_adv, eps);
                }
                ReductionOutcome::Estimate { value, error_bound } => {
                    if !case_one_exists(&q, &c, &d, eps).unwrap() {
                        let truth = kwise_answer(&q, &c, &d, OracleMode::Exact).unwrap();
                        prop_assert!((value - truth).abs() <= 2.0 * error_bound + 1e-12,
                            "|{} - {}| > 2·{}", value, truth, error_bound);
                    }
                }
            }
        }
    }
}
