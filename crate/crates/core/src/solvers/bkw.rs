//! The block-merge solver.
//!
//! One vote for coordinate 1 of the target: draw `a·2^b` fresh examples, merge
//! `a - 1` times and look for the unit vector `(1,0,…,0)` in the resulting
//! `(a-1)`-sample. Its folded label is a sum of `2^(a-1)` noisy labels and so is
//! correct with probability `1/2 + 1/2 (1-2η)^(2^(a-1))`. Other coordinates are
//! read the same way after cyclically shifting every example.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::Rng;

use super::merge::{merge_step, ISample};
use crate::bitlinalg::{BitVec, BlockLayout};
use crate::error::{Error, Result};
use crate::instance::{ExampleOracle, LabeledExample, NoiseRate, ParityTarget};
use crate::par::Exec;
use crate::seed;

/// Pipeline passes attempted per vote before giving up.
pub const MAX_PASSES_PER_VOTE: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repetitions {
    Auto,
    Explicit(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterProfile {
    /// `a = max(1, round(lg k / 2))`.
    Balanced,
    /// `a = ceil(lg lg n / 2)` for targets on the first `k` of `n` input bits.
    LogLog { n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub layout: BlockLayout,
    /// Noise rate assumed when resolving [`Repetitions::Auto`].
    pub eta: NoiseRate,
    pub delta: f64,
    pub repetitions: Repetitions,
    pub max_examples: Option<u64>,
    pub track_provenance: bool,
    /// Master seed for representative selection.
    pub seed: u64,
    pub exec: Exec,
}

impl SolverConfig {
    pub fn new(layout: BlockLayout, eta: NoiseRate, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1)")));
        }
        Ok(Self {
            layout,
            eta,
            delta,
            repetitions: Repetitions::Auto,
            max_examples: None,
            track_provenance: false,
            seed: 0,
            exec: Exec::default(),
        })
    }

    pub fn with_repetitions(mut self, r: Repetitions) -> Self {
        self.repetitions = r;
        self
    }

    pub fn with_max_examples(mut self, n: Option<u64>) -> Self {
        self.max_examples = n;
        self
    }

    pub fn with_provenance(mut self, on: bool) -> Self {
        self.track_provenance = on;
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

    /// Votes per bit for a `k`-bit target.
    pub fn resolved_repetitions(&self, k: usize) -> Result<u32> {
        match self.repetitions {
            Repetitions::Explicit(0) => Err(Error::ZeroCount("repetitions")),
            Repetitions::Explicit(r) => Ok(r),
            Repetitions::Auto => Ok(auto_repetitions(k, self.eta, self.delta, self.layout.a)),
        }
    }
}

/// `ceil(2 ln(2k/δ) / (1-2η)^(2^a))`: a Hoeffding bound on a majority of votes
/// with bias `(1-2η)^(2^(a-1)) / 2`, making each bit wrong with probability at most `δ/k`.
pub fn auto_repetitions(k: usize, eta: NoiseRate, delta: f64, a: usize) -> u32 {
    let margin = (1.0 - 2.0 * eta.get()).powf(2f64.powi(a as i32));
    let r = (2.0 * (2.0 * k as f64 / delta).ln() / margin).ceil();
    r.clamp(1.0, u32::MAX as f64) as u32
}

pub fn choose_parameters(
    k: usize,
    eta: NoiseRate,
    delta: f64,
    profile: ParameterProfile,
) -> Result<SolverConfig> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k}; need k >= 2")));
    }
    let a = match profile {
        ParameterProfile::Balanced => ((0.5 * (k as f64).log2()).round() as usize).max(1),
        ParameterProfile::LogLog { n } => {
            if n < 4 {
                return Err(Error::InvalidParameter(format!("n = {n}; need n >= 4")));
            }
            ((0.5 * (n as f64).log2().log2()).ceil() as usize).max(1)
        }
    };
    let a = a.min(k);
    let b = k.div_ceil(a);
    SolverConfig::new(BlockLayout::new(a, b)?, eta, delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Recovered,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstBitOutcome {
    /// Majority of the completed votes (0 on a tie).
    pub bit: bool,
    pub ones: u32,
    pub zeros: u32,
    pub examples_used: u64,
    pub passes: u32,
    /// Draw-index range consumed by each completed vote.
    pub vote_draws: Vec<Range<u64>>,
    pub status: Status,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub c_hat: ParityTarget,
    pub examples_used: u64,
    pub wall_time: Duration,
    /// `(ones, zeros)` per coordinate.
    pub per_bit_votes: Vec<(u32, u32)>,
    pub repetitions: u32,
    pub status: Status,
}

struct Budget {
    limit: Option<u64>,
    reserved: AtomicU64,
}

impl Budget {
    fn new(limit: Option<u64>) -> Self {
        Self {
            limit,
            reserved: AtomicU64::new(0),
        }
    }

    /// Whether `n` more examples fit. The outcome over a whole run only depends
    /// on total demand, not on the interleaving of lanes.
    fn reserve(&self, n: u64) -> bool {
        let before = self.reserved.fetch_add(n, Ordering::Relaxed);
        self.limit.is_none_or(|l| before.saturating_add(n) <= l)
    }
}

/// Pads examples to the layout length and cyclically shifts them.
struct Aligned<'a, O> {
    inner: &'a mut O,
    len: usize,
    shift: usize,
}

impl<O: ExampleOracle> Aligned<'_, O> {
    fn draw(&mut self) -> Result<LabeledExample> {
        let mut e = self.inner.draw()?;
        if e.x.len() != self.len {
            e.x = e.x.resized(self.len);
        }
        if self.shift != 0 {
            e.x = e.x.rotated(self.shift);
        }
        Ok(e)
    }
}

enum PassResult {
    Vote(bool),
    Missing,
}

fn pipeline_pass<O: ExampleOracle, R: Rng>(
    source: &mut Aligned<'_, O>,
    config: &SolverConfig,
    rng: &mut R,
) -> Result<PassResult> {
    let layout = config.layout;
    let n = layout.a << layout.b;
    let draws = (0..n).map(|_| source.draw()).collect::<Result<Vec<_>>>()?;
    let originals: Option<HashMap<u64, (BitVec, bool)>> = config
        .track_provenance
        .then(|| draws.iter().map(|e| (e.index, (e.x.clone(), e.label))).collect());
    let mut sample = ISample::from_examples(layout, draws, config.track_provenance)?;
    for _ in 1..layout.a {
        sample = merge_step(sample, rng)?;
        if let Some(originals) = &originals {
            if let Err(msg) = sample.verify(originals) {
                panic!("merge invariant violated: {msg}");
            }
        }
    }
    let unit = BitVec::unit(layout.total_bits(), 0);
    Ok(match sample.find(&unit) {
        Some(e) => PassResult::Vote(e.label),
        None => PassResult::Missing,
    })
}

fn first_bit_lane<O: ExampleOracle>(
    oracle: &mut O,
    config: &SolverConfig,
    shift: usize,
    lane_seed: u64,
    budget: &Budget,
    repetitions: u32,
) -> Result<FirstBitOutcome> {
    let layout = config.layout;
    let pass_size = (layout.a as u64) << layout.b;
    let mut rng = seed::rng(lane_seed);
    let mut source = Aligned {
        inner: oracle,
        len: layout.total_bits(),
        shift,
    };
    let mut out = FirstBitOutcome {
        bit: false,
        ones: 0,
        zeros: 0,
        examples_used: 0,
        passes: 0,
        vote_draws: Vec::with_capacity(repetitions as usize),
        status: Status::Recovered,
    };
    'votes: for _ in 0..repetitions {
        let first = source.inner.draw_count();
        for _ in 0..MAX_PASSES_PER_VOTE {
            if !budget.reserve(pass_size) {
                out.status = Status::BudgetExceeded;
                break 'votes;
            }
            let pass = match pipeline_pass(&mut source, config, &mut rng) {
                Ok(p) => p,
                Err(Error::StreamExhausted(_)) => {
                    out.status = Status::BudgetExceeded;
                    out.examples_used += source.inner.draw_count() - first;
                    break 'votes;
                }
                Err(e) => return Err(e),
            };
            out.passes += 1;
            out.examples_used += pass_size;
            if let PassResult::Vote(v) = pass {
                if v {
                    out.ones += 1;
                } else {
                    out.zeros += 1;
                }
                out.vote_draws.push(first..source.inner.draw_count());
                continue 'votes;
            }
        }
        out.status = Status::BudgetExceeded;
        break;
    }
    out.bit = out.ones > out.zeros;
    Ok(out)
}

fn check_layout(k: usize, layout: BlockLayout) -> Result<()> {
    if layout.total_bits() < k {
        return Err(Error::InvalidLayout(format!(
            "{}x{} blocks cannot hold {k} bits",
            layout.a, layout.b
        )));
    }
    if layout.b > 40 {
        return Err(Error::InvalidLayout(format!("block width {} is too large to sample", layout.b)));
    }
    Ok(())
}

/// Majority vote for coordinate 1 of the target.
pub fn recover_first_bit<O: ExampleOracle>(oracle: &mut O, config: &SolverConfig) -> Result<FirstBitOutcome> {
    let k = oracle.k();
    check_layout(k, config.layout)?;
    let reps = config.resolved_repetitions(k)?;
    let budget = Budget::new(config.max_examples);
    first_bit_lane(oracle, config, 0, seed::lane(config.seed, 0), &budget, reps)
}

/// Recovers every coordinate by running the first-bit procedure on shifted examples.
///
/// Splittable oracles give each coordinate its own lane, which may run
/// concurrently; otherwise coordinates are read one after another from the
/// single stream. Coordinates of the zero padding (when `a·b > k`) are never
/// queried.
pub fn recover_target<O>(oracle: &mut O, config: &SolverConfig) -> Result<SolverResult>
where
    O: ExampleOracle + Send + Sync,
{
    let started = Instant::now();
    let k = oracle.k();
    check_layout(k, config.layout)?;
    let reps = config.resolved_repetitions(k)?;
    let budget = Budget::new(config.max_examples);

    let outcomes: Vec<FirstBitOutcome> = if oracle.split(0).is_some() {
        let shared: &O = oracle;
        config
            .exec
            .map(0..k, |r| {
                let mut lane = shared.split(r as u64).expect("splittable oracle");
                first_bit_lane(&mut lane, config, r, seed::lane(config.seed, r as u64), &budget, reps)
            })
            .into_iter()
            .collect::<Result<_>>()?
    } else {
        let mut v = Vec::with_capacity(k);
        for r in 0..k {
            v.push(first_bit_lane(oracle, config, r, seed::lane(config.seed, r as u64), &budget, reps)?);
        }
        v
    };

    let mut c_hat = BitVec::zeros(k);
    let mut status = Status::Recovered;
    let mut examples_used = 0;
    let mut per_bit_votes = Vec::with_capacity(k);
    for (r, o) in outcomes.iter().enumerate() {
        c_hat.set(r, o.bit);
        examples_used += o.examples_used;
        per_bit_votes.push((o.ones, o.zeros));
        if o.status == Status::BudgetExceeded {
            status = Status::BudgetExceeded;
        }
    }
    Ok(SolverResult {
        c_hat: ParityTarget::new(c_hat),
        examples_used,
        wall_time: started.elapsed(),
        per_bit_votes,
        repetitions: reps,
        status,
    })
}

/// One vote: returns the folded label of a single pipeline pass that produced
/// the unit vector, or `None` if `max_passes` passes all missed it.
pub fn single_vote<O: ExampleOracle, R: Rng>(
    oracle: &mut O,
    config: &SolverConfig,
    rng: &mut R,
    max_passes: u32,
) -> Result<Option<bool>> {
    check_layout(oracle.k(), config.layout)?;
    let mut source = Aligned {
        len: config.layout.total_bits(),
        inner: oracle,
        shift: 0,
    };
    for _ in 0..max_passes {
        if let PassResult::Vote(v) = pipeline_pass(&mut source, config, rng)? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ExampleSource, ReplaySource, TargetSpec};

    fn eta(x: f64) -> NoiseRate {
        NoiseRate::new(x).unwrap()
    }

    #[test]
    fn parameter_examples() {
        let c = choose_parameters(64, eta(0.1), 0.1, ParameterProfile::Balanced).unwrap();
        assert_eq!((c.layout.a, c.layout.b), (3, 22));
        let c = choose_parameters(2, eta(0.1), 0.1, ParameterProfile::Balanced).unwrap();
        assert_eq!((c.layout.a, c.layout.b), (1, 2));
        let c = choose_parameters(16, eta(0.125), 0.1, ParameterProfile::Balanced).unwrap();
        assert_eq!((c.layout.a, c.layout.b), (2, 8));
        // 2 ln(320) / 0.75^4 = 36.46...
        assert_eq!(c.resolved_repetitions(16).unwrap(), 37);
        let c = choose_parameters(24, eta(0.125), 0.1, ParameterProfile::Balanced).unwrap();
        assert_eq!((c.layout.a, c.layout.b), (2, 12));
        // lg lg 2^16 = 4 -> a = 2
        let c = choose_parameters(40, eta(0.1), 0.1, ParameterProfile::LogLog { n: 1 << 16 }).unwrap();
        assert_eq!((c.layout.a, c.layout.b), (2, 20));
        assert!(choose_parameters(1, eta(0.1), 0.1, ParameterProfile::Balanced).is_err());
    }

    #[test]
    fn auto_repetitions_formula() {
        // 2 ln(480) / 0.75^8 = 123.3...
        assert_eq!(auto_repetitions(24, eta(0.125), 0.1, 3), 124);
        // 2 ln(320) with no noise
        assert_eq!(auto_repetitions(16, eta(0.0), 0.1, 2), 12);
        let cfg = SolverConfig::new(BlockLayout::new(2, 2).unwrap(), eta(0.1), 0.1).unwrap();
        assert!(cfg.with_repetitions(Repetitions::Explicit(0)).resolved_repetitions(4).is_err());
        assert!(SolverConfig::new(BlockLayout::new(2, 2).unwrap(), eta(0.1), 1.0).is_err());
    }

    #[test]
    fn noiseless_votes_are_exact() {
        for s in 0..5 {
            let mut src = ExampleSource::uniform(8, 0.0, s, TargetSpec::Random).unwrap();
            let c1 = src.planted().bits().get(0);
            let cfg = SolverConfig::new(BlockLayout::new(2, 4).unwrap(), eta(0.0), 0.1)
                .unwrap()
                .with_repetitions(Repetitions::Explicit(9))
                .with_provenance(true);
            let out = recover_first_bit(&mut src, &cfg).unwrap();
            assert_eq!(out.bit, c1);
            assert_eq!(out.status, Status::Recovered);
            assert_eq!(if c1 { out.ones } else { out.zeros }, 9);
        }
    }

    #[test]
    fn votes_use_fresh_examples() {
        let mut src = ExampleSource::uniform(12, 0.1, 3, TargetSpec::Random).unwrap();
        let cfg = SolverConfig::new(BlockLayout::new(3, 4).unwrap(), eta(0.1), 0.1)
            .unwrap()
            .with_repetitions(Repetitions::Explicit(20));
        let out = recover_first_bit(&mut src, &cfg).unwrap();
        assert_eq!(out.vote_draws.len(), 20);
        for w in out.vote_draws.windows(2) {
            assert!(w[0].end <= w[1].start);
        }
        assert_eq!(out.examples_used, src.draw_count());
        assert_eq!(out.examples_used, u64::from(out.passes) * 3 * 16);
    }

    #[test]
    fn degenerate_single_block_layout() {
        let mut src = ExampleSource::uniform(2, 0.0, 1, TargetSpec::Random).unwrap();
        let cfg = choose_parameters(2, eta(0.0), 0.1, ParameterProfile::Balanced).unwrap();
        let res = recover_target(&mut src, &cfg).unwrap();
        assert_eq!(res.c_hat, *src.planted());
    }

    #[test]
    fn noiseless_recovery_with_padding() {
        for (k, a, b) in [(10, 3, 4), (16, 2, 8), (7, 2, 4)] {
            let mut src = ExampleSource::uniform(k, 0.0, k as u64, TargetSpec::Random).unwrap();
            let cfg = SolverConfig::new(BlockLayout::new(a, b).unwrap(), eta(0.0), 0.1)
                .unwrap()
                .with_repetitions(Repetitions::Explicit(3));
            let res = recover_target(&mut src, &cfg).unwrap();
            assert_eq!(res.c_hat, *src.planted(), "k={k}");
            assert_eq!(res.per_bit_votes.len(), k);
            assert!(res.per_bit_votes.iter().all(|&(o, z)| o + z == 3));
        }
    }

    #[test]
    fn exec_modes_agree() {
        let src = ExampleSource::uniform(12, 0.1, 5, TargetSpec::Random).unwrap();
        let cfg = SolverConfig::new(BlockLayout::new(2, 6).unwrap(), eta(0.1), 0.1)
            .unwrap()
            .with_seed(77);
        let a = recover_target(&mut src.clone(), &cfg.with_exec(Exec::Sequential)).unwrap();
        let b = recover_target(&mut src.clone(), &cfg.with_exec(Exec::Parallel)).unwrap();
        assert_eq!(a.c_hat, b.c_hat);
        assert_eq!(a.per_bit_votes, b.per_bit_votes);
        assert_eq!(a.examples_used, b.examples_used);
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let mut src = ExampleSource::uniform(8, 0.1, 5, TargetSpec::Random).unwrap();
        let cfg = SolverConfig::new(BlockLayout::new(2, 4).unwrap(), eta(0.1), 0.1)
            .unwrap()
            .with_max_examples(Some(500));
        let res = recover_target(&mut src, &cfg).unwrap();
        assert_eq!(res.status, Status::BudgetExceeded);

        let mut src = ExampleSource::uniform(8, 0.1, 5, TargetSpec::Random).unwrap();
        let cfg = cfg.with_max_examples(Some(100));
        assert_eq!(recover_first_bit(&mut src, &cfg).unwrap().status, Status::BudgetExceeded);
    }

    #[test]
    fn replay_runs_sequentially_until_exhausted() {
        let mut src = ExampleSource::uniform(8, 0.0, 2, TargetSpec::Random).unwrap();
        let examples = src.draw_many(3000).unwrap();
        let mut replay = ReplaySource::new(8, examples, Some(src.planted().clone())).unwrap();
        let cfg = SolverConfig::new(BlockLayout::new(2, 4).unwrap(), eta(0.0), 0.1)
            .unwrap()
            .with_repetitions(Repetitions::Explicit(1));
        let res = recover_target(&mut replay, &cfg).unwrap();
        assert_eq!(res.status, Status::Recovered);
        assert_eq!(res.c_hat, *src.planted());

        let mut short = ReplaySource::new(8, replay.examples()[..100].to_vec(), None).unwrap();
        let res = recover_target(&mut short, &cfg).unwrap();
        assert_eq!(res.status, Status::BudgetExceeded);
    }

    #[test]
    fn layout_too_small_is_rejected() {
        let mut src = ExampleSource::uniform(10, 0.0, 1, TargetSpec::Random).unwrap();
        let cfg = SolverConfig::new(BlockLayout::new(2, 4).unwrap(), eta(0.0), 0.1).unwrap();
        assert!(matches!(recover_target(&mut src, &cfg), Err(Error::InvalidLayout(_))));
    }
}
