//! Gaussian-elimination baselines.

use crate::bitlinalg::{BitMatrix, BitVec, SolveOutcome, TrackedBasis};
use crate::error::{Error, Result};
use crate::instance::{ExampleOracle, LabeledExample};

/// Solves the labeled system formed by `samples` exactly. Any label noise in a
/// spanning sample shows up as `Inconsistent`.
pub fn gaussian_baseline(samples: &[LabeledExample], k: usize) -> Result<SolveOutcome> {
    let rows = samples.iter().map(|e| e.x.clone()).collect();
    let labels = samples.iter().map(|e| e.label).collect();
    BitMatrix::from_labeled(k, rows, labels)?.gaussian_solve()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussVote {
    pub bit: bool,
    /// Number of noisy labels folded into `bit`.
    pub depth: usize,
    pub examples_used: u64,
}

/// One vote for coordinate 1 by plain elimination: draws fresh examples until
/// they span GF(2)^k, writes `(1,0,…,0)` as a sum of drawn examples and XORs
/// their labels. Returns `None` if `max_draws` examples do not reach full rank.
pub fn gaussian_vote<O: ExampleOracle>(oracle: &mut O, max_draws: usize) -> Result<Option<GaussVote>> {
    let k = oracle.k();
    if k == 0 {
        return Err(Error::ZeroCount("k"));
    }
    let mut basis = TrackedBasis::new(k);
    let mut labels = Vec::with_capacity(k + 8);
    while basis.rank() < k {
        if labels.len() == max_draws {
            return Ok(None);
        }
        let e = oracle.draw()?;
        let tag = BitVec::unit(max_draws, labels.len());
        labels.push(e.label);
        basis.insert(e.x, tag);
    }
    let combo = basis
        .express(&BitVec::unit(k, 0), max_draws)
        .expect("full rank spans every vector");
    let bit = combo
        .iter()
        .zip(&labels)
        .fold(false, |acc, (used, &l)| acc ^ (used && l));
    Ok(Some(GaussVote {
        bit,
        depth: combo.count_ones(),
        examples_used: labels.len() as u64,
    }))
}
