//! Learning a parity from k-wise "basis" queries.
//!
//! If `k` random examples form a basis of `{0,1}^k`, Gaussian elimination on
//! their labels returns the target exactly. So `Pr[x⃗ is a basis ∧ solution
//! has bit i]` is either `Pr[basis]` or 0, and one query per bit reads `c`.

use crate::bitlinalg::{BitMatrix, BitVec, SolveOutcome};
use crate::error::{Error, Result};
use crate::instance::ParityTarget;

use super::oracle::{KWiseOracle, KWiseQuery};

/// Largest `k` the learner accepts.
pub const BASIS_MAX_K: usize = 16;

/// The unique solution of the labeled system, when `xs` is a basis.
pub fn basis_solution(xs: &[BitVec], labels: &[bool]) -> Option<BitVec> {
    let k = xs.first()?.len();
    let m = BitMatrix::from_labeled(k, xs.to_vec(), labels.to_vec()).ok()?;
    match m.gaussian_solve().ok()? {
        SolveOutcome::Solved(c) => Some(c),
        _ => None,
    }
}

/// `Pr[k uniform vectors form a basis of {0,1}^k] = Π_{j<k} (1 − 2^{j−k})`.
pub fn basis_probability(k: usize) -> f64 {
    (0..k).map(|j| 1.0 - 0.5f64.powi((k - j) as i32)).product()
}

pub fn basis_query(k: usize, tau: f64) -> Result<KWiseQuery> {
    KWiseQuery::new(k, tau, |xs, ls| basis_solution(xs, ls).is_some())
}

/// The query "`x⃗` is a basis and the solved target has coordinate `i`" (0-based).
pub fn basis_bit_query(k: usize, i: usize, tau: f64) -> Result<KWiseQuery> {
    Ok(KWiseQuery::new(k, tau, move |xs, ls| basis_solution(xs, ls).is_some_and(|c| c.get(i)))?
        .with_tag(i as u64 + 1))
}

/// Asks `Pr[basis]` once, then one bit query per coordinate; bit `i` is 1 when
/// its answer is nearer `Pr[basis]` than 0.
pub fn basis_query_learner<O: KWiseOracle>(k: usize, oracle: &O, tau: f64) -> Result<ParityTarget> {
    if k == 0 {
        return Err(Error::ZeroCount("k"));
    }
    if k > BASIS_MAX_K {
        return Err(Error::TooManyBits { k, cap: BASIS_MAX_K });
    }
    let p_basis = oracle.answer_kwise(&basis_query(k, tau)?)?;
    let mut c = BitVec::zeros(k);
    for i in 0..k {
        let p = oracle.answer_kwise(&basis_bit_query(k, i, tau)?)?;
        c.set(i, (p - p_basis).abs() < p.abs());
    }
    Ok(ParityTarget::new(c))
}
