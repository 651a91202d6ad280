//! SQ dimension of a concept class under a distribution.

use crate::error::{Error, Result};
use crate::par::Exec;

use super::concept::{Concept, FiniteDistribution};

/// Classes up to this size also get an exhaustive search for the true maximum.
pub const EXACT_DIMENSION_MAX_CLASS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SqDimReport {
    pub d: usize,
    /// Ids of the `d` witness concepts, in class order.
    pub witness: Vec<String>,
    /// Largest `|Pr[cᵢ = cⱼ] − Pr[cᵢ ≠ cⱼ]|` over distinct witness pairs (0 when `d < 2`).
    pub max_pairwise_correlation: f64,
    /// The true maximum, when the class was small enough to search exhaustively.
    pub exact_maximum: Option<usize>,
}

/// `Pr[f = g] − Pr[f ≠ g]` under `dist`.
pub fn correlation(f: &Concept, g: &Concept, dist: &FiniteDistribution) -> f64 {
    dist.support()
        .iter()
        .zip(dist.weights())
        .map(|(x, w)| if f.eval(x) == g.eval(x) { *w } else { -*w })
        .sum()
}

fn threshold(d: usize) -> f64 {
    1.0 / (d as f64).powi(3)
}

/// Absolute pairwise correlations, from truth tables over the support.
fn correlation_matrix(class: &[Concept], dist: &FiniteDistribution) -> Vec<Vec<f64>> {
    let tables: Vec<Vec<bool>> = class
        .iter()
        .map(|c| dist.support().iter().map(|x| c.eval(x)).collect())
        .collect();
    let weights = dist.weights();
    Exec::default().map(0..class.len(), |i| {
        (0..class.len())
            .map(|j| {
                let s: f64 = tables[i]
                    .iter()
                    .zip(&tables[j])
                    .zip(weights)
                    .map(|((a, b), w)| if a == b { *w } else { -*w })
                    .sum();
                s.abs()
            })
            .collect()
    })
}

fn max_pairwise(corr: &[Vec<f64>], members: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for (p, &i) in members.iter().enumerate() {
        for &j in &members[p + 1..] {
            worst = worst.max(corr[i][j]);
        }
    }
    worst
}

/// Largest `d` with a `d`-subset whose pairs all satisfy the bound for `d`.
fn exhaustive_maximum(corr: &[Vec<f64>]) -> usize {
    let m = corr.len();
    for d in (2..=m).rev() {
        let t = threshold(d);
        let found = (0u32..1 << m).filter(|s| s.count_ones() as usize == d).any(|s| {
            let members: Vec<usize> = (0..m).filter(|&i| s >> i & 1 == 1).collect();
            max_pairwise(corr, &members) <= t
        });
        if found {
            return d;
        }
    }
    m.min(1)
}

/// Greedy witness in class order: a concept joins when every pair of the
/// enlarged set still meets the bound for the enlarged size. The witness is
/// then re-verified pair by pair, so `d` is a certified lower bound.
pub fn sq_dimension(class: &[Concept], dist: &FiniteDistribution) -> Result<SqDimReport> {
    let corr = correlation_matrix(class, dist);
    let mut members: Vec<usize> = Vec::new();
    let mut worst = 0.0f64;
    for (i, row) in corr.iter().enumerate() {
        let with_i = members.iter().map(|&j| row[j]).fold(worst, f64::max);
        if with_i <= threshold(members.len() + 1) {
            members.push(i);
            worst = with_i;
        }
    }
    let d = members.len();
    let max_pairwise_correlation = max_pairwise(&corr, &members);
    if d >= 2 && max_pairwise_correlation > threshold(d) {
        return Err(Error::InvalidParameter(format!(
            "witness of size {d} failed verification: {max_pairwise_correlation}"
        )));
    }
    let exact_maximum = (class.len() <= EXACT_DIMENSION_MAX_CLASS).then(|| exhaustive_maximum(&corr));
    Ok(SqDimReport {
        d,
        witness: members.iter().map(|&i| class[i].id().to_string()).collect(),
        max_pairwise_correlation,
        exact_maximum,
    })
}

/// Recomputes every witness pair directly from the concepts.
pub fn verify_witness(report: &SqDimReport, class: &[Concept], dist: &FiniteDistribution) -> bool {
    let members: Option<Vec<&Concept>> = report
        .witness
        .iter()
        .map(|id| class.iter().find(|c| c.id() == id))
        .collect();
    let Some(members) = members else {
        return false;
    };
    if members.len() != report.d {
        return false;
    }
    let t = threshold(report.d);
    members.iter().enumerate().all(|(p, f)| {
        members[p + 1..]
            .iter()
            .all(|g| correlation(f, g, dist).abs() <= t)
    })
}
