//! Exhaustive maximum-likelihood search over all `2^k` parity candidates.
//!
//! Samples are stored column-wise as bitsets over the sample index, so the
//! prediction vector of a candidate `h` is the XOR of the columns in `h`. The
//! candidate space is cut into lanes by fixing the top bits; inside a lane the
//! low bits are enumerated in Gray-code order and each step XORs one column into
//! the running prediction vector.

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::instance::{LabeledExample, ParityTarget};
use crate::par::Exec;

pub const MLE_MAX_K: usize = 24;

const LANE_BITS: usize = 6;

pub fn mle_bruteforce(samples: &[LabeledExample], k: usize) -> Result<ParityTarget> {
    mle_bruteforce_with(Exec::default(), samples, k)
}

/// Argmin of empirical error; ties go to the numerically smallest candidate
/// (coordinate 1 least significant).
pub fn mle_bruteforce_with(exec: Exec, samples: &[LabeledExample], k: usize) -> Result<ParityTarget> {
    if k > MLE_MAX_K {
        return Err(Error::TooManyBits { k, cap: MLE_MAX_K });
    }
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(bad) = samples.iter().find(|e| e.x.len() != k) {
        return Err(Error::LengthMismatch {
            left: bad.x.len(),
            right: k,
        });
    }
    let m = samples.len();
    let words = m.div_ceil(64);
    let mut columns = vec![vec![0u64; words]; k];
    let mut labels = vec![0u64; words];
    for (i, e) in samples.iter().enumerate() {
        let (w, bit) = (i / 64, 1u64 << (i % 64));
        for (j, col) in columns.iter_mut().enumerate() {
            if e.x.get(j) {
                col[w] |= bit;
            }
        }
        if e.label {
            labels[w] |= bit;
        }
    }

    let lane_bits = LANE_BITS.min(k);
    let low_bits = k - lane_bits;
    let best = exec
        .map(0..1usize << lane_bits, |lane| {
            let prefix = (lane as u64) << low_bits;
            let mut pred = labels.clone();
            for (j, col) in columns.iter().enumerate().skip(low_bits) {
                if prefix >> j & 1 == 1 {
                    xor_into(&mut pred, col);
                }
            }
            let mut best = (popcount(&pred), prefix);
            let mut gray = 0u64;
            for step in 1..1u64 << low_bits {
                let j = step.trailing_zeros() as usize;
                gray ^= 1 << j;
                xor_into(&mut pred, &columns[j]);
                let cand = (popcount(&pred), prefix | gray);
                if cand < best {
                    best = cand;
                }
            }
            best
        })
        .into_iter()
        .min()
        .expect("at least one lane");
    Ok(ParityTarget::new(BitVec::from_u64(k, best.1)))
}

#[inline]
fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[inline]
fn popcount(v: &[u64]) -> u32 {
    v.iter().map(|w| w.count_ones()).sum()
}
