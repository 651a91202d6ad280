//! i-samples and the block merge step.
//!
//! An i-sample is a set of vectors in `V_i`, the subspace whose last `i` blocks
//! are zero. Merging partitions the entries by block `a - i`, picks a random
//! representative per class, XORs it into every classmate and drops it. The
//! result lies in `V_{i+1}` and loses at most one entry per class.

use std::collections::HashMap;

use rand::Rng;

use crate::bitlinalg::{BitVec, BlockLayout};
use crate::error::{Error, Result};
use crate::instance::LabeledExample;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleEntry {
    pub vector: BitVec,
    /// XOR of the noisy labels of the examples summed into `vector`.
    pub label: bool,
    /// Sorted draw indices of the examples whose XOR is `vector`.
    pub provenance: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct ISample {
    level: usize,
    layout: BlockLayout,
    entries: Vec<SampleEntry>,
}

/// True when the last `level` blocks of `v` are zero.
pub fn in_subspace(v: &BitVec, layout: BlockLayout, level: usize) -> bool {
    v.len() == layout.total_bits()
        && level <= layout.a
        && (layout.a - level + 1..=layout.a).all(|j| v.block_is_zero(layout, j))
}

impl ISample {
    pub fn new(level: usize, layout: BlockLayout, entries: Vec<SampleEntry>) -> Result<Self> {
        if level >= layout.a {
            return Err(Error::InvalidParameter(format!(
                "level {level} for a layout of {} blocks",
                layout.a
            )));
        }
        for e in &entries {
            if !in_subspace(&e.vector, layout, level) {
                return Err(Error::InvalidParameter(format!(
                    "{} is not in V_{level}",
                    e.vector
                )));
            }
        }
        Ok(Self {
            level,
            layout,
            entries,
        })
    }

    /// A 0-sample from drawn examples.
    pub fn from_examples<I>(layout: BlockLayout, examples: I, track_provenance: bool) -> Result<Self>
    where
        I: IntoIterator<Item = LabeledExample>,
    {
        let entries = examples
            .into_iter()
            .map(|e| {
                if e.x.len() != layout.total_bits() {
                    return Err(Error::LengthMismatch {
                        left: e.x.len(),
                        right: layout.total_bits(),
                    });
                }
                Ok(SampleEntry {
                    vector: e.x,
                    label: e.label,
                    provenance: track_provenance.then(|| vec![e.index]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            level: 0,
            layout,
            entries,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn layout(&self) -> BlockLayout {
        self.layout
    }

    pub fn entries(&self) -> &[SampleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn find(&self, v: &BitVec) -> Option<&SampleEntry> {
        self.entries.iter().find(|e| e.vector == *v)
    }

    /// Checks membership in `V_level` and, where provenance is tracked, that the
    /// referenced originals XOR to the entry's vector and label and number at
    /// most `2^level`.
    pub fn verify(&self, originals: &HashMap<u64, (BitVec, bool)>) -> std::result::Result<(), String> {
        for (n, e) in self.entries.iter().enumerate() {
            if !in_subspace(&e.vector, self.layout, self.level) {
                return Err(format!("entry {n}: {} not in V_{}", e.vector, self.level));
            }
            let Some(prov) = &e.provenance else { continue };
            if prov.len() > 1 << self.level {
                return Err(format!("entry {n}: {} originals exceed 2^{}", prov.len(), self.level));
            }
            let mut v = BitVec::zeros(self.layout.total_bits());
            let mut label = false;
            for idx in prov {
                let (x, l) = originals
                    .get(idx)
                    .ok_or_else(|| format!("entry {n}: unknown original {idx}"))?;
                v.xor_assign_unchecked(x);
                label ^= l;
            }
            if v != e.vector || label != e.label {
                return Err(format!("entry {n}: provenance does not reproduce the entry"));
            }
        }
        Ok(())
    }
}

/// Symmetric difference of two sorted index lists.
pub(crate) fn xor_sets(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Merge with a uniformly random representative per class.
pub fn merge_step<R: Rng + ?Sized>(sample: ISample, rng: &mut R) -> Result<ISample> {
    merge_step_with(sample, |n| rng.gen_range(0..n))
}

/// Merge where `choose(class_len)` picks the representative's position within
/// each class. Classes are visited in increasing block value and keep input order.
pub fn merge_step_with<F>(sample: ISample, mut choose: F) -> Result<ISample>
where
    F: FnMut(usize) -> usize,
{
    let ISample {
        level,
        layout,
        entries,
    } = sample;
    if level + 2 > layout.a {
        return Err(Error::InvalidParameter(format!(
            "cannot merge a {level}-sample with {} blocks",
            layout.a
        )));
    }
    if layout.b > 64 {
        return Err(Error::InvalidLayout(format!("block width {} exceeds 64", layout.b)));
    }
    let block = layout.a - level;
    let keys: Vec<u64> = entries.iter().map(|e| e.vector.block_value(layout, block)).collect();
    let order = group_by_key(&keys, layout.b);

    let mut slots: Vec<Option<SampleEntry>> = entries.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(slots.len());
    let mut start = 0;
    while start < order.len() {
        let key = keys[order[start]];
        let end = start + order[start..].iter().take_while(|&&i| keys[i] == key).count();
        let class = &order[start..end];
        if class.len() > 1 {
            let pick = choose(class.len());
            assert!(pick < class.len(), "representative {pick} out of range");
            let rep = slots[class[pick]].take().expect("unused slot");
            for (p, &i) in class.iter().enumerate() {
                if p == pick {
                    continue;
                }
                let mut e = slots[i].take().expect("unused slot");
                e.vector.xor_assign_unchecked(&rep.vector);
                e.label ^= rep.label;
                if let (Some(a), Some(b)) = (&e.provenance, &rep.provenance) {
                    e.provenance = Some(xor_sets(a, b));
                }
                out.push(e);
            }
        }
        start = end;
    }
    Ok(ISample {
        level: level + 1,
        layout,
        entries: out,
    })
}

/// Entry positions ordered by key, stable within equal keys.
fn group_by_key(keys: &[u64], width: usize) -> Vec<usize> {
    let buckets = 1usize.checked_shl(width as u32).unwrap_or(usize::MAX);
    if buckets <= 2 * keys.len() + 256 {
        let mut starts = vec![0usize; buckets + 1];
        for &k in keys {
            starts[k as usize + 1] += 1;
        }
        for i in 1..starts.len() {
            starts[i] += starts[i - 1];
        }
        let mut order = vec![0usize; keys.len()];
        for (i, &k) in keys.iter().enumerate() {
            order[starts[k as usize]] = i;
            starts[k as usize] += 1;
        }
        order
    } else {
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by_key(|&i| keys[i]);
        order
    }
}
