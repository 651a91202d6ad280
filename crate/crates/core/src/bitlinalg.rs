//! Packed GF(2) vectors and matrices.
//!
//! Coordinate 1 of a vector is bit 0 of the first storage word. Bits at or
//! beyond `len` are always zero.

use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: SmallVec::from_elem(0, words_for(len)),
        }
    }

    /// Unit vector with a one at 0-based position `i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Low `len` bits of `value`; bit 0 becomes coordinate 1.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.clear_tail();
        }
        v
    }

    /// Builds a vector from raw words, masking anything past `len`.
    pub fn from_words(len: usize, words: &[u64]) -> Self {
        let mut v = Self::zeros(len);
        for (dst, src) in v.words.iter_mut().zip(words) {
            *dst = *src;
        }
        v.clear_tail();
        v
    }

    /// Little-endian bytes: byte 0 holds coordinates 1..=8 with coordinate 1 as its LSB.
    pub fn from_le_bytes(len: usize, bytes: &[u8]) -> Result<Self> {
        let expected = len.div_ceil(8);
        if bytes.len() != expected {
            return Err(Error::LengthMismatch {
                left: bytes.len(),
                right: expected,
            });
        }
        let mut v = Self::zeros(len);
        for (i, &byte) in bytes.iter().enumerate() {
            v.words[i / 8] |= u64::from(byte) << (8 * (i % 8));
        }
        let before = v.words.clone();
        v.clear_tail();
        if v.words != before {
            return Err(Error::InvalidParameter(format!(
                "bits set beyond length {len}"
            )));
        }
        Ok(v)
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        (0..self.len.div_ceil(8))
            .map(|i| (self.words[i / 8] >> (8 * (i % 8))) as u8)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// 0-based index of the lowest set coordinate.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    /// The vector as an integer (coordinate 1 least significant), when it fits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.words.iter().skip(1).any(|&w| w != 0) {
            return None;
        }
        Some(self.words.first().copied().unwrap_or(0))
    }

    /// Orders vectors as integers with coordinate 1 least significant.
    pub fn numeric_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let n = self.words.len().max(other.words.len());
        for i in (0..n).rev() {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.dot_unchecked(other))
    }

    #[inline]
    pub(crate) fn dot_unchecked(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &Self) -> Result<()> {
        self.check_len(other)?;
        self.xor_assign_unchecked(other);
        Ok(())
    }

    #[inline]
    pub(crate) fn xor_assign_unchecked(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// The `b` bits of block `j` (1-based) as an integer, block-local coordinate 1 least significant.
    #[inline]
    pub fn block_value(&self, layout: BlockLayout, j: usize) -> u64 {
        debug_assert!(layout.b <= 64);
        let start = (j - 1) * layout.b;
        self.extract(start, layout.b)
    }

    fn extract(&self, start: usize, width: usize) -> u64 {
        if width == 0 {
            return 0;
        }
        let w = start / WORD;
        let off = start % WORD;
        let mut v = self.words[w] >> off;
        if off + width > WORD {
            if let Some(next) = self.words.get(w + 1) {
                v |= next << (WORD - off);
            }
        }
        if width < WORD {
            v &= (1u64 << width) - 1;
        }
        v
    }

    /// Bits of block `j` (1-based), block 1 being the first `b` coordinates.
    pub fn block(&self, layout: BlockLayout, j: usize) -> Result<BitVec> {
        if self.len != layout.total_bits() {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: layout.total_bits(),
            });
        }
        if j == 0 || j > layout.a {
            return Err(Error::BlockOutOfRange {
                index: j,
                blocks: layout.a,
            });
        }
        let start = (j - 1) * layout.b;
        let mut out = BitVec::zeros(layout.b);
        for i in 0..layout.b {
            out.set(i, self.get(start + i));
        }
        Ok(out)
    }

    /// True when block `j` (1-based) is all zero.
    pub fn block_is_zero(&self, layout: BlockLayout, j: usize) -> bool {
        let start = (j - 1) * layout.b;
        let mut i = 0;
        while i < layout.b {
            let width = (layout.b - i).min(WORD);
            if self.extract(start + i, width) != 0 {
                return false;
            }
            i += width;
        }
        true
    }

    /// Extends (or truncates) to `len` coordinates; new coordinates are zero.
    pub fn resized(&self, len: usize) -> BitVec {
        let mut out = BitVec::from_words(len, &self.words);
        out.clear_tail();
        out
    }

    /// Cyclic shift moving coordinate `r` to coordinate 0: `out[j] = self[(j + r) mod len]`.
    pub fn rotated(&self, r: usize) -> BitVec {
        if self.len == 0 {
            return self.clone();
        }
        let r = r % self.len;
        if r == 0 {
            return self.clone();
        }
        if self.len <= WORD {
            let v = self.words[0];
            let rot = (v >> r) | (v << (self.len - r));
            return BitVec::from_u64(self.len, rot);
        }
        let mut out = BitVec::zeros(self.len);
        for j in 0..self.len {
            if self.get((j + r) % self.len) {
                out.set(j, true);
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Parses a string of `0`/`1` characters, first character = coordinate 1.
impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "invalid bit {other:?} at position {i}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitVec::from_bits(&bits))
    }
}

/// Parity of the coordinatewise AND.
pub fn dot_mod2(u: &BitVec, v: &BitVec) -> Result<bool> {
    u.dot(v)
}

pub fn xor(u: &BitVec, v: &BitVec) -> Result<BitVec> {
    u.xor(v)
}

/// `a` blocks of `b` bits each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockLayout {
    pub a: usize,
    pub b: usize,
}

impl BlockLayout {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidLayout(format!("a={a}, b={b}: both must be >= 1")));
        }
        if a.checked_mul(b).is_none() {
            return Err(Error::InvalidLayout(format!("a={a}, b={b}: overflow")));
        }
        Ok(Self { a, b })
    }

    pub fn total_bits(&self) -> usize {
        self.a * self.b
    }
}

/// Result of solving `row · c = label` over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(BitVec),
    Underdetermined { rank: usize },
    Inconsistent,
}

/// Rows of equal length with optional parallel labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
    labels: Option<Vec<bool>>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
            labels: None,
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    left: r.len(),
                    right: cols,
                });
            }
        }
        Ok(Self {
            cols,
            rows,
            labels: None,
        })
    }

    pub fn from_labeled(cols: usize, rows: Vec<BitVec>, labels: Vec<bool>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: labels.len(),
            });
        }
        let mut m = Self::from_rows(cols, rows)?;
        m.labels = Some(labels);
        Ok(m)
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                if row.get(col) {
                    row.xor_assign_unchecked(&pivot);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Gauss–Jordan elimination of the labeled system.
    ///
    /// Columns are processed lowest index first; the pivot for a column is the
    /// lowest-index remaining row with a one there. An inconsistent system reports
    /// `Inconsistent` even when it is also rank deficient.
    pub fn gaussian_solve(&self) -> Result<SolveOutcome> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("system has no labels".into()))?;
        let mut rows: Vec<(BitVec, bool)> = self
            .rows
            .iter()
            .cloned()
            .zip(labels.iter().copied())
            .collect();
        let mut pivot_cols = Vec::with_capacity(self.cols);
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].0.get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let (pv, pl) = rows[rank].clone();
            for (r, (row, label)) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign_unchecked(&pv);
                    *label ^= pl;
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        if rows[rank..].iter().any(|(_, l)| *l) {
            return Ok(SolveOutcome::Inconsistent);
        }
        if rank < self.cols {
            return Ok(SolveOutcome::Underdetermined { rank });
        }
        let mut c = BitVec::zeros(self.cols);
        for (r, &col) in pivot_cols.iter().enumerate() {
            c.set(col, rows[r].1);
        }
        Ok(SolveOutcome::Solved(c))
    }
}

/// True iff the `k` vectors of length `k` span GF(2)^k.
pub fn is_basis(vectors: &[BitVec]) -> Result<bool> {
    let k = vectors.len();
    for v in vectors {
        if v.len() != k {
            return Err(Error::LengthMismatch {
                left: v.len(),
                right: k,
            });
        }
    }
    Ok(BitMatrix::from_rows(k, vectors.to_vec())?.rank() == k)
}

/// Incremental echelon basis that remembers how each pivot row was formed.
///
/// Each inserted vector carries a tag set; pivot rows store the symmetric
/// difference of the tags of the inserted vectors they were reduced from.
#[derive(Debug, Clone)]
pub(crate) struct TrackedBasis {
    len: usize,
    pivots: Vec<Option<(BitVec, BitVec)>>,
    rank: usize,
}

impl TrackedBasis {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            len,
            pivots: vec![None; len],
            rank: 0,
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// Reduces `v` (with its tag vector) and stores it as a new pivot if it is independent.
    pub(crate) fn insert(&mut self, mut v: BitVec, mut tag: BitVec) -> bool {
        debug_assert_eq!(v.len(), self.len);
        while let Some(col) = v.first_one() {
            match &self.pivots[col] {
                Some((pv, pt)) => {
                    v.xor_assign_unchecked(pv);
                    tag.xor_assign_unchecked(pt);
                }
                None => {
                    self.pivots[col] = Some((v, tag));
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }

    /// Tag combination whose vectors sum to `target`, if `target` is in the span.
    pub(crate) fn express(&self, target: &BitVec, tag_len: usize) -> Option<BitVec> {
        let mut v = target.clone();
        let mut tag = BitVec::zeros(tag_len);
        while let Some(col) = v.first_one() {
            let (pv, pt) = self.pivots[col].as_ref()?;
            v.xor_assign_unchecked(pv);
            tag.xor_assign_unchecked(pt);
        }
        Some(tag)
    }
}
