//! Online prediction over arbitrary input sequences.
//!
//! Each [`EliminationMatrix`] is Gaussian elimination over `w`-bit blocks: it
//! keeps at most one row per `(block j, nonzero block value v)`, with blocks
//! `1..j` of that row zero and block `j` equal to `v`. A new example is reduced
//! block by block; it is either captured as a new row (the decoder answers
//! "unknown" and is then shown the noisy label) or reduced to zero, in which
//! case the XOR of the used rows' labels is a vote for its label. A
//! [`MatrixBank`] passes the example through `t` matrices and predicts the
//! majority vote once every matrix has voted.

use std::collections::HashMap;

use crate::bitlinalg::{BitVec, BlockLayout};
use crate::error::{Error, Result};
use crate::instance::ExampleOracle;
use crate::solvers::in_subspace;

/// Widest block stored as a dense table; wider blocks use a hash map.
const DENSE_WIDTH: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub vector: BitVec,
    pub label: bool,
    /// Number of original examples XORed into `vector`.
    pub depth: u32,
    pub provenance: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
enum RowTable {
    Dense(Vec<Option<Row>>),
    Sparse(HashMap<u64, Row>),
}

impl RowTable {
    fn new(width: usize) -> Self {
        if width <= DENSE_WIDTH {
            RowTable::Dense(Vec::new())
        } else {
            RowTable::Sparse(HashMap::new())
        }
    }

    #[inline]
    fn get(&self, v: u64) -> Option<&Row> {
        match self {
            RowTable::Dense(t) => t.get(v as usize).and_then(Option::as_ref),
            RowTable::Sparse(m) => m.get(&v),
        }
    }

    fn insert(&mut self, v: u64, row: Row, width: usize) {
        match self {
            RowTable::Dense(t) => {
                if t.is_empty() {
                    t.resize(1 << width, None);
                }
                t[v as usize] = Some(row);
            }
            RowTable::Sparse(m) => {
                m.insert(v, row);
            }
        }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = (u64, &Row)> + '_> {
        match self {
            RowTable::Dense(t) => Box::new(
                t.iter()
                    .enumerate()
                    .filter_map(|(v, r)| r.as_ref().map(|r| (v as u64, r))),
            ),
            RowTable::Sparse(m) => Box::new(m.iter().map(|(v, r)| (*v, r))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    /// `folded_label` is the caller's label XOR the labels of every row used;
    /// `depth` counts the example itself plus the rows' depths.
    Zeroed {
        folded_label: bool,
        depth: u32,
        /// Draw indices of the stored examples whose XOR is the input (the input itself excluded).
        provenance: Option<Vec<u64>>,
    },
    /// Stored as a new row keyed by this 1-based block.
    Captured { block: usize },
}

/// Result of reducing without mutating the matrix.
struct Probe {
    residual: BitVec,
    label: bool,
    depth: u32,
    provenance: Option<Vec<u64>>,
    capture: Option<(usize, u64)>,
}

#[derive(Debug, Clone)]
pub struct EliminationMatrix {
    layout: BlockLayout,
    tables: Vec<RowTable>,
    rows: usize,
    track_provenance: bool,
}

impl EliminationMatrix {
    pub fn new(blocks: usize, width: usize) -> Result<Self> {
        let layout = BlockLayout::new(blocks, width)?;
        if width > 63 {
            return Err(Error::InvalidLayout(format!("block width {width} exceeds 63")));
        }
        Ok(Self {
            layout,
            tables: (0..blocks).map(|_| RowTable::new(width)).collect(),
            rows: 0,
            track_provenance: false,
        })
    }

    pub fn with_provenance(mut self, on: bool) -> Self {
        self.track_provenance = on;
        self
    }

    pub fn blocks(&self) -> usize {
        self.layout.a
    }

    pub fn width(&self) -> usize {
        self.layout.b
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    /// `g·(2^w - 1)`.
    pub fn capacity(&self) -> u64 {
        self.layout.a as u64 * ((1u64 << self.layout.b) - 1)
    }

    pub fn row(&self, block: usize, value: u64) -> Option<&Row> {
        self.tables.get(block.checked_sub(1)?)?.get(value)
    }

    /// Every stored row with its key `(block, value)`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, u64, &Row)> + '_ {
        self.tables
            .iter()
            .enumerate()
            .flat_map(|(j, t)| t.iter().map(move |(v, r)| (j + 1, v, r)))
    }

    fn probe(&self, x: &BitVec, index: u64) -> Probe {
        let mut residual = x.clone();
        let mut label = false;
        let mut depth = 1u32;
        let mut provenance = self.track_provenance.then(Vec::new);
        for j in 1..=self.layout.a {
            let v = residual.block_value(self.layout, j);
            if v == 0 {
                continue;
            }
            match self.tables[j - 1].get(v) {
                Some(row) => {
                    residual.xor_assign_unchecked(&row.vector);
                    label ^= row.label;
                    depth += row.depth;
                    if let (Some(p), Some(rp)) = (&mut provenance, &row.provenance) {
                        *p = crate::solvers::xor_index_sets(p, rp);
                    }
                }
                None => {
                    if let Some(p) = &mut provenance {
                        *p = crate::solvers::xor_index_sets(p, &[index]);
                    }
                    return Probe {
                        residual,
                        label,
                        depth,
                        provenance,
                        capture: Some((j, v)),
                    };
                }
            }
        }
        Probe {
            residual,
            label,
            depth,
            provenance,
            capture: None,
        }
    }

    fn store(&mut self, probe: Probe, label: bool) -> usize {
        let (j, v) = probe.capture.expect("capturing probe");
        let row = Row {
            vector: probe.residual,
            label: probe.label ^ label,
            depth: probe.depth,
            provenance: probe.provenance,
        };
        debug_assert!(self.row_invariant_holds(j, v, &row));
        self.tables[j - 1].insert(v, row, self.layout.b);
        self.rows += 1;
        j
    }

    fn row_invariant_holds(&self, j: usize, v: u64, row: &Row) -> bool {
        (1..j).all(|i| row.vector.block_is_zero(self.layout, i))
            && row.vector.block_value(self.layout, j) == v
            && row.depth <= 1 << j
    }

    fn check_len(&self, x: &BitVec) -> Result<()> {
        if x.len() != self.layout.total_bits() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.layout.total_bits(),
            });
        }
        Ok(())
    }

    /// Reduces `x` through the matrix, storing it as a row if some block has no
    /// matching row. `index` tags the example for provenance tracking.
    pub fn reduce_through(&mut self, x: &BitVec, label: bool, index: u64) -> Result<Reduction> {
        self.check_len(x)?;
        let probe = self.probe(x, index);
        Ok(match probe.capture {
            Some(_) => Reduction::Captured {
                block: self.store(probe, label),
            },
            None => Reduction::Zeroed {
                folded_label: probe.label ^ label,
                depth: probe.depth,
                provenance: probe.provenance,
            },
        })
    }

    /// Checks the stored-row invariants: keys match block contents and earlier
    /// blocks are zero, depths are bounded, and the row count is within capacity.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut count = 0;
        for (j, v, row) in self.rows() {
            count += 1;
            if !self.row_invariant_holds(j, v, row) {
                return Err(format!("row ({j}, {v}) = {} violates its key", row.vector));
            }
            if !in_subspace(&row.vector, self.layout, 0) {
                return Err(format!("row ({j}, {v}) has the wrong length"));
            }
        }
        if count != self.rows || count as u64 > self.capacity() {
            return Err(format!("{count} rows, capacity {}", self.capacity()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    /// Every matrix voted. `votes_for` backs `bit`; a split vote predicts 0 with `tie` set.
    Predicted {
        bit: bool,
        votes_for: u32,
        votes_against: u32,
        tie: bool,
    },
    /// Captured as a row of the 1-based matrix `captured_in`; the label was requested.
    Unknown { captured_in: usize },
}

/// One matrix's vote on an example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vote {
    pub matrix: usize,
    pub bit: bool,
    pub depth: u32,
    pub provenance: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct MatrixBank {
    matrices: Vec<EliminationMatrix>,
}

impl MatrixBank {
    pub fn new(blocks: usize, width: usize, matrices: usize) -> Result<Self> {
        if matrices == 0 {
            return Err(Error::ZeroCount("matrices"));
        }
        let m = EliminationMatrix::new(blocks, width)?;
        Ok(Self {
            matrices: vec![m; matrices],
        })
    }

    pub fn with_provenance(mut self, on: bool) -> Self {
        for m in &mut self.matrices {
            m.track_provenance = on;
        }
        self
    }

    pub fn matrices(&self) -> &[EliminationMatrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn process_example<F>(&mut self, x: &BitVec, index: u64, label_supplier: F) -> Result<Prediction>
    where
        F: FnOnce() -> bool,
    {
        self.process_observed(x, index, label_supplier, |_| {})
    }

    /// As [`process_example`](Self::process_example), reporting every matrix vote to `observer`.
    ///
    /// Each matrix reduces the original `x`. The label is requested only when
    /// some matrix captures the example, and the example then goes no further.
    pub fn process_observed<F, V>(
        &mut self,
        x: &BitVec,
        index: u64,
        label_supplier: F,
        mut observer: V,
    ) -> Result<Prediction>
    where
        F: FnOnce() -> bool,
        V: FnMut(Vote),
    {
        self.matrices[0].check_len(x)?;
        let mut ones = 0u32;
        let mut zeros = 0u32;
        for (m, matrix) in self.matrices.iter_mut().enumerate() {
            let probe = matrix.probe(x, index);
            if probe.capture.is_some() {
                matrix.store(probe, label_supplier());
                return Ok(Prediction::Unknown { captured_in: m + 1 });
            }
            if probe.label {
                ones += 1;
            } else {
                zeros += 1;
            }
            observer(Vote {
                matrix: m + 1,
                bit: probe.label,
                depth: probe.depth,
                provenance: probe.provenance,
            });
        }
        let tie = ones == zeros;
        let bit = ones > zeros;
        let (votes_for, votes_against) = if bit { (ones, zeros) } else { (zeros, ones) };
        Ok(Prediction::Predicted {
            bit,
            votes_for,
            votes_against,
            tie,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnlineConfig {
    pub blocks: usize,
    pub width: usize,
    pub matrices: usize,
    pub track_provenance: bool,
}

/// Per-depth accounting of single-matrix votes against the true label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DepthTally {
    pub votes: u64,
    pub correct: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub processed: u64,
    pub predicted: u64,
    pub unknown: u64,
    /// Predictions disagreeing with the noiseless label (needs a known target).
    pub errors: u64,
    pub ties: u64,
    /// Rows held by each matrix at the end of the run.
    pub per_matrix_fill: Vec<usize>,
    /// Largest depth of any zeroed reduction.
    pub max_depth: u32,
    /// Indexed by depth; counts single-matrix votes and how many matched the true label.
    pub depth_tallies: Vec<DepthTally>,
    /// `t·g·(2^w - 1)`.
    pub unknown_bound: u64,
    pub target_known: bool,
}

impl Report {
    pub fn rows_total(&self) -> usize {
        self.per_matrix_fill.iter().sum()
    }
}

/// Runs `n` examples from `oracle` through a fresh bank.
pub fn run_online<O: ExampleOracle>(oracle: &mut O, n: u64, config: OnlineConfig) -> Result<Report> {
    let mut bank = MatrixBank::new(config.blocks, config.width, config.matrices)?
        .with_provenance(config.track_provenance);
    if oracle.k() != config.blocks * config.width {
        return Err(Error::LengthMismatch {
            left: oracle.k(),
            right: config.blocks * config.width,
        });
    }
    let target = oracle.target().cloned();
    let mut report = Report {
        processed: 0,
        predicted: 0,
        unknown: 0,
        errors: 0,
        ties: 0,
        per_matrix_fill: Vec::new(),
        max_depth: 0,
        depth_tallies: Vec::new(),
        unknown_bound: bank.matrices[0].capacity() * config.matrices as u64,
        target_known: target.is_some(),
    };
    for _ in 0..n {
        let e = oracle.draw()?;
        let truth = match &target {
            Some(t) => Some(t.label(&e.x)?),
            None => None,
        };
        let label = e.label;
        let tallies = &mut report.depth_tallies;
        let max_depth = &mut report.max_depth;
        let prediction = bank.process_observed(&e.x, e.index, || label, |vote| {
            *max_depth = (*max_depth).max(vote.depth);
            let d = vote.depth as usize;
            if tallies.len() <= d {
                tallies.resize(d + 1, DepthTally::default());
            }
            tallies[d].votes += 1;
            if Some(vote.bit) == truth {
                tallies[d].correct += 1;
            }
        })?;
        report.processed += 1;
        match prediction {
            Prediction::Unknown { .. } => report.unknown += 1,
            Prediction::Predicted { bit, tie, .. } => {
                report.predicted += 1;
                report.ties += u64::from(tie);
                if truth.is_some_and(|t| t != bit) {
                    report.errors += 1;
                }
            }
        }
    }
    report.per_matrix_fill = bank.matrices.iter().map(|m| m.row_count()).collect();
    Ok(report)
}
