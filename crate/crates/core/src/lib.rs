//! Learning parity functions under random classification noise.
//!
//! The crate is organised bottom-up:
//!
//! * [`bitlinalg`] packed GF(2) vectors, matrices and elimination.
//! * [`instance`] planted targets, the noisy example oracle and the instance file format.
//! * [`solvers`] brute-force and Gaussian baselines, the label-sum bias formula,
//!   the block-merge step and the full block-merge (BKW) solver.
//! * [`online`] the arbitrary-distribution online decoder built from block-keyed
//!   elimination matrices with a majority vote across matrices.
//! * [`sq`] a statistical-query laboratory over small finite domains.
//!
//! Data-parallel loops (vote lanes, Monte Carlo trials, candidate sweeps) run on
//! rayon when the `parallel` feature is enabled and fall back to plain iteration
//! otherwise; see [`par::Exec`].

pub mod bitlinalg;
pub mod error;
pub mod instance;
pub mod online;
pub mod par;
pub mod seed;
pub mod solvers;
pub mod sq;

pub use bitlinalg::{BitMatrix, BitVec, BlockLayout, SolveOutcome};
pub use error::{Error, Result};
pub use instance::{
    Distribution, ExampleOracle, ExampleSource, LabeledExample, NoiseRate, ParityTarget,
    ReplaySource, TargetSpec,
};
pub use par::Exec;
