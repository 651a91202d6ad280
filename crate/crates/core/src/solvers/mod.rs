//! Parity solvers: baselines, the label-sum bias formula and the block-merge algorithm.

mod bias;
mod bkw;
mod gauss;
mod merge;
mod mle;

pub use bias::{predicted_bias, xor_chain_oracle, xor_chain_oracle_with};
pub use bkw::{
    auto_repetitions, choose_parameters, recover_first_bit, recover_target, single_vote,
    FirstBitOutcome, ParameterProfile, Repetitions, SolverConfig, SolverResult, Status,
    MAX_PASSES_PER_VOTE,
};
pub use gauss::{gaussian_baseline, gaussian_vote, GaussVote};
pub use merge::{in_subspace, merge_step, merge_step_with, ISample, SampleEntry};
pub use mle::{mle_bruteforce, mle_bruteforce_with, MLE_MAX_K};
pub(crate) use merge::xor_sets as xor_index_sets;
