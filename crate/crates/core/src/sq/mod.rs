//! Statistical-query laboratory over small finite domains.

mod basis;
mod concept;
mod dimension;
mod oracle;
mod reduction;

pub use basis::{
    basis_bit_query, basis_probability, basis_query, basis_query_learner, basis_solution, BASIS_MAX_K,
};
pub use concept::{Concept, ConceptClass, FiniteDistribution, MAX_DOMAIN_BITS};
pub use dimension::{correlation, sq_dimension, verify_witness, SqDimReport, EXACT_DIMENSION_MAX_CLASS};
pub use oracle::{
    kwise_answer, sq_answer, weak_advantage, KWiseOracle, KWiseQuery, OracleMode, SimulatedOracle, SqQuery,
    UnaryOracle, KWISE_EXACT_CAP,
};
pub use reduction::{
    case_one_exists, estimate_error_bound, kwise_to_unary_reduce, unlabeled_estimate, EstimateMode,
    HypothesisSource, ReductionConfig, ReductionOutcome, ReductionReport, REDUCTION_MAX_ARITY,
};
