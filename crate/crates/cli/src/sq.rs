use lpn_core::bitlinalg::BitVec;
use lpn_core::instance::ParityTarget;
use lpn_core::seed;
use lpn_core::sq::{
    basis_query_learner, kwise_answer, kwise_to_unary_reduce, sq_dimension, verify_witness, Concept,
    ConceptClass, FiniteDistribution, HypothesisSource, KWiseQuery, OracleMode, ReductionConfig,
    ReductionOutcome, SimulatedOracle,
};
use serde::Serialize;

use crate::args::{QueryName, SqBasisArgs, SqDimArgs, SqReduceArgs};
use crate::output::{write_records, CmdResult, Failure};

#[derive(Debug, Serialize)]
pub struct DimRecord {
    pub schema: &'static str,
    pub class: String,
    pub n: usize,
    pub class_size: usize,
    pub d: usize,
    pub exact_maximum: Option<usize>,
    pub max_pairwise_correlation: f64,
    pub certified: bool,
    /// Witness concept ids separated by spaces.
    pub witness: String,
}

pub fn cmd_dim(args: &SqDimArgs) -> CmdResult {
    let class = ConceptClass::by_name(&args.class)?;
    let dist = FiniteDistribution::uniform(class.n)?;
    let r = sq_dimension(&class.concepts, &dist)?;
    let rec = DimRecord {
        schema: "sq-dim/v1",
        class: class.name.clone(),
        n: class.n,
        class_size: class.concepts.len(),
        d: r.d,
        exact_maximum: r.exact_maximum,
        max_pairwise_correlation: r.max_pairwise_correlation,
        certified: verify_witness(&r, &class.concepts, &dist),
        witness: r.witness.join(" "),
    };
    write_records(&[rec], &args.output)
}

fn query(name: QueryName, tau: f64) -> CmdResult<KWiseQuery> {
    let q = match name {
        QueryName::LabelsEqual => KWiseQuery::new(2, tau, |_, ls| ls[0] == ls[1]),
        QueryName::LabelIsX1 => KWiseQuery::new(1, tau, |xs, ls| ls[0] == xs[0].get(0)),
        QueryName::UnlabeledAnd => KWiseQuery::new(2, tau, |xs, _| xs[0].get(0) && xs[1].get(0)),
    };
    Ok(q?)
}

fn query_name(name: QueryName) -> &'static str {
    match name {
        QueryName::LabelsEqual => "labels-equal",
        QueryName::LabelIsX1 => "label-is-x1",
        QueryName::UnlabeledAnd => "unlabeled-and",
    }
}

#[derive(Debug, Serialize)]
pub struct ReduceRecord {
    pub schema: &'static str,
    pub class: String,
    pub concept: String,
    pub query: &'static str,
    pub arity: usize,
    pub eps: f64,
    pub delta: f64,
    pub tuples: usize,
    pub seed: u64,
    /// `weak_hypothesis` or `estimate`.
    pub outcome: &'static str,
    pub hypothesis: Option<String>,
    pub hypothesis_source: Option<&'static str>,
    pub advantage: Option<f64>,
    pub estimate: Option<f64>,
    pub error_bound: Option<f64>,
    /// Exact k-wise answer, for comparison with `estimate`.
    pub truth: f64,
    pub queries_used: usize,
    pub tuples_tried: usize,
}

pub fn cmd_reduce(args: &SqReduceArgs) -> CmdResult {
    let class = ConceptClass::by_name(&args.class)?;
    let dist = FiniteDistribution::uniform(class.n)?;
    let q = query(args.query, args.eps)?;
    let config = ReductionConfig::new(args.eps)?.with_delta(args.delta)?;
    let config = match args.tuples {
        Some(t) => config.with_tuples(t),
        None => config,
    };
    let mut records = Vec::with_capacity(class.concepts.len());
    for (i, c) in class.concepts.iter().enumerate() {
        let run_seed = seed::lane(seed::named_lane(args.seed, "reduce"), i as u64);
        let oracle = SimulatedOracle::new(c.clone(), dist.clone(), OracleMode::Exact);
        let r = kwise_to_unary_reduce(&q, &oracle, &dist, &config.with_seed(run_seed))?;
        let mut rec = ReduceRecord {
            schema: "sq-reduce/v1",
            class: class.name.clone(),
            concept: c.id().to_string(),
            query: query_name(args.query),
            arity: q.arity(),
            eps: args.eps,
            delta: args.delta,
            tuples: config.tuple_count(),
            seed: run_seed,
            outcome: "estimate",
            hypothesis: None,
            hypothesis_source: None,
            advantage: None,
            estimate: None,
            error_bound: None,
            truth: kwise_answer(&q, c, &dist, OracleMode::Exact)?,
            queries_used: r.queries_used,
            tuples_tried: r.tuples_tried,
        };
        match r.outcome {
            ReductionOutcome::WeakHypothesis { hypothesis, advantage, source } => {
                rec.outcome = "weak_hypothesis";
                rec.hypothesis = Some(hypothesis.id().to_string());
                rec.hypothesis_source = Some(match source {
                    HypothesisSource::Balance { .. } => "balance",
                    HypothesisSource::Candidate { .. } => "candidate",
                });
                rec.advantage = Some(advantage);
            }
            ReductionOutcome::Estimate { value, error_bound } => {
                rec.estimate = Some(value);
                rec.error_bound = Some(error_bound);
            }
        }
        records.push(rec);
    }
    write_records(&records, &args.output)
}

#[derive(Debug, Serialize)]
pub struct BasisRecord {
    pub schema: &'static str,
    pub k: usize,
    pub seed: u64,
    /// `exact`, or `sampled` with `samples` tuples per query.
    pub mode: &'static str,
    pub samples: Option<usize>,
    pub target: String,
    pub recovered: String,
    pub success: bool,
}

pub fn cmd_basis(args: &SqBasisArgs) -> CmdResult {
    let k = args.k;
    if k == 0 {
        return Err(Failure::usage("--k must be at least 1"));
    }
    let target = if args.target == "random" {
        let mut rng = seed::rng(seed::named_lane(args.seed, "target"));
        ParityTarget::random(k, &mut rng)
    } else {
        let c: BitVec = args
            .target
            .parse()
            .map_err(|_| Failure::usage(format!("--target {:?} is not a bit string", args.target)))?;
        if c.len() != k {
            return Err(Failure::usage(format!("--target has {} bits, expected {k}", c.len())));
        }
        ParityTarget::new(c)
    };
    let mode = match args.samples {
        Some(m) => OracleMode::Sampled { m, seed: seed::named_lane(args.seed, "oracle") },
        None => OracleMode::Exact,
    };
    let dist = FiniteDistribution::uniform(k)?;
    let oracle = SimulatedOracle::new(Concept::parity(target.bits().clone()), dist, mode);
    let got = basis_query_learner(k, &oracle, 0.01)?;
    let rec = BasisRecord {
        schema: "sq-basis/v1",
        k,
        seed: args.seed,
        mode: if args.samples.is_some() { "sampled" } else { "exact" },
        samples: args.samples,
        target: target.bits().to_string(),
        recovered: got.bits().to_string(),
        success: got == target,
    };
    write_records(&[rec], &args.output)
}
