use std::time::Instant;

use lpn_core::bitlinalg::{BlockLayout, SolveOutcome};
use lpn_core::instance::format::InstanceFile;
use lpn_core::instance::{ExampleOracle, ExampleSource, LabeledExample, NoiseRate, ParityTarget, TargetSpec};
use lpn_core::online::{run_online, OnlineConfig};
use lpn_core::seed;
use lpn_core::solvers::{
    choose_parameters, gaussian_baseline, mle_bruteforce, recover_target, ParameterProfile,
    Repetitions, SolverConfig, Status,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Algo, Seeds, SolveArgs};
use crate::output::{write_records, CmdResult, Failure, EXIT_BUDGET};

pub const SCHEMA: &str = "solve/v1";
const DEFAULT_SAMPLE: usize = 2000;
const DEFAULT_STREAM: usize = 1 << 16;

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveRecord {
    pub schema: &'static str,
    pub algo: &'static str,
    pub input: String,
    pub k: usize,
    pub eta: f64,
    pub seed: u64,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub repetitions: Option<u32>,
    pub delta: f64,
    pub max_examples: Option<u64>,
    pub blocks: Option<usize>,
    pub width: Option<usize>,
    pub matrices: Option<usize>,
    pub count: Option<usize>,
    pub success: bool,
    pub status: &'static str,
    pub c_hat: Option<String>,
    pub target: Option<String>,
    pub examples_used: u64,
    pub predicted: Option<u64>,
    pub unknown: Option<u64>,
    pub errors: Option<u64>,
    pub ties: Option<u64>,
    pub max_depth: Option<u32>,
    pub wall_time_ms: f64,
}

/// Run seeds: an explicit list as given, or `N` lanes of the master seed.
pub fn run_seeds(seeds: &Seeds, master: u64) -> Vec<u64> {
    match seeds {
        Seeds::List(list) => list.clone(),
        Seeds::Count(n) => {
            let base = seed::named_lane(master, "runs");
            (0..*n).map(|i| seed::lane(base, i)).collect()
        }
    }
}

enum Problem {
    Live { k: usize, eta: f64 },
    File { path: String, file: InstanceFile },
}

impl Problem {
    fn k(&self) -> usize {
        match self {
            Problem::Live { k, .. } => *k,
            Problem::File { file, .. } => file.header.k,
        }
    }

    fn eta(&self) -> f64 {
        match self {
            Problem::Live { eta, .. } => *eta,
            Problem::File { file, .. } => file.header.eta,
        }
    }
}

fn load(args: &SolveArgs) -> CmdResult<Problem> {
    match &args.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            let file = InstanceFile::parse(&text).map_err(|e| Failure::io(path, e))?;
            Ok(Problem::File { path: path.display().to_string(), file })
        }
        None => {
            let (Some(k), Some(eta)) = (args.k, args.eta) else {
                return Err(Failure::usage("either --in or both --k and --eta are required"));
            };
            NoiseRate::new(eta)?;
            if k == 0 {
                return Err(Failure::usage("--k must be at least 1"));
            }
            Ok(Problem::Live { k, eta })
        }
    }
}

/// Everything the per-seed runs share, resolved up front so bad flags fail before any work.
struct Plan {
    layout: Option<BlockLayout>,
    online: Option<OnlineConfig>,
    count: Option<usize>,
}

fn plan(args: &SolveArgs, problem: &Problem) -> CmdResult<Plan> {
    let k = problem.k();
    let eta = NoiseRate::new(problem.eta())?;
    let file_count = match problem {
        Problem::File { file, .. } => Some(file.examples.len()),
        Problem::Live { .. } => None,
    };
    if file_count.is_some() && args.count.is_some() {
        return Err(Failure::usage("--count only applies to live sources"));
    }
    let mut p = Plan { layout: None, online: None, count: None };
    match args.algo {
        Algo::Bkw => {
            p.layout = Some(match (args.a, args.b) {
                (Some(a), Some(b)) => BlockLayout::new(a, b)?,
                _ => choose_parameters(k, eta, args.delta, ParameterProfile::Balanced)?.layout,
            });
        }
        Algo::Mle | Algo::Gauss => {
            p.count = Some(file_count.or(args.count).unwrap_or(DEFAULT_SAMPLE));
        }
        Algo::Online => {
            let (Some(blocks), Some(width)) = (args.blocks, args.width) else {
                return Err(Failure::usage("--algo online needs --blocks and --width"));
            };
            if blocks * width != k {
                return Err(Failure::usage(format!("--blocks {blocks} x --width {width} must equal k = {k}")));
            }
            let n = file_count.or(args.count).unwrap_or(DEFAULT_STREAM);
            let matrices = args
                .matrices
                .unwrap_or_else(|| ((n as f64).powf(2.0 / 3.0).ceil() as usize).max(1));
            p.online = Some(OnlineConfig { blocks, width, matrices, track_provenance: false });
            p.count = Some(n);
        }
    }
    Ok(p)
}

fn bits(t: &ParityTarget) -> String {
    t.bits().to_string()
}

fn run_one(args: &SolveArgs, problem: &Problem, plan: &Plan, run_seed: u64) -> CmdResult<SolveRecord> {
    let started = Instant::now();
    let k = problem.k();
    let eta = problem.eta();
    let mut rec = SolveRecord {
        schema: SCHEMA,
        algo: args.algo.name(),
        k,
        eta,
        seed: run_seed,
        delta: args.delta,
        max_examples: args.max_examples,
        count: plan.count,
        ..SolveRecord::default()
    };
    rec.input = match problem {
        Problem::Live { .. } => "live".into(),
        Problem::File { path, .. } => path.clone(),
    };

    match problem {
        Problem::Live { .. } => {
            let mut src = ExampleSource::uniform(k, eta, run_seed, TargetSpec::Random)?;
            solve_with(args, plan, &mut src, run_seed, &mut rec)?;
        }
        Problem::File { file, .. } => {
            let mut src = file.clone().into_replay()?;
            solve_with(args, plan, &mut src, run_seed, &mut rec)?;
        }
    }
    rec.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

fn sample<O: ExampleOracle>(src: &mut O, n: usize) -> CmdResult<Vec<LabeledExample>> {
    (0..n).map(|_| src.draw().map_err(Failure::from)).collect()
}

fn solve_with<O>(args: &SolveArgs, plan: &Plan, src: &mut O, run_seed: u64, rec: &mut SolveRecord) -> CmdResult
where
    O: ExampleOracle + Send + Sync,
{
    let k = src.k();
    let target = src.target().cloned();
    rec.target = target.as_ref().map(bits);
    let matches = |c: &ParityTarget| target.as_ref().is_none_or(|t| t == c);
    match args.algo {
        Algo::Bkw => {
            let layout = plan.layout.expect("planned");
            let reps = args.repetitions.map_or(Repetitions::Auto, Repetitions::Explicit);
            let cfg = SolverConfig::new(layout, NoiseRate::new(rec.eta)?, args.delta)?
                .with_repetitions(reps)
                .with_max_examples(args.max_examples)
                .with_seed(seed::named_lane(run_seed, "solver"));
            let r = recover_target(src, &cfg)?;
            rec.a = Some(layout.a);
            rec.b = Some(layout.b);
            rec.repetitions = Some(r.repetitions);
            rec.examples_used = r.examples_used;
            rec.status = match r.status {
                Status::Recovered => "recovered",
                Status::BudgetExceeded => "budget_exceeded",
            };
            rec.success = r.status == Status::Recovered && matches(&r.c_hat);
            rec.c_hat = Some(bits(&r.c_hat));
        }
        Algo::Mle => {
            let data = sample(src, plan.count.expect("planned"))?;
            let c = mle_bruteforce(&data, k)?;
            rec.examples_used = data.len() as u64;
            rec.status = "completed";
            rec.success = matches(&c);
            rec.c_hat = Some(bits(&c));
        }
        Algo::Gauss => {
            let data = sample(src, plan.count.expect("planned"))?;
            rec.examples_used = data.len() as u64;
            match gaussian_baseline(&data, k)? {
                SolveOutcome::Solved(c) => {
                    let c = ParityTarget::new(c);
                    rec.status = "solved";
                    rec.success = matches(&c);
                    rec.c_hat = Some(bits(&c));
                }
                SolveOutcome::Inconsistent => rec.status = "inconsistent",
                SolveOutcome::Underdetermined { .. } => rec.status = "underdetermined",
            }
        }
        Algo::Online => {
            let config = plan.online.expect("planned");
            let n = plan.count.expect("planned") as u64;
            let r = run_online(src, n, config)?;
            rec.blocks = Some(config.blocks);
            rec.width = Some(config.width);
            rec.matrices = Some(config.matrices);
            rec.examples_used = r.processed;
            rec.predicted = Some(r.predicted);
            rec.unknown = Some(r.unknown);
            rec.ties = Some(r.ties);
            rec.max_depth = Some(r.max_depth);
            rec.status = "completed";
            if r.target_known {
                rec.errors = Some(r.errors);
                rec.success = r.predicted > 0 && r.errors * 100 <= r.predicted;
            }
        }
    }
    Ok(())
}

/// Runs every seed, writes rows in seed order, and reports whether any run ran out of budget.
pub fn cmd_solve(args: &SolveArgs) -> CmdResult<i32> {
    let problem = load(args)?;
    let plan = plan(args, &problem)?;
    let seeds = run_seeds(&args.seeds, args.seed);
    let records = seeds
        .par_iter()
        .map(|&s| run_one(args, &problem, &plan, s))
        .collect::<CmdResult<Vec<_>>>()?;
    write_records(&records, &args.output)?;
    let exhausted = records.iter().any(|r| r.status == "budget_exceeded");
    Ok(if exhausted { EXIT_BUDGET } else { 0 })
}
