mod args;
mod output;
mod solve;
mod sq;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lpn_core::instance::format::InstanceFile;
use lpn_core::instance::NoiseRate;
use lpn_core::solvers::{predicted_bias, xor_chain_oracle};
use serde::Serialize;

use args::{BiasArgs, Cli, Command, GenArgs, SqCommand};
use output::{write_records, write_text, CmdResult, Failure, EXIT_USAGE};

fn cmd_gen(args: &GenArgs) -> CmdResult {
    let file = InstanceFile::generate(args.k, args.count, args.eta, args.seed, args.with_target)?;
    write_text(args.out.as_deref(), &file.render())
}

#[derive(Debug, Serialize)]
struct BiasRecord {
    schema: &'static str,
    eta: f64,
    s: u64,
    trials: u64,
    seed: u64,
    predicted: f64,
    observed: f64,
    sigma: f64,
    z: f64,
}

fn cmd_bias(args: &BiasArgs) -> CmdResult {
    let eta = NoiseRate::new(args.eta)?;
    let predicted = predicted_bias(eta, args.s)?;
    let observed = xor_chain_oracle(eta, args.s, args.trials, args.seed)?;
    let sigma = (predicted * (1.0 - predicted) / args.trials as f64).sqrt();
    let z = if sigma > 0.0 { (observed - predicted) / sigma } else { 0.0 };
    let rec = BiasRecord {
        schema: "bias/v1",
        eta: args.eta,
        s: args.s,
        trials: args.trials,
        seed: args.seed,
        predicted,
        observed,
        sigma,
        z,
    };
    write_records(&[rec], &args.output)
}

fn run(cli: Cli) -> CmdResult<i32> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a).map(|_| 0),
        Command::Solve(a) => solve::cmd_solve(&a),
        Command::Sq(SqCommand::Dim(a)) => sq::cmd_dim(&a).map(|_| 0),
        Command::Sq(SqCommand::Reduce(a)) => sq::cmd_reduce(&a).map(|_| 0),
        Command::Sq(SqCommand::BasisLearn(a)) => sq::cmd_basis(&a).map(|_| 0),
        Command::Bias(a) => cmd_bias(&a).map(|_| 0),
    }
}

fn threads_from_env() -> Result<(), Failure> {
    let Ok(v) = std::env::var("LPN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("LPN_THREADS={v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    match threads_from_env().and_then(|_| run(cli)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code as u8)
        }
    }
}
