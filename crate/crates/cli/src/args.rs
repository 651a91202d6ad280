use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lpn", version, about = "Noisy parity experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded instance file.
    Gen(GenArgs),
    /// Run a solver over one or more seeds.
    Solve(SolveArgs),
    /// Statistical-query experiments.
    #[command(subcommand)]
    Sq(SqCommand),
    /// Compare the predicted label-sum bias with a Monte Carlo estimate.
    Bias(BiasArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append the planted target as a `TARGET` line.
    #[arg(long)]
    pub with_target: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Bkw,
    Mle,
    Gauss,
    Online,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Bkw => "bkw",
            Algo::Mle => "mle",
            Algo::Gauss => "gauss",
            Algo::Online => "online",
        }
    }
}

/// `N` runs on seeds derived from `--seed`, or an explicit comma-separated list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl FromStr for Seeds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains(',') {
            let list = s
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse::<u64>().map_err(|e| format!("seed {p:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if list.is_empty() || sorted.len() != list.len() {
                return Err("seed list must be nonempty and distinct".into());
            }
            Ok(Seeds::List(list))
        } else {
            let n: u64 = s.trim().parse().map_err(|e| format!("seed count {s:?}: {e}"))?;
            if n == 0 {
                return Err("seed count must be at least 1".into());
            }
            Ok(Seeds::Count(n))
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Instance file; examples are drawn live from `--k`/`--eta` otherwise.
    #[arg(long = "in", conflicts_with_all = ["k", "eta"])]
    pub input: Option<PathBuf>,
    #[arg(long, required_unless_present = "input")]
    pub k: Option<usize>,
    #[arg(long, required_unless_present = "input")]
    pub eta: Option<f64>,
    /// Number of blocks for the block-merge solver.
    #[arg(long, requires = "b")]
    pub a: Option<usize>,
    /// Block width for the block-merge solver.
    #[arg(long, requires = "a")]
    pub b: Option<usize>,
    /// Explicit votes per coordinate (block-merge solver); automatic otherwise.
    #[arg(long)]
    pub repetitions: Option<u32>,
    /// Online decoder: number of blocks g.
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Online decoder: block width w.
    #[arg(long)]
    pub width: Option<usize>,
    /// Online decoder: number of elimination matrices t.
    #[arg(long)]
    pub matrices: Option<usize>,
    #[arg(long, default_value = "1")]
    pub seeds: Seeds,
    /// Master seed that `--seeds N` derives run seeds from.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long)]
    pub max_examples: Option<u64>,
    /// Sample size for mle/gauss, stream length for online (live sources only).
    #[arg(long)]
    pub count: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum SqCommand {
    /// SQ dimension of a registered class under the uniform distribution.
    Dim(SqDimArgs),
    /// The k-wise to unary reduction against every concept of a class.
    Reduce(SqReduceArgs),
    /// Learn a parity from k-wise basis queries.
    BasisLearn(SqBasisArgs),
}

#[derive(Debug, Args)]
pub struct SqDimArgs {
    /// `parity:j-of-n` or `conjunction:j-of-n`.
    #[arg(long)]
    pub class: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QueryName {
    /// k=2: the two labels are equal.
    LabelsEqual,
    /// k=1: the label equals the first coordinate.
    LabelIsX1,
    /// k=2: both first coordinates are 1; ignores labels.
    UnlabeledAnd,
}

#[derive(Debug, Args)]
pub struct SqReduceArgs {
    #[arg(long)]
    pub class: String,
    #[arg(long, value_enum, default_value_t = QueryName::LabelsEqual)]
    pub query: QueryName,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Tuples tried before estimating; `⌈4/ε·ln(1/δ)⌉` by default.
    #[arg(long)]
    pub tuples: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SqBasisArgs {
    #[arg(long)]
    pub k: usize,
    /// `random`, or the target as a bit string with coordinate 1 first.
    #[arg(long, default_value = "random")]
    pub target: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Answer k-wise queries from this many sampled tuples instead of exactly.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BiasArgs {
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub s: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn seeds_parse() {
        assert_eq!("5".parse(), Ok(Seeds::Count(5)));
        assert_eq!("3,9".parse(), Ok(Seeds::List(vec![3, 9])));
        assert_eq!("7,".parse(), Ok(Seeds::List(vec![7])));
        assert!("0".parse::<Seeds>().is_err());
        assert!("1,1".parse::<Seeds>().is_err());
        assert!("x".parse::<Seeds>().is_err());
    }
}
