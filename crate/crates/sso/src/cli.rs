//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "sso",
    version,
    about = "Support-set solver for the nonnegative Stiefel manifold"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the solver on a matrix file.
    Solve(SolveArgs),
    /// Score a result.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Planted NPCA sweep: generate, solve and score each (size, seed).
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Planted nonnegative PCA with a known optimum.
    Npca(GenNpcaArgs),
}

#[derive(Debug, Args)]
pub struct GenNpcaArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives A.mtx, xopt.txt and fopt.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    /// -1/2 ||A X||^2 with A (m x n).
    Npca,
    /// 1/2 ||A - X X^T A||^2 with A (n x m), A >= 0.
    Onmf,
    /// -1/4 ||X^T A X||^2 with symmetric A (n x n).
    Community,
    /// <C, X> with C (n x p).
    Linear,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Npca => "npca",
            Problem::Onmf => "onmf",
            Problem::Community => "community",
            Problem::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    Spectral,
    Random,
    File(PathBuf),
}

fn parse_init(s: &str) -> Result<Init, String> {
    Ok(match s {
        "spectral" => Init::Spectral,
        "random" => Init::Random,
        "" => return Err("empty --init".into()),
        path => Init::File(PathBuf::from(path)),
    })
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub problem: Problem,
    /// Matrix Market (.mtx) or CSV (.csv) data matrix.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub p: usize,
    /// `spectral`, `random`, or a support-list file.
    #[arg(long, default_value = "spectral", value_parser = parse_init)]
    pub init: Init,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub theta: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Seed for `--init random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Constant proximal parameter instead of Barzilai-Borwein steps.
    #[arg(long)]
    pub fixed_eta: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-iteration CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Entropy, purity, NMI and accuracy of a clustering.
    Cluster(ClusterArgs),
    /// Relative gap and subspace distance to a planted optimum.
    Npca(NpcaMetricsArgs),
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// A result.json (labels from the final iterate) or a labels CSV.
    #[arg(long)]
    pub pred: PathBuf,
    /// Labels CSV, one integer per line.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NpcaMetricsArgs {
    #[arg(long)]
    pub result: PathBuf,
    /// fopt.json from `sso gen npca`.
    #[arg(long)]
    pub opt: PathBuf,
    /// xopt.txt from `sso gen npca`.
    #[arg(long)]
    pub xopt: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Row counts (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "200")]
    pub n: Vec<usize>,
    /// Sample counts.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub m: Vec<usize>,
    /// Column counts.
    #[arg(long, value_delimiter = ',', default_value = "3,5")]
    pub p: Vec<usize>,
    /// Number of seeds per size.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    /// Worker threads; defaults to SSO_THREADS, then the number of CPUs.
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
