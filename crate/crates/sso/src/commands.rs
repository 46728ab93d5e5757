//! Implementations behind each subcommand.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use sso_core::metrics::{self, labels_from, ClusterAssignment};
use sso_core::objective::{
    CommunityObjective, LinearObjective, NpcaObjective, Objective, OnmfObjective,
};
use sso_core::problems::{gen_planted_npca, gen_random_feasible, spectral_init, SpectralSource};
use sso_core::solver::{solve, Branch, SolveResult, SolverOptions, Status, Stepsize};
use sso_core::{DenseMatrix, SupportMatrix};

use crate::cli::*;
use crate::io::{self, OptimumSidecar, SolveReport};

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(GenCommand::Npca(args)) => gen_npca(&args).map(|_| ExitCode::SUCCESS),
        Command::Solve(args) => cmd_solve(&args),
        Command::Metrics(MetricsCommand::Cluster(args)) => {
            metrics_cluster(&args).map(|_| ExitCode::SUCCESS)
        }
        Command::Metrics(MetricsCommand::Npca(args)) => {
            metrics_npca(&args).map(|_| ExitCode::SUCCESS)
        }
        Command::Bench(args) => bench(&args).map(|_| ExitCode::SUCCESS),
    }
}

pub fn gen_npca(args: &GenNpcaArgs) -> Result<()> {
    let inst = gen_planted_npca(args.n, args.m, args.p, args.seed)
        .context("cannot generate planted instance")?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    io::save_matrix(&args.out.join("A.mtx"), &inst.a)?;
    io::save_support(&args.out.join("xopt.txt"), &inst.x_opt)?;
    let sidecar = OptimumSidecar {
        f_opt: inst.f_opt,
        n: args.n,
        m: args.m,
        p: args.p,
        seed: args.seed,
        sigma: inst.sigma,
    };
    io::save_json(&args.out.join("fopt.json"), &sidecar)?;
    Ok(())
}

fn objective(problem: Problem, a: DenseMatrix, p: usize) -> Result<Box<dyn Objective>> {
    Ok(match problem {
        Problem::Npca => Box::new(NpcaObjective::new(a)),
        Problem::Onmf => Box::new(OnmfObjective::new(a)),
        Problem::Community => Box::new(CommunityObjective::new(a)?),
        Problem::Linear => {
            if a.cols() != p {
                bail!("linear cost matrix has {} columns but --p is {p}", a.cols());
            }
            Box::new(LinearObjective::new(a))
        }
    })
}

fn initial_point(args: &SolveArgs, a: &DenseMatrix, n: usize) -> Result<SupportMatrix> {
    let x0 = match &args.init {
        Init::Random => gen_random_feasible(n, args.p, args.seed)?,
        Init::File(path) => io::load_support(path)?,
        Init::Spectral => match args.problem {
            // f = -1/2 ||A X||^2 is driven by A^T A.
            Problem::Npca => spectral_init(SpectralSource::Gram(&a.transpose()), args.p)?,
            Problem::Onmf => spectral_init(SpectralSource::Gram(a), args.p)?,
            Problem::Community => spectral_init(SpectralSource::Symmetric(a), args.p)?,
            Problem::Linear => bail!("--init spectral is not defined for the linear problem"),
        },
    };
    if x0.shape() != (n, args.p) {
        bail!(
            "initial point is {} x {}, expected {n} x {}",
            x0.n_rows(),
            x0.n_cols(),
            args.p
        );
    }
    Ok(x0)
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::KeptSupport => "kept",
        Branch::Relocation => "relocation",
    }
}

fn write_trace(path: &Path, res: &SolveResult) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record([
        "k",
        "f",
        "step_y",
        "step_x",
        "eta",
        "branch",
        "r_k",
        "support_changes",
    ])?;
    for r in &res.trace.records {
        w.write_record([
            r.k.to_string(),
            format!("{:e}", r.f_value),
            format!("{:e}", r.step_y),
            format!("{:e}", r.step_x),
            format!("{:e}", r.eta),
            branch_name(r.branch).to_string(),
            r.r_k.to_string(),
            r.support_changes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let a = io::load_matrix(&args.input, None)?;
    let obj = objective(args.problem, a.clone(), args.p)?;
    let n = obj.n_rows();
    let x0 = initial_point(args, &a, n)?;
    let opts = SolverOptions {
        delta: args.delta,
        theta: args.theta,
        tol: args.tol,
        max_iters: args.max_iters,
        stepsize: match args.fixed_eta {
            Some(eta) => Stepsize::Fixed(eta),
            None => Stepsize::BarzilaiBorwein,
        },
        seed: Some(args.seed),
        ..SolverOptions::default()
    };

    let start = Instant::now();
    let res = solve(obj.as_ref(), &x0, &opts)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    io::save_json(
        &args.out,
        &SolveReport::new(args.problem.name(), &res, wall_ms),
    )?;
    if let Some(path) = &args.trace {
        write_trace(path, &res)?;
    }
    Ok(match res.status {
        Status::Converged => ExitCode::SUCCESS,
        Status::MaxIters => ExitCode::from(2),
    })
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => io::save_json(path, value)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ClusterScores {
    entropy: f64,
    purity: f64,
    nmi: f64,
    accuracy: f64,
}

fn load_prediction(path: &Path) -> Result<ClusterAssignment> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    Ok(if is_json {
        let report: SolveReport = io::load_json(path)?;
        labels_from(&report.point()?)
    } else {
        ClusterAssignment::from_labels(&io::read_labels(io::open(path)?)?)
    })
}

pub fn metrics_cluster(args: &ClusterArgs) -> Result<()> {
    let pred = load_prediction(&args.pred)?;
    let truth = ClusterAssignment::from_labels(&io::read_labels(io::open(&args.truth)?)?);
    let p = args.p;
    let scores = ClusterScores {
        entropy: metrics::entropy(&pred, &truth, p)?,
        purity: metrics::purity(&pred, &truth, p)?,
        nmi: metrics::nmi(&pred, &truth, p)?,
        accuracy: metrics::accuracy(&pred, &truth, p)?,
    };
    emit(&scores, args.out.as_deref())
}

#[derive(Debug, Serialize)]
struct NpcaScores {
    relative_gap: f64,
    subspace_distance: f64,
}

pub fn metrics_npca(args: &NpcaMetricsArgs) -> Result<()> {
    let report: SolveReport = io::load_json(&args.result)?;
    let opt: OptimumSidecar = io::load_json(&args.opt)?;
    let xopt = io::load_support(&args.xopt)?;
    let x = report.point()?;
    let scores = NpcaScores {
        relative_gap: metrics::relative_gap(report.f_final, opt.f_opt),
        subspace_distance: metrics::subspace_distance(&x, &xopt)?,
    };
    emit(&scores, args.out.as_deref())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub seed: u64,
    pub time_ms: f64,
    pub relative_gap: f64,
    pub subspace_distance: f64,
    pub iterations: usize,
}

/// Offset between an instance seed and the seed of its random start.
pub const START_SEED_OFFSET: u64 = 1000;

/// One planted NPCA run with default options from a random start.
pub fn bench_run(n: usize, m: usize, p: usize, seed: u64) -> Result<BenchRow> {
    let inst = gen_planted_npca(n, m, p, seed)?;
    let obj = NpcaObjective::new(inst.a);
    let x0 = gen_random_feasible(n, p, seed + START_SEED_OFFSET)?;
    let start = Instant::now();
    let res = solve(&obj, &x0, &SolverOptions::default())?;
    let time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(BenchRow {
        n,
        m,
        p,
        seed,
        time_ms,
        relative_gap: metrics::relative_gap(res.f_final, inst.f_opt),
        subspace_distance: metrics::subspace_distance(&res.x_final, &inst.x_opt)?,
        iterations: res.iterations,
    })
}

fn thread_count(args: &BenchArgs) -> Result<usize> {
    if let Some(t) = args.threads {
        return Ok(t);
    }
    match std::env::var("SSO_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .with_context(|| format!("SSO_THREADS must be a thread count, got '{s}'")),
        // 0 lets rayon pick.
        Err(_) => Ok(0),
    }
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let mut jobs = Vec::new();
    for &n in &args.n {
        for &m in &args.m {
            for &p in &args.p {
                for seed in args.first_seed..args.first_seed + args.seeds {
                    jobs.push((n, m, p, seed));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(args)?)
        .build()?;
    let rows: Vec<BenchRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(n, m, p, seed)| {
                bench_run(n, m, p, seed).with_context(|| format!("n={n} m={m} p={p} seed={seed}"))
            })
            .collect::<Result<_>>()
    })?;

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
