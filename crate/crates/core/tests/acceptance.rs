//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use sso_core::metrics::{
    accuracy, best_matching, entropy, nmi, purity, relative_gap, subspace_distance,
    ClusterAssignment, ContingencyTable,
};
use sso_core::objective::{
    fd_gradient_check, CommunityObjective, LinearObjective, NpcaObjective, Objective,
    OnmfObjective, FD_STEP,
};
use sso_core::oracle::{oracle_fixed_support, oracle_sweep, oracle_topk_eigs};
use sso_core::problems::{gen_planted_npca, gen_random_feasible, PlantedNpca};
use sso_core::solver::{
    relocation_step, solve_with_observer, IterationRecord, SolveResult, SolverOptions, Status,
};
use sso_core::stationarity::residuals;
use sso_core::subproblem::{proximal_value, solve_fixed_support, ProxData};
use sso_core::SupportMatrix;

use common::*;

type Outcome = Result<String, String>;

/// Counts iterates that fail validation across every solver run below.
#[derive(Default)]
struct FeasibilityLog {
    checked: usize,
    failures: Vec<String>,
}

impl FeasibilityLog {
    fn check(&mut self, tag: &str, k: usize, y: &SupportMatrix, x: &SupportMatrix) {
        for (name, m) in [("Y", y), ("X", x)] {
            self.checked += 1;
            if let Err(e) = m.validate() {
                self.failures.push(format!("{tag} k={k} {name}: {e}"));
            }
        }
    }
}

struct Run {
    result: SolveResult,
    supports: Vec<Vec<Option<usize>>>,
    iter_times: Vec<Duration>,
    wall: Duration,
}

fn run_solver<O: Objective>(
    obj: &O,
    x0: &SupportMatrix,
    opts: &SolverOptions,
    tag: &str,
    log: &mut FeasibilityLog,
) -> Run {
    let mut supports = Vec::new();
    let mut iter_times = Vec::new();
    let start = Instant::now();
    let mut last = start;
    let result = solve_with_observer(obj, x0, opts, |rec: &IterationRecord, y, x| {
        let now = Instant::now();
        iter_times.push(now - last);
        log.check(tag, rec.k, y, x);
        supports.push(x.sign().assignment().to_vec());
        last = Instant::now();
    })
    .unwrap();
    Run {
        result,
        supports,
        iter_times,
        wall: start.elapsed(),
    }
}

fn fuzz_eta(k: usize) -> f64 {
    [0.5, 1.0, 5.0][k % 3]
}

fn criterion_subproblem_oracle() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut worst_val: f64 = 0.0;
    let mut worst_x: f64 = 0.0;
    let mut worst_formula: f64 = 0.0;
    let mut value_fail = None;
    let mut formula_fail = None;
    let mut r = rng(1);
    for k in 0..500 {
        let n = r.gen_range(1..=6);
        let p = r.gen_range(1..=n.min(3));
        let z = random_point(&mut r, n, p, 0.3);
        let g = gaussian(&mut r, n, p, 1.5);
        let eta = fuzz_eta(k);
        let s = random_pattern(&mut r, n, p);
        let pd = ProxData::new(&z, &g, eta).unwrap();
        let sol = solve_fixed_support(&pd, &s).unwrap();
        let (oval, ox) = oracle_fixed_support(&pd, &s).unwrap();
        let dv = (sol.linval - oval).abs();
        let dx = max_abs_diff(&sol.x, &ox);
        worst_val = worst_val.max(dv);
        worst_x = worst_x.max(dx);
        if (dv > 1e-12 || dx > 1e-12) && value_fail.is_none() {
            value_fail = Some(format!(
                "instance {k}: value diff {dv:e}, entry diff {dx:e}"
            ));
        }

        let f_z: f64 = r.gen_range(-3.0..3.0);
        let lhs = proximal_value(&pd, &sol.x, f_z).unwrap();
        let rhs = f_z - z.dot_dense(&g) + eta * p as f64 + sol.alphas.iter().sum::<f64>();
        let df = (lhs - rhs).abs();
        worst_formula = worst_formula.max(df);
        if df > 1e-10 && formula_fail.is_none() {
            formula_fail = Some(format!("instance {k}: diff {df:e}"));
        }
    }
    let elapsed = start.elapsed();
    let first = match value_fail {
        Some(f) => Err(f),
        None if elapsed >= Duration::from_secs(5) => Err(format!("took {elapsed:?}")),
        None => Ok(format!(
            "500 instances, max value diff {worst_val:.1e}, max entry diff {worst_x:.1e}, {elapsed:.2?}"
        )),
    };
    let second = match formula_fail {
        Some(f) => Err(f),
        None => Ok(format!("500 instances, max diff {worst_formula:.1e}")),
    };
    (first, second)
}

fn criterion_fixed_eta_descent(log: &mut FeasibilityLog) -> Outcome {
    let configs = [
        (20, 8, 2),
        (30, 12, 3),
        (40, 15, 3),
        (50, 20, 4),
        (50, 10, 5),
    ];
    let mut iters = 0;
    let mut worst_margin = f64::INFINITY;
    for (idx, &(n, m, p)) in configs.iter().enumerate() {
        for seed in 0..4u64 {
            let inst = gen_planted_npca(n, m, p, 300 + seed).unwrap();
            let ata = inst.a.t_matmul(&inst.a).unwrap();
            let l = oracle_topk_eigs(&ata, 1).unwrap()[0];
            let eta = 1.1 * l;
            let obj = NpcaObjective::new(inst.a.clone());
            let x0 = gen_random_feasible(n, p, 1300 + seed).unwrap();
            let run = run_solver(&obj, &x0, &SolverOptions::fixed_eta(eta), "descent", log);
            let mut f_prev = run.result.trace.f_initial;
            for rec in &run.result.trace.records {
                let bound = 0.5 * (eta - l) * (rec.step_y.powi(2) + rec.step_x.powi(2));
                let margin = (f_prev - rec.f_value) - (bound - 1e-9);
                worst_margin = worst_margin.min(margin);
                if rec.f_value > f_prev || margin < 0.0 {
                    return Err(format!(
                        "config {idx} seed {seed} k={}: f {f_prev} -> {}, required decrease {bound:e}",
                        rec.k, rec.f_value
                    ));
                }
                f_prev = rec.f_value;
                iters += 1;
            }
        }
    }
    Ok(format!(
        "20 runs, {iters} iterations, smallest slack {worst_margin:.1e}"
    ))
}

struct PlantedRun {
    inst: PlantedNpca,
    run: Run,
}

fn planted_runs(p: usize, log: &mut FeasibilityLog) -> Vec<PlantedRun> {
    (0..20u64)
        .map(|seed| {
            let inst = gen_planted_npca(200, 50, p, seed).unwrap();
            let obj = NpcaObjective::new(inst.a.clone());
            let x0 = gen_random_feasible(200, p, seed + 1000).unwrap();
            let run = run_solver(&obj, &x0, &SolverOptions::default(), "planted", log);
            PlantedRun { inst, run }
        })
        .collect()
}

fn criterion_recovery(runs: &[(usize, Vec<PlantedRun>)]) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (p, rs) in runs {
        let mut hits = 0;
        let mut times: Vec<f64> = Vec::new();
        for r in rs {
            let gap = relative_gap(r.run.result.f_final, r.inst.f_opt);
            let dist = subspace_distance(&r.run.result.x_final, &r.inst.x_opt).unwrap();
            if gap <= 1e-6 && dist <= 1e-4 {
                hits += 1;
            }
            times.push(r.run.wall.as_secs_f64());
        }
        let med = median(&mut times);
        ok &= hits >= 16 && med < 1.0;
        lines.push(format!(
            "p={p}: {hits}/20 recovered, median {:.1} ms",
            med * 1e3
        ));
    }
    let msg = lines.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_support_identification(runs: &[(usize, Vec<PlantedRun>)]) -> Outcome {
    let mut converged = 0;
    let mut changed = Vec::new();
    for (p, rs) in runs {
        for (seed, r) in rs.iter().enumerate() {
            if r.run.result.status != Status::Converged {
                continue;
            }
            converged += 1;
            let s = &r.run.supports;
            let tail = &s[s.len().saturating_sub(10)..];
            if tail.iter().any(|t| t != &tail[0]) {
                let last = (1..s.len()).rev().find(|&k| s[k] != s[k - 1]).unwrap_or(0);
                changed.push(format!(
                    "p={p} seed {seed} (last change at iterate {} of {})",
                    last + 1,
                    s.len()
                ));
            }
        }
    }
    if changed.is_empty() {
        Ok(format!(
            "{converged} converged runs, support fixed over the last 10 iterates"
        ))
    } else {
        Err(format!(
            "{} of {converged} converged runs changed support in the last 10 iterates: {}",
            changed.len(),
            changed.join(", ")
        ))
    }
}

fn criterion_stationarity(runs: &[(usize, Vec<PlantedRun>)]) -> Outcome {
    let mut worst_run: f64 = 0.0;
    let mut worst_opt: f64 = 0.0;
    for (p, rs) in runs {
        for (seed, r) in rs.iter().enumerate() {
            let obj = NpcaObjective::new(r.inst.a.clone());
            let at_opt = residuals(&obj, &r.inst.x_opt).unwrap().epsilon;
            worst_opt = worst_opt.max(at_opt);
            if at_opt > 1e-8 {
                return Err(format!(
                    "p={p} seed {seed}: planted optimum epsilon {at_opt:e}"
                ));
            }
            if r.run.result.status == Status::Converged {
                let eps = r.run.result.residuals.epsilon;
                worst_run = worst_run.max(eps);
                if eps > 1e-3 {
                    return Err(format!("p={p} seed {seed}: converged with epsilon {eps:e}"));
                }
            }
        }
    }
    Ok(format!(
        "max epsilon {worst_run:.1e} on converged runs, {worst_opt:.1e} at planted optima"
    ))
}

fn criterion_iteration_scaling(log: &mut FeasibilityLog) -> Outcome {
    let mut medians = Vec::new();
    for n in [1000, 2000] {
        let mut times: Vec<f64> = Vec::new();
        let mut seed = 0u64;
        while times.len() < 50 || seed < 2 {
            let inst = gen_planted_npca(n, 100, 10, 500 + seed).unwrap();
            let obj = NpcaObjective::new(inst.a);
            let x0 = gen_random_feasible(n, 10, 1500 + seed).unwrap();
            let run = run_solver(&obj, &x0, &SolverOptions::default(), "scaling", log);
            times.extend(run.iter_times.iter().map(|d| d.as_secs_f64()));
            seed += 1;
        }
        let count = times.len();
        medians.push((n, median(&mut times), count));
    }
    let ratio = medians[1].1 / medians[0].1;
    let msg = format!(
        "median per-iteration {:.3} ms (n=1000, {} iters) vs {:.3} ms (n=2000, {} iters), ratio {ratio:.2}",
        medians[0].1 * 1e3,
        medians[0].2,
        medians[1].1 * 1e3,
        medians[1].2
    );
    if ratio <= 3.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_gradients() -> Outcome {
    let mut r = rng(9);
    let mut worst = [0.0f64; 4];
    for k in 0..20 {
        let n = r.gen_range(4..=10);
        let p = r.gen_range(1..=3.min(n));
        let m = r.gen_range(3..=8);
        let x = random_point(&mut r, n, p, 0.2);
        let errs = [
            fd_gradient_check(
                &NpcaObjective::new(gaussian(&mut r, m, n, 1.0)),
                &x,
                FD_STEP,
            ),
            fd_gradient_check(
                &OnmfObjective::new(gaussian(&mut r, n, m, 1.0)),
                &x,
                FD_STEP,
            ),
            fd_gradient_check(
                &CommunityObjective::new(symmetric(&mut r, n)).unwrap(),
                &x,
                FD_STEP,
            ),
            fd_gradient_check(
                &LinearObjective::new(gaussian(&mut r, n, p, 1.0)),
                &x,
                FD_STEP,
            ),
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            let e = e.unwrap();
            *w = w.max(e);
        }
        if worst.iter().any(|&w| w > 1e-5) {
            return Err(format!("instance {k}: errors {worst:?}"));
        }
    }
    Ok(format!(
        "max errors npca {:.1e}, onmf {:.1e}, community {:.1e}, linear {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn brute_force_hits(t: &ContingencyTable) -> u64 {
    fn rec(t: &ContingencyTable, i: usize, used: &mut Vec<bool>) -> u64 {
        let p = t.p();
        if i == p {
            return 0;
        }
        let mut best = 0;
        for j in 0..p {
            if !used[j] {
                used[j] = true;
                best = best.max(t.count(i, j) + rec(t, i + 1, used));
                used[j] = false;
            }
        }
        best
    }
    rec(t, 0, &mut vec![false; t.p()])
}

fn criterion_metrics() -> Outcome {
    let perfect = ClusterAssignment::from_labels(&[0, 0, 1, 1, 2, 2]);
    let relabeled = ClusterAssignment::from_labels(&[2, 2, 0, 0, 1, 1]);
    let exact = [
        entropy(&perfect, &relabeled, 3).unwrap() == 0.0,
        purity(&perfect, &relabeled, 3).unwrap() == 1.0,
        nmi(&perfect, &perfect, 3).unwrap() == 1.0,
        accuracy(&perfect, &relabeled, 3).unwrap() == 1.0,
    ];
    if exact.iter().any(|ok| !ok) {
        return Err(format!("perfect clustering checks {exact:?}"));
    }
    let c = ClusterAssignment::from_labels(&[0, 0, 1, 1]);
    let t = ClusterAssignment::from_labels(&[0, 1, 0, 1]);
    let crossed = (
        entropy(&c, &t, 2).unwrap(),
        purity(&c, &t, 2).unwrap(),
        nmi(&c, &t, 2).unwrap(),
    );
    if (crossed.0 - 1.0).abs() > 1e-12 || (crossed.1 - 0.5).abs() > 1e-12 || crossed.2.abs() > 1e-12
    {
        return Err(format!("crossed example gave {crossed:?}"));
    }
    let mut r = rng(10);
    for k in 0..100 {
        let p = r.gen_range(2..=5);
        let n = r.gen_range(5..=40);
        let pred: Vec<usize> = (0..n).map(|_| r.gen_range(0..p)).collect();
        let truth: Vec<usize> = (0..n).map(|_| r.gen_range(0..p)).collect();
        let (pred, truth) = (
            ClusterAssignment::from_labels(&pred),
            ClusterAssignment::from_labels(&truth),
        );
        let table = ContingencyTable::new(&pred, &truth, p).unwrap();
        let perm = best_matching(&table);
        let hits: u64 = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| table.count(i, j))
            .sum();
        let brute = brute_force_hits(&table);
        if hits != brute {
            return Err(format!("table {k}: matching {hits} vs enumeration {brute}"));
        }
    }
    Ok("exact cases hold; matching equals enumeration on 100 tables".into())
}

fn criterion_sweep_oracle() -> Outcome {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    let mut swept = 0;
    for k in 0..200 {
        let n = r.gen_range(2..=12);
        let p = r.gen_range(1..=n.min(4));
        let y = random_point(&mut r, n, p, 0.25);
        let g = gaussian(&mut r, n, p, 1.5);
        let eta = fuzz_eta(k);
        let delta = [0.1, 0.3, 0.6][k % 3];
        let f_y = 0.0;
        let fast = relocation_step(&y, f_y, &g, eta, delta).unwrap();
        let slow = oracle_sweep(&y, &g, eta, delta).unwrap();
        swept += fast.evaluated;
        if !fast.x.same_support(&slow) {
            return Err(format!("instance {k}: supports differ"));
        }
        let d = max_abs_diff(&fast.x, &slow);
        worst = worst.max(d);
        if d > 1e-10 {
            return Err(format!("instance {k}: values differ by {d:e}"));
        }
    }
    Ok(format!(
        "200 instances, {swept} rows evaluated, max value diff {worst:.1e}"
    ))
}

fn main() {
    let mut log = FeasibilityLog::default();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    let (c1, c2) = criterion_subproblem_oracle();
    results.push((1, "fixed-support subproblem matches enumeration", c1));
    results.push((2, "closed-form optimal value", c2));
    results.push((
        3,
        "sufficient descent with fixed eta",
        criterion_fixed_eta_descent(&mut log),
    ));

    let planted: Vec<(usize, Vec<PlantedRun>)> = [3, 5]
        .into_iter()
        .map(|p| (p, planted_runs(p, &mut log)))
        .collect();
    results.push((
        5,
        "planted NPCA recovery (n=200, m=50)",
        criterion_recovery(&planted),
    ));
    results.push((
        6,
        "per-iteration cost scaling",
        criterion_iteration_scaling(&mut log),
    ));
    results.push((
        7,
        "support identification",
        criterion_support_identification(&planted),
    ));
    results.push((
        8,
        "stationarity residuals",
        criterion_stationarity(&planted),
    ));
    results.push((9, "gradients vs finite differences", criterion_gradients()));
    results.push((10, "clustering metrics", criterion_metrics()));
    results.push((
        11,
        "relocation sweep matches replay",
        criterion_sweep_oracle(),
    ));

    let feas = if log.failures.is_empty() {
        Ok(format!("{} iterates validated", log.checked))
    } else {
        Err(format!(
            "{} failures, first: {}",
            log.failures.len(),
            log.failures[0]
        ))
    };
    results.push((4, "feasibility of every iterate", feas));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
