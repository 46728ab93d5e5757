//! The support-set iteration.
//!
//! Each iteration computes `Y_k` by solving the proximal subproblem at `X_k`
//! on the current support plus one activated column per zero row. If `Y_k`
//! moved at least `theta`, it becomes `X_{k+1}`. Otherwise the rows of `Y_k`
//! with small entries are swept in order, each one tentatively moved to every
//! column, keeping the column with the lowest proximal value; the result of
//! the sweep is `X_{k+1}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::objective::Objective;
use crate::stationarity::{residuals_from_gradient, ResidualReport};
use crate::subproblem::{solve_fixed_support, ColumnState, ProxData};
use crate::{DenseMatrix, Error, Result, SignPattern, SupportMatrix};

/// How the proximal parameter is chosen after the first iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepsize {
    /// `|<ΔX, ΔG>| / ||ΔX||²`, clamped to `eta_bounds`.
    BarzilaiBorwein,
    /// A constant proximal parameter for every iteration.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Rows with entries at most `max(delta, min nonzero entry)` are swept.
    pub delta: f64,
    /// The sweep runs only when `||Y_k - X_k|| < theta`.
    pub theta: f64,
    /// Stop once `||X_{k+1} - X_k|| <= tol`.
    pub tol: f64,
    pub max_iters: usize,
    pub eta0: f64,
    pub eta_bounds: (f64, f64),
    pub stepsize: Stepsize,
    /// Seed for randomized starting points built by callers.
    pub seed: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            delta: 0.1,
            theta: 1e-2,
            tol: 1e-6,
            max_iters: 1000,
            eta0: 1.0,
            eta_bounds: (1e-10, 1e10),
            stepsize: Stepsize::BarzilaiBorwein,
            seed: None,
        }
    }
}

impl SolverOptions {
    pub fn fixed_eta(eta: f64) -> Self {
        Self {
            stepsize: Stepsize::Fixed(eta),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidOptions("delta must lie in (0, 1)"));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::InvalidOptions("theta must be positive"));
        }
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidOptions("tol must be nonnegative"));
        }
        let (lo, hi) = self.eta_bounds;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidOptions(
                "eta bounds must satisfy 0 < min <= max",
            ));
        }
        if !(self.eta0 >= lo && self.eta0 <= hi) {
            return Err(Error::InvalidOptions("eta0 must lie within eta bounds"));
        }
        if let Stepsize::Fixed(eta) = self.stepsize {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(Error::InvalidOptions("fixed eta must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    KeptSupport,
    Relocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// `f(X_{k+1})`.
    pub f_value: f64,
    /// `||Y_k - X_k||`.
    pub step_y: f64,
    /// `||X_{k+1} - Y_k||`.
    pub step_x: f64,
    pub eta: f64,
    pub branch: Branch,
    /// Rows visited by the sweep, 0 when the support was kept.
    pub r_k: usize,
    /// Rows whose column (or emptiness) differs between `X_k` and `X_{k+1}`.
    pub support_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveTrace {
    /// `f(X_0)`.
    pub f_initial: f64,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x_final: SupportMatrix,
    pub f_final: f64,
    pub iterations: usize,
    pub status: Status,
    pub trace: SolveTrace,
    pub residuals: ResidualReport,
}

/// `sign(x)` with every zero row assigned to the first column attaining the
/// minimum of its gradient row.
pub fn build_zero_row_sign(x: &SupportMatrix, grad: &DenseMatrix) -> SignPattern {
    let assignment = (0..x.n_rows())
        .map(|i| x.col_of(i).or_else(|| Some(argmin_first(grad.row(i)))))
        .collect();
    SignPattern::from_raw(x.n_cols(), assignment).expect("argmin is a valid column")
}

fn argmin_first(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v < row[best] {
            best = j;
        }
    }
    best
}

/// `Y_k` from `X_k` and `∇f(X_k)`.
pub fn zero_row_step_with_grad(
    x_k: &SupportMatrix,
    grad: &DenseMatrix,
    eta: f64,
) -> Result<SupportMatrix> {
    let pd = ProxData::new(x_k, grad, eta)?;
    let s = build_zero_row_sign(x_k, grad);
    Ok(solve_fixed_support(&pd, &s)?.x)
}

/// `(Y_k, f(Y_k))`.
pub fn zero_row_step<O: Objective + ?Sized>(
    obj: &O,
    x_k: &SupportMatrix,
    eta: f64,
) -> Result<(SupportMatrix, f64)> {
    let g = obj.gradient(x_k)?;
    let y = zero_row_step_with_grad(x_k, &g, eta)?;
    let f = obj.value(&y)?;
    Ok((y, f))
}

/// `delta_k = max(delta, min nonzero entry)` and the nonzero rows with
/// entries at most `delta_k`, in increasing row order.
pub fn small_rows(y: &SupportMatrix, delta: f64) -> Result<(f64, Vec<usize>)> {
    let min = y
        .entries()
        .iter()
        .flatten()
        .map(|e| e.val)
        .fold(f64::INFINITY, f64::min);
    if min == f64::INFINITY {
        return Err(Error::AllRowsZero);
    }
    let delta_k = delta.max(min);
    let rows = y
        .entries()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.filter(|e| e.val <= delta_k).map(|_| i))
        .collect();
    Ok((delta_k, rows))
}

/// Outcome of [`relocation_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct Relocation {
    pub x: SupportMatrix,
    pub delta_k: f64,
    /// The swept rows `u^(1), ..., u^(r_k)`.
    pub rows: Vec<usize>,
    /// Rows that were evaluated rather than skipped.
    pub evaluated: usize,
    /// Proximal value of `x` around `Y_k`.
    pub prox_value: f64,
}

/// The relocation sweep around `y` with gradient `grad_y = ∇f(y)`.
///
/// Rows of `y` that are zero stay pinned to their most negative gradient
/// column for the whole sweep. A swept row is skipped when it is the only
/// nonzero of its column. Otherwise every target column is scored from the
/// per-column sums, the first column with the lowest proximal value wins, and
/// the assignment is updated in place; the point is materialized once at the
/// end.
pub fn relocation_step(
    y: &SupportMatrix,
    f_y: f64,
    grad_y: &DenseMatrix,
    eta: f64,
    delta: f64,
) -> Result<Relocation> {
    let pd = ProxData::new(y, grad_y, eta)?;
    let (delta_k, rows) = small_rows(y, delta)?;
    let p = y.n_cols();
    let pinned: Vec<bool> = y.entries().iter().map(|e| e.is_none()).collect();
    let mut st = ColumnState::build(&pd, &build_zero_row_sign(y, grad_y));

    let mut y_count = vec![0usize; p];
    for e in y.entries().iter().flatten() {
        y_count[e.col] += 1;
    }

    let mut pruned = false;
    let mut evaluated = 0;
    let mut base = vec![0.0; p];
    for &u in &rows {
        let sole = if pruned {
            st.col_of(u)
                .is_some_and(|c| is_sole_nonzero(&mut st, &pd, u, c))
        } else {
            y.col_of(u).is_some_and(|c| y_count[c] == 1)
        };
        if sole {
            continue;
        }
        evaluated += 1;
        st.detach(&pd, u);
        for (j, b) in base.iter_mut().enumerate() {
            *b = st.alpha(&pd, j);
            debug_assert!(b.is_finite(), "column {j} emptied by the sweep");
        }
        let mut best_v = 0;
        let mut best_delta = f64::INFINITY;
        for (v, b) in base.iter().enumerate() {
            let d = st.alpha_with(&pd, u, v) - b;
            if d < best_delta {
                best_delta = d;
                best_v = v;
            }
        }

        let was_positive = st.is_positive(best_v);
        let old_best = if was_positive {
            None
        } else {
            st.best_neg(&pd, best_v).map(|(r, _)| r)
        };
        st.attach(&pd, u, best_v);
        if pruned {
            for r in [Some(u), old_best].into_iter().flatten() {
                drop_if_zero(&mut st, &pd, r, best_v, &pinned);
            }
        } else {
            for j in 0..p {
                let members: Vec<usize> = st.members(j).to_vec();
                for r in members {
                    drop_if_zero(&mut st, &pd, r, j, &pinned);
                }
            }
            pruned = true;
        }
    }

    if evaluated == 0 {
        return Ok(Relocation {
            x: y.clone(),
            delta_k,
            rows,
            evaluated,
            prox_value: f_y,
        });
    }
    let sol = solve_fixed_support(&pd, &st.pattern()?)?;
    Ok(Relocation {
        prox_value: pd.value_offset(f_y) + sol.linval,
        x: sol.x,
        delta_k,
        rows,
        evaluated,
    })
}

/// Whether `u` (assigned to `c`) is the only nonzero entry of column `c` in
/// the solution the state describes.
fn is_sole_nonzero(st: &mut ColumnState, pd: &ProxData<'_>, u: usize, c: usize) -> bool {
    if st.is_positive(c) {
        pd.d(u, c) > 0.0 && st.positive_count(c) == 1
    } else {
        st.best_neg(pd, c).is_some_and(|(r, _)| r == u)
    }
}

/// Unassigns `r` from column `j` when the column's solution puts a zero there.
fn drop_if_zero(st: &mut ColumnState, pd: &ProxData<'_>, r: usize, j: usize, pinned: &[bool]) {
    if pinned[r] || st.col_of(r) != Some(j) {
        return;
    }
    let zero = if st.is_positive(j) {
        pd.d(r, j) <= 0.0
    } else {
        st.best_neg(pd, j).is_some_and(|(b, _)| b != r)
    };
    if zero {
        st.detach(pd, r);
    }
}

/// Barzilai-Borwein parameter `|<ΔX, ΔG>| / ||ΔX||²`, clamped to `bounds`.
/// Falls back to `prev` when `ΔX = 0` or the ratio is not finite.
pub fn bb_stepsize(
    x_prev: &SupportMatrix,
    x_curr: &SupportMatrix,
    g_prev: &DenseMatrix,
    g_curr: &DenseMatrix,
    bounds: (f64, f64),
    prev: f64,
) -> f64 {
    let mut inner = 0.0;
    let mut norm_sq = 0.0;
    for (i, (a, b)) in x_prev.entries().iter().zip(x_curr.entries()).enumerate() {
        let mut add = |col: usize, dx: f64| {
            inner += dx * (g_curr[(i, col)] - g_prev[(i, col)]);
            norm_sq += dx * dx;
        };
        match (a, b) {
            (Some(a), Some(b)) if a.col == b.col => add(a.col, b.val - a.val),
            _ => {
                if let Some(a) = a {
                    add(a.col, -a.val);
                }
                if let Some(b) = b {
                    add(b.col, b.val);
                }
            }
        }
    }
    if norm_sq == 0.0 {
        return prev;
    }
    let eta = inner.abs() / norm_sq;
    if !eta.is_finite() {
        return prev;
    }
    eta.clamp(bounds.0, bounds.1)
}

pub fn solve<O: Objective + ?Sized>(
    obj: &O,
    x0: &SupportMatrix,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    solve_with_observer(obj, x0, opts, |_, _, _| {})
}

/// [`solve`], calling `observe(record, Y_k, X_{k+1})` after every iteration.
pub fn solve_with_observer<O, F>(
    obj: &O,
    x0: &SupportMatrix,
    opts: &SolverOptions,
    mut observe: F,
) -> Result<SolveResult>
where
    O: Objective + ?Sized,
    F: FnMut(&IterationRecord, &SupportMatrix, &SupportMatrix),
{
    opts.validate()?;
    x0.validate()
        .map_err(|e| Error::InvalidInitialPoint(alloc::boxed::Box::new(e)))?;
    obj.check_shape(x0.n_rows(), x0.n_cols())?;

    let mut x = x0.clone();
    let mut f_x = obj.value(&x)?;
    let mut g = obj.gradient(&x)?;
    let mut eta = match opts.stepsize {
        Stepsize::Fixed(e) => e,
        Stepsize::BarzilaiBorwein => opts.eta0,
    };
    let mut prev: Option<(SupportMatrix, DenseMatrix)> = None;
    let mut trace = SolveTrace {
        f_initial: f_x,
        records: Vec::new(),
    };
    let mut status = Status::MaxIters;

    for k in 0..opts.max_iters {
        if let (Stepsize::BarzilaiBorwein, Some((xp, gp))) = (opts.stepsize, &prev) {
            eta = bb_stepsize(xp, &x, gp, &g, opts.eta_bounds, eta);
        }
        let y = zero_row_step_with_grad(&x, &g, eta)?;
        let step_y = y.frob_dist(&x)?;
        let f_y = obj.value(&y)?;

        let (x_next, f_next, g_next, branch, r_k) = if step_y >= opts.theta {
            let g_y = obj.gradient(&y)?;
            (y.clone(), f_y, g_y, Branch::KeptSupport, 0)
        } else {
            let g_y = obj.gradient(&y)?;
            let reloc = relocation_step(&y, f_y, &g_y, eta, opts.delta)?;
            let r_k = reloc.rows.len();
            if reloc.x == y {
                (reloc.x, f_y, g_y, Branch::Relocation, r_k)
            } else {
                let f = obj.value(&reloc.x)?;
                let g = obj.gradient(&reloc.x)?;
                (reloc.x, f, g, Branch::Relocation, r_k)
            }
        };
        let step_x = x_next.frob_dist(&y)?;
        let support_changes = x
            .entries()
            .iter()
            .zip(x_next.entries())
            .filter(|(a, b)| a.map(|e| e.col) != b.map(|e| e.col))
            .count();
        let record = IterationRecord {
            k,
            f_value: f_next,
            step_y,
            step_x,
            eta,
            branch,
            r_k,
            support_changes,
        };
        observe(&record, &y, &x_next);
        trace.records.push(record);

        let moved = x_next.frob_dist(&x)?;
        prev = Some((
            core::mem::replace(&mut x, x_next),
            core::mem::replace(&mut g, g_next),
        ));
        f_x = f_next;
        if moved <= opts.tol {
            status = Status::Converged;
            break;
        }
    }

    let residuals = residuals_from_gradient(&x, &g)?;
    Ok(SolveResult {
        iterations: trace.records.len(),
        x_final: x,
        f_final: f_x,
        status,
        trace,
        residuals,
    })
}
