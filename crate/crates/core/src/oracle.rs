//! Brute-force reference implementations for tests. Enabled by the `oracle`
//! feature; nothing in the solver calls into this module.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::solver::build_zero_row_sign;
use crate::subproblem::{solve_fixed_support, ProxData};
use crate::{DenseMatrix, Error, Result, SignPattern, SupportMatrix};

const MAX_ROWS: usize = 12;
const MAX_COLS: usize = 4;
const MAX_EIG_DIM: usize = 400;

fn guard(n: usize, p: usize) -> Result<()> {
    if n > MAX_ROWS || p > MAX_COLS {
        return Err(Error::GuardExceeded("oracle limited to n <= 12, p <= 4"));
    }
    Ok(())
}

/// Minimizes `<x, ∇f(Z) - eta Z>` column by column over the finite candidate
/// set `{W_j / ||W_j||} ∪ {e_i : i assigned to j}`, evaluating every candidate
/// directly from `Z` and the gradient.
///
/// Returns `(sum of column minima, minimizer)`.
pub fn oracle_fixed_support(pd: &ProxData<'_>, s: &SignPattern) -> Result<(f64, SupportMatrix)> {
    let z = pd.z();
    let g = pd.grad();
    let eta = pd.eta();
    let (n, p) = z.shape();
    guard(n, p)?;
    if s.n_rows() != n || s.n_cols() != p {
        return Err(Error::ShapeMismatch {
            expected: (n, p),
            found: (s.n_rows(), s.n_cols()),
        });
    }
    let mut entries: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut total = 0.0;
    for j in 0..p {
        let rows: Vec<usize> = (0..n).filter(|&i| s.col_of(i) == Some(j)).collect();
        if rows.is_empty() {
            return Err(Error::EmptyColumnInPattern(j));
        }
        // c_i = [∇f(Z) - eta Z]_ij
        let c: Vec<f64> = rows
            .iter()
            .map(|&i| g[(i, j)] - eta * z.get(i, j))
            .collect();
        let w: Vec<f64> = c.iter().map(|&ci| (-ci).max(0.0)).collect();
        let w_norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();

        let mut candidates: Vec<Vec<f64>> = Vec::new();
        if w_norm > 0.0 {
            candidates.push(w.iter().map(|x| x / w_norm).collect());
        }
        for k in 0..rows.len() {
            let mut e = vec![0.0; rows.len()];
            e[k] = 1.0;
            candidates.push(e);
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for cand in candidates {
            let val: f64 = cand.iter().zip(&c).map(|(x, ci)| x * ci).sum();
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, cand));
            }
        }
        let (val, col) = best.expect("column has candidates");
        total += val;
        for (k, &i) in rows.iter().enumerate() {
            if col[k] > 0.0 {
                entries[i] = Some((j, col[k]));
            }
        }
    }
    Ok((total, SupportMatrix::from_raw(n, p, entries)?))
}

/// The relocation sweep replayed with a from-scratch subproblem solve for
/// every row and every target column.
pub fn oracle_sweep(
    y: &SupportMatrix,
    grad_y: &DenseMatrix,
    eta: f64,
    delta: f64,
) -> Result<SupportMatrix> {
    let (n, p) = y.shape();
    guard(n, p)?;
    let pd = ProxData::new(y, grad_y, eta)?;

    let min = y
        .entries()
        .iter()
        .flatten()
        .map(|e| e.val)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::AllRowsZero);
    }
    let delta_k = delta.max(min);
    let pins = build_zero_row_sign(y, grad_y);

    let mut current = y.clone();
    for u in 0..n {
        let Some(e) = y.entry(u) else { continue };
        if e.val > delta_k {
            continue;
        }
        if let Some(c) = current.col_of(u) {
            let in_col = (0..n).filter(|&i| current.col_of(i) == Some(c)).count();
            if in_col == 1 {
                continue;
            }
        }
        let mut best: Option<(f64, SupportMatrix)> = None;
        for v in 0..p {
            let assignment = (0..n)
                .map(|i| {
                    if i == u {
                        Some(v)
                    } else if y.col_of(i).is_none() {
                        pins.col_of(i)
                    } else {
                        current.col_of(i)
                    }
                })
                .collect();
            let pattern = SignPattern::from_raw(p, assignment)?;
            let sol = match solve_fixed_support(&pd, &pattern) {
                Ok(sol) => sol,
                Err(Error::EmptyColumnInPattern(_)) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|(b, _)| sol.linval < *b) {
                best = Some((sol.linval, sol.x));
            }
        }
        current = best.expect("staying in place is always feasible").1;
    }
    Ok(current)
}

/// Eigenvalues (descending) and eigenvectors of a symmetric matrix from
/// nalgebra's dense solver, with every residual checked.
pub fn oracle_eigs(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::InvalidShape(
            "oracle eigensolver needs a square matrix",
        ));
    }
    if n > MAX_EIG_DIM {
        return Err(Error::GuardExceeded(
            "oracle eigensolver limited to n <= 400",
        ));
    }
    let a = DMatrix::from_row_slice(n, n, m.as_slice());
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let mut vectors = DenseMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let lambda = eig.eigenvalues[i];
        if (&a * v - v * lambda).norm() > 1e-8 * scale {
            return Err(Error::EigFailure("oracle residual too large"));
        }
        values.push(lambda);
        for r in 0..n {
            vectors[(r, k)] = v[r];
        }
    }
    Ok((values, vectors))
}

/// The `k` largest eigenvalues of a symmetric matrix, descending.
pub fn oracle_topk_eigs(m: &DenseMatrix, k: usize) -> Result<Vec<f64>> {
    if !m.is_symmetric(1e-12 * m.max_abs().max(1.0)) {
        return Err(Error::InvalidShape(
            "oracle eigensolver needs a symmetric matrix",
        ));
    }
    let (mut values, _) = oracle_eigs(m)?;
    values.truncate(k);
    Ok(values)
}
