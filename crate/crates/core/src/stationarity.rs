//! First-order stationarity measures.
//!
//! `X` is an `epsilon`-approximate first-order stationary point when
//! `|grad f(X)_ij| <= epsilon` on `supp(X)` and `∇f(X)_ij >= -epsilon` on every
//! zero row, where `grad f(X) = ∇f(X) - X Diag(X^T ∇f(X))`.

use alloc::vec;

use crate::objective::Objective;
use crate::{DenseMatrix, Error, Result, SupportMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub supp_residual: f64,
    pub zrow_residual: f64,
    pub epsilon: f64,
}

/// `∇f - X Diag(X^T ∇f)`, using only the support of `x` for the diagonal.
pub fn riemannian_gradient(x: &SupportMatrix, grad: &DenseMatrix) -> Result<DenseMatrix> {
    if grad.shape() != x.shape() {
        return Err(Error::ShapeMismatch {
            expected: x.shape(),
            found: grad.shape(),
        });
    }
    let diag = column_inner(x, grad);
    let mut out = grad.clone();
    for (i, e) in x.entries().iter().enumerate() {
        if let Some(e) = e {
            out[(i, e.col)] -= e.val * diag[e.col];
        }
    }
    Ok(out)
}

/// `diag(X^T G)`.
fn column_inner(x: &SupportMatrix, g: &DenseMatrix) -> alloc::vec::Vec<f64> {
    let mut diag = vec![0.0; x.n_cols()];
    for (i, e) in x.entries().iter().enumerate() {
        if let Some(e) = e {
            diag[e.col] += e.val * g[(i, e.col)];
        }
    }
    diag
}

/// Residuals from an already computed Euclidean gradient.
pub fn residuals_from_gradient(x: &SupportMatrix, grad: &DenseMatrix) -> Result<ResidualReport> {
    let rg = riemannian_gradient(x, grad)?;
    let mut supp: f64 = 0.0;
    let mut zrow: f64 = 0.0;
    for (i, e) in x.entries().iter().enumerate() {
        match e {
            Some(e) => supp = supp.max(rg[(i, e.col)].abs()),
            None => {
                for &g in grad.row(i) {
                    zrow = zrow.max(-g);
                }
            }
        }
    }
    Ok(ResidualReport {
        supp_residual: supp,
        zrow_residual: zrow,
        epsilon: supp.max(zrow),
    })
}

pub fn residuals<O: Objective + ?Sized>(obj: &O, x: &SupportMatrix) -> Result<ResidualReport> {
    let g = obj.gradient(x)?;
    residuals_from_gradient(x, &g)
}
