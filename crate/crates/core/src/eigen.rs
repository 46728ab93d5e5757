//! Symmetric eigensolvers: cyclic Jacobi for small dense matrices and block
//! subspace iteration with Rayleigh-Ritz for the leading eigenpairs of larger
//! operators.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{DenseMatrix, Error, Result};

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymEigen {
    /// Keeps the leading `k` pairs.
    pub fn truncate(mut self, k: usize) -> Self {
        let n = self.vectors.rows();
        let k = k.min(self.values.len());
        self.values.truncate(k);
        let mut v = DenseMatrix::zeros(n, k);
        for i in 0..n {
            v.row_mut(i).copy_from_slice(&self.vectors.row(i)[..k]);
        }
        self.vectors = v;
        self
    }
}

/// A symmetric linear operator applied to blocks of column vectors.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// `M * v` for an `dim() x b` block `v`.
    fn apply(&self, v: &DenseMatrix) -> DenseMatrix;
    /// An upper bound on the spectral radius.
    fn norm_bound(&self) -> f64;
    /// A `sigma >= 0` with `M + sigma I` positive semidefinite.
    fn psd_shift(&self) -> f64 {
        self.norm_bound()
    }
}

impl SymmetricOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, v: &DenseMatrix) -> DenseMatrix {
        self.matmul(v).expect("operator and block shapes agree")
    }

    fn norm_bound(&self) -> f64 {
        (0..self.rows())
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn psd_shift(&self) -> f64 {
        let lower = (0..self.rows())
            .map(|i| {
                let off: f64 =
                    self.row(i).iter().map(|x| x.abs()).sum::<f64>() - self[(i, i)].abs();
                self[(i, i)] - off
            })
            .fold(f64::INFINITY, f64::min);
        (-lower).max(0.0)
    }
}

/// `A A^T` for an `n x m` matrix `A`, never formed explicitly.
#[derive(Debug, Clone, Copy)]
pub struct GramOperator<'a>(pub &'a DenseMatrix);

impl SymmetricOperator for GramOperator<'_> {
    fn dim(&self) -> usize {
        self.0.rows()
    }

    fn apply(&self, v: &DenseMatrix) -> DenseMatrix {
        let atv = self.0.t_matmul(v).expect("shapes agree");
        self.0.matmul(&atv).expect("shapes agree")
    }

    fn norm_bound(&self) -> f64 {
        let f = self.0.frobenius_norm();
        f * f
    }

    fn psd_shift(&self) -> f64 {
        0.0
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// All eigenpairs of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns whatever the rotations reached after the sweep budget; only
/// non-finite results are reported as failures.
pub fn jacobi_eigen(m: &DenseMatrix) -> Result<SymEigen> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::InvalidShape("eigensolver needs a square matrix"));
    }
    if !m.is_finite() {
        return Err(Error::EigFailure("input is not finite"));
    }
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);
    let scale = m.frobenius_norm();
    let target = 1e-15 * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if libm::sqrt(off) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    if !a.is_finite() || !v.is_finite() {
        return Err(Error::EigFailure("rotations produced non-finite values"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for (k, &i) in order.iter().enumerate() {
            vectors[(r, k)] = v[(r, i)];
        }
    }
    Ok(SymEigen { values, vectors })
}

fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Modified Gram-Schmidt applied twice. Columns that collapse below `1e-12`
/// relative to their original norm are zeroed; returns the number kept.
pub fn orthonormalize_columns(m: &mut DenseMatrix) -> usize {
    let (n, b) = m.shape();
    let mut rank = 0;
    for j in 0..b {
        let original = libm::sqrt((0..n).map(|i| m[(i, j)] * m[(i, j)]).sum());
        for _ in 0..2 {
            for k in 0..j {
                let dot: f64 = (0..n).map(|i| m[(i, j)] * m[(i, k)]).sum();
                for i in 0..n {
                    m[(i, j)] -= dot * m[(i, k)];
                }
            }
        }
        let norm = libm::sqrt((0..n).map(|i| m[(i, j)] * m[(i, j)]).sum());
        if norm <= 1e-12 * original || norm == 0.0 {
            for i in 0..n {
                m[(i, j)] = 0.0;
            }
        } else {
            for i in 0..n {
                m[(i, j)] /= norm;
            }
            rank += 1;
        }
    }
    rank
}

/// Options for [`top_eigenpairs`].
#[derive(Debug, Clone, Copy)]
pub struct SubspaceOptions {
    pub max_iters: usize,
    /// Residual target `||M v - lambda v|| <= rel_tol * norm_bound`.
    pub rel_tol: f64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            rel_tol: 1e-10,
        }
    }
}

/// Leading `k` eigenpairs (largest algebraic eigenvalues) of `op`.
///
/// Block power iteration on `M + sigma I` with a Gershgorin-type shift that
/// makes the operator positive semidefinite, followed by Rayleigh-Ritz on each
/// iterate. Best effort: when the budget runs out the current Ritz pairs are
/// returned.
pub fn top_eigenpairs<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: SubspaceOptions,
) -> Result<SymEigen> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidShape("need 1 <= k <= dimension"));
    }
    let b = n.min(k + k.max(6));
    let bound = op.norm_bound();
    let shift = op.psd_shift();
    if !bound.is_finite() {
        return Err(Error::EigFailure("operator is not finite"));
    }
    if bound == 0.0 {
        let mut vectors = DenseMatrix::zeros(n, k);
        for j in 0..k {
            vectors[(j, j)] = 1.0;
        }
        return Ok(SymEigen {
            values: vec![0.0; k],
            vectors,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = DenseMatrix::zeros(n, b);
    for x in q.as_mut_slice() {
        *x = StandardNormal.sample(&mut rng);
    }
    orthonormalize_columns(&mut q);

    let mut ritz = SymEigen {
        values: vec![0.0; b],
        vectors: q.clone(),
    };
    for _ in 0..opts.max_iters {
        let mq = op.apply(&q);
        ritz = rayleigh_ritz(&q, &mq)?;
        let mv = op.apply(&ritz.vectors);
        let mut worst: f64 = 0.0;
        for j in 0..k {
            let mut r = 0.0;
            for i in 0..n {
                let d = mv[(i, j)] - ritz.values[j] * ritz.vectors[(i, j)];
                r += d * d;
            }
            worst = worst.max(libm::sqrt(r));
        }
        if worst <= opts.rel_tol * bound {
            break;
        }
        // Shifted power step on the rotated basis.
        q = mv;
        for i in 0..n {
            for j in 0..b {
                q[(i, j)] += shift * ritz.vectors[(i, j)];
            }
        }
        orthonormalize_columns(&mut q);
        if !q.is_finite() {
            return Err(Error::EigFailure("subspace iteration diverged"));
        }
    }
    Ok(ritz.truncate(k))
}

fn rayleigh_ritz(q: &DenseMatrix, mq: &DenseMatrix) -> Result<SymEigen> {
    let mut h = q.t_matmul(mq)?;
    let b = h.rows();
    for i in 0..b {
        for j in (i + 1)..b {
            let s = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = s;
            h[(j, i)] = s;
        }
    }
    let small = jacobi_eigen(&h)?;
    Ok(SymEigen {
        values: small.values,
        vectors: q.matmul(&small.vectors)?,
    })
}

/// Leading `k` eigenpairs, dispatching to Jacobi for small dimensions.
pub fn leading_eigenpairs<O: SymmetricOperator + ?Sized>(op: &O, k: usize) -> Result<SymEigen> {
    let n = op.dim();
    if n <= JACOBI_DENSE_MAX {
        let mut dense = op.apply(&DenseMatrix::identity(n));
        // Symmetrize away rounding from implicit operators.
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (dense[(i, j)] + dense[(j, i)]);
                dense[(i, j)] = s;
                dense[(j, i)] = s;
            }
        }
        if k == 0 || k > n {
            return Err(Error::InvalidShape("need 1 <= k <= dimension"));
        }
        Ok(jacobi_eigen(&dense)?.truncate(k))
    } else {
        top_eigenpairs(op, k, SubspaceOptions::default())
    }
}

/// Largest dimension handled by dense Jacobi in [`leading_eigenpairs`].
pub const JACOBI_DENSE_MAX: usize = 200;
