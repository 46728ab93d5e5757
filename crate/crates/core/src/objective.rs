//! Objective contract and the built-in objectives.
//!
//! Every objective evaluates on a [`SupportMatrix`] using its one-entry-per-row
//! structure, and also on arbitrary dense input so that gradients can be
//! checked against central finite differences.

use alloc::vec::Vec;

use crate::{DenseMatrix, Error, Result, SupportMatrix};

pub trait Objective {
    /// Number of rows `n` the objective expects.
    fn n_rows(&self) -> usize;

    /// Number of columns when the data fixes it (e.g. linear objectives).
    fn fixed_cols(&self) -> Option<usize> {
        None
    }

    fn value(&self, x: &SupportMatrix) -> Result<f64> {
        self.value_dense(&x.to_dense())
    }

    /// Value at an arbitrary (not necessarily feasible) dense point.
    fn value_dense(&self, x: &DenseMatrix) -> Result<f64>;

    /// Full `n x p` ambient Euclidean gradient.
    fn gradient(&self, x: &SupportMatrix) -> Result<DenseMatrix>;

    /// Lipschitz constant of the gradient, when known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }

    fn check_shape(&self, n: usize, p: usize) -> Result<()> {
        let ok = n == self.n_rows() && self.fixed_cols().is_none_or(|c| c == p);
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: (self.n_rows(), self.fixed_cols().unwrap_or(p)),
                found: (n, p),
            })
        }
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn n_rows(&self) -> usize {
        (**self).n_rows()
    }
    fn fixed_cols(&self) -> Option<usize> {
        (**self).fixed_cols()
    }
    fn value(&self, x: &SupportMatrix) -> Result<f64> {
        (**self).value(x)
    }
    fn value_dense(&self, x: &DenseMatrix) -> Result<f64> {
        (**self).value_dense(x)
    }
    fn gradient(&self, x: &SupportMatrix) -> Result<DenseMatrix> {
        (**self).gradient(x)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }
}

/// `M X` for dense `M` (`k x n`) and sparse `X` (`n x p`): gathers at most
/// `n` scaled columns of `M`.
pub fn dense_times_support(m: &DenseMatrix, x: &SupportMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.rows(), x.n_cols());
    let nz: Vec<(usize, usize, f64)> = x
        .entries()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|e| (i, e.col, e.val)))
        .collect();
    for r in 0..m.rows() {
        let m_row = m.row(r);
        let out_row = out.row_mut(r);
        for &(i, c, v) in &nz {
            out_row[c] += m_row[i] * v;
        }
    }
    out
}

/// `X^T M` for sparse `X` (`n x p`) and dense `M` (`n x k`).
pub fn support_t_times_dense(x: &SupportMatrix, m: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(x.n_cols(), m.cols());
    for (i, e) in x.entries().iter().enumerate() {
        if let Some(e) = e {
            let src = m.row(i);
            for (o, &s) in out.row_mut(e.col).iter_mut().zip(src) {
                *o += e.val * s;
            }
        }
    }
    out
}

/// `X N` for sparse `X` (`n x p`) and dense `N` (`p x k`).
fn support_times_dense(x: &SupportMatrix, m: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(x.n_rows(), m.cols());
    for (i, e) in x.entries().iter().enumerate() {
        if let Some(e) = e {
            let src = m.row(e.col);
            for (o, &s) in out.row_mut(i).iter_mut().zip(src) {
                *o = e.val * s;
            }
        }
    }
    out
}

fn check_rows(expected: usize, found: (usize, usize)) -> Result<()> {
    if found.0 != expected {
        return Err(Error::ShapeMismatch {
            expected: (expected, found.1),
            found,
        });
    }
    Ok(())
}

/// Nonnegative PCA: `f(X) = -1/2 tr(X^T A^T A X)` with data `A` (`m x n`).
#[derive(Debug, Clone)]
pub struct NpcaObjective {
    a: DenseMatrix,
    lipschitz: Option<f64>,
}

impl NpcaObjective {
    pub fn new(a: DenseMatrix) -> Self {
        Self { a, lipschitz: None }
    }

    pub fn with_lipschitz_hint(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.a
    }
}

impl Objective for NpcaObjective {
    fn n_rows(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, x: &SupportMatrix) -> Result<f64> {
        check_rows(self.a.cols(), x.shape())?;
        let ax = dense_times_support(&self.a, x);
        Ok(-0.5 * ax.dot(&ax))
    }

    fn value_dense(&self, x: &DenseMatrix) -> Result<f64> {
        let ax = self.a.matmul(x)?;
        Ok(-0.5 * ax.dot(&ax))
    }

    fn gradient(&self, x: &SupportMatrix) -> Result<DenseMatrix> {
        check_rows(self.a.cols(), x.shape())?;
        // -A^T (A X); A^T A is never formed.
        let ax = dense_times_support(&self.a, x);
        let mut g = self.a.t_matmul(&ax)?;
        g.scale(-1.0);
        Ok(g)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Orthogonal NMF: `f(X) = 1/2 ||A - X X^T A||_F^2` with data `A` (`n x m`).
#[derive(Debug, Clone)]
pub struct OnmfObjective {
    a: DenseMatrix,
    gram: Option<DenseMatrix>,
    lipschitz: Option<f64>,
}

impl OnmfObjective {
    pub fn new(a: DenseMatrix) -> Self {
        Self {
            a,
            gram: None,
            lipschitz: None,
        }
    }

    /// Precomputes `B = A A^T` (`n x n`); worthwhile when `n` is much smaller than `m`.
    pub fn with_gram_cache(mut self) -> Self {
        let at = self.a.transpose();
        self.gram = Some(self.a.matmul(&at).expect("A A^T shapes agree"));
        self
    }

    pub fn with_lipschitz_hint(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.a
    }

    /// `B X` with `B = A A^T`.
    fn gram_times(&self, x: &SupportMatrix) -> DenseMatrix {
        match &self.gram {
            Some(b) => dense_times_support(b, x),
            None => {
                // A (A^T X), with A^T X = (X^T A)^T.
                let xt_a = support_t_times_dense(x, &self.a);
                let mut bx = DenseMatrix::zeros(self.a.rows(), x.n_cols());
                for i in 0..self.a.rows() {
                    let a_row = self.a.row(i);
                    for j in 0..x.n_cols() {
                        bx[(i, j)] = a_row.iter().zip(xt_a.row(j)).map(|(u, v)| u * v).sum();
                    }
                }
                bx
            }
        }
    }
}

impl Objective for OnmfObjective {
    fn n_rows(&self) -> usize {
        self.a.rows()
    }

    fn value(&self, x: &SupportMatrix) -> Result<f64> {
        check_rows(self.a.rows(), x.shape())?;
        let xt_a = support_t_times_dense(x, &self.a);
        let mut acc = 0.0;
        for i in 0..self.a.rows() {
            let a_row = self.a.row(i);
            match x.entry(i) {
                Some(e) => {
                    for (&a, &b) in a_row.iter().zip(xt_a.row(e.col)) {
                        let r = a - e.val * b;
                        acc += r * r;
                    }
                }
                None => acc += a_row.iter().map(|v| v * v).sum::<f64>(),
            }
        }
        Ok(0.5 * acc)
    }

    fn value_dense(&self, x: &DenseMatrix) -> Result<f64> {
        let xt_a = x.t_matmul(&self.a)?;
        let proj = x.matmul(&xt_a)?;
        let r = self.a.sub(&proj)?;
        Ok(0.5 * r.dot(&r))
    }

    fn gradient(&self, x: &SupportMatrix) -> Result<DenseMatrix> {
        check_rows(self.a.rows(), x.shape())?;
        // -2 B X + B X (X^T X) + X (X^T B X); X^T X is diagonal for any
        // row-sparse X.
        let bx = self.gram_times(x);
        let mut colsq = alloc::vec![0.0; x.n_cols()];
        for e in x.entries().iter().flatten() {
            colsq[e.col] += e.val * e.val;
        }
        let xt_bx = support_t_times_dense(x, &bx);
        let x_xtbx = support_times_dense(x, &xt_bx);
        let mut g = bx;
        for i in 0..g.rows() {
            let row = g.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = -2.0 * *v + *v * colsq[j] + x_xtbx[(i, j)];
            }
        }
        Ok(g)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Community detection: `f(X) = -1/4 ||X^T A X||_F^2` with symmetric `A` (`n x n`).
#[derive(Debug, Clone)]
pub struct CommunityObjective {
    a: DenseMatrix,
    lipschitz: Option<f64>,
}

impl CommunityObjective {
    /// Fails unless `a` is square and symmetric to `1e-12 * max|a|`.
    pub fn new(a: DenseMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::InvalidShape("community matrix must be square"));
        }
        if !a.is_symmetric(1e-12 * a.max_abs().max(1.0)) {
            return Err(Error::InvalidShape("community matrix must be symmetric"));
        }
        Ok(Self { a, lipschitz: None })
    }

    pub fn with_lipschitz_hint(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.a
    }
}

impl Objective for CommunityObjective {
    fn n_rows(&self) -> usize {
        self.a.rows()
    }

    fn value(&self, x: &SupportMatrix) -> Result<f64> {
        check_rows(self.a.rows(), x.shape())?;
        let ax = dense_times_support(&self.a, x);
        let m = support_t_times_dense(x, &ax);
        Ok(-0.25 * m.dot(&m))
    }

    fn value_dense(&self, x: &DenseMatrix) -> Result<f64> {
        let ax = self.a.matmul(x)?;
        let m = x.t_matmul(&ax)?;
        Ok(-0.25 * m.dot(&m))
    }

    fn gradient(&self, x: &SupportMatrix) -> Result<DenseMatrix> {
        check_rows(self.a.rows(), x.shape())?;
        // -A X (X^T A X)
        let ax = dense_times_support(&self.a, x);
        let m = support_t_times_dense(x, &ax);
        let mut g = ax.matmul(&m)?;
        g.scale(-1.0);
        Ok(g)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Linear objective `f(X) = tr(C^T X)` with `C` (`n x p`).
#[derive(Debug, Clone)]
pub struct LinearObjective {
    c: DenseMatrix,
}

impl LinearObjective {
    pub fn new(c: DenseMatrix) -> Self {
        Self { c }
    }
}

impl Objective for LinearObjective {
    fn n_rows(&self) -> usize {
        self.c.rows()
    }

    fn fixed_cols(&self) -> Option<usize> {
        Some(self.c.cols())
    }

    fn value(&self, x: &SupportMatrix) -> Result<f64> {
        self.check_shape(x.n_rows(), x.n_cols())?;
        Ok(x.dot_dense(&self.c))
    }

    fn value_dense(&self, x: &DenseMatrix) -> Result<f64> {
        self.c.check_same_shape(x)?;
        Ok(self.c.dot(x))
    }

    fn gradient(&self, x: &SupportMatrix) -> Result<DenseMatrix> {
        self.check_shape(x.n_rows(), x.n_cols())?;
        Ok(self.c.clone())
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Default finite-difference step for [`fd_gradient_check`].
pub const FD_STEP: f64 = 1e-6;

/// Largest deviation between the analytic gradient at `x` and central
/// differences of [`Objective::value_dense`] around `x`, each measured as
/// `|fd - g| / max(1, |g|)`. The step is rounded to a power of two so the
/// perturbed coordinates are exact.
pub fn fd_gradient_check<O: Objective + ?Sized>(obj: &O, x: &SupportMatrix, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidOptions(
            "finite-difference step must be positive",
        ));
    }
    let h = libm::exp2(libm::round(libm::log2(h)));
    let g = obj.gradient(x)?;
    let mut pt = x.to_dense();
    let mut worst: f64 = 0.0;
    for i in 0..pt.rows() {
        for j in 0..pt.cols() {
            let orig = pt[(i, j)];
            pt[(i, j)] = orig + h;
            let fp = obj.value_dense(&pt)?;
            pt[(i, j)] = orig - h;
            let fm = obj.value_dense(&pt)?;
            pt[(i, j)] = orig;
            let fd = (fp - fm) / (2.0 * h);
            let gij = g[(i, j)];
            worst = worst.max((fd - gij).abs() / gij.abs().max(1.0));
        }
    }
    Ok(worst)
}
