//! Closed-form minimization of the proximal linearization on a fixed support.
//!
//! For a base point `Z`, gradient `G = ∇f(Z)` and proximal parameter `eta`,
//!
//! ```text
//! fbar_Z(X) = f(Z) + <G, X - Z> + eta/2 ||X - Z||²
//!           = <X, G - eta Z> + f(Z) - <G, Z> + eta p      (X, Z feasible)
//! ```
//!
//! Restricted to `supp(X) ⊆ supp(S)` the problem separates by column. With
//! `D = eta Z - G` and `W = max(0, D ⊙ S)`, column `j` of the minimizer is
//! `W_j / ||W_j||` when `W_j != 0`, and otherwise the unit vector at the
//! smallest row index minimizing `-D_ij` over the rows assigned to `j`.
//! Each column contributes `alpha_j` (`-||W_j||` or that minimum) to the
//! optimal value.

use alloc::vec;
use alloc::vec::Vec;

use crate::{DenseMatrix, Error, Result, SignPattern, SupportMatrix};

/// `||W_j||²` below this is treated as `W_j = 0`, i.e. `||W_j|| < 1e-15`.
pub const W_ZERO_SQ: f64 = 1e-30;

/// Full rebuild of a column's running sums after this many updates.
pub const REFRESH_PERIOD: u32 = 128;

/// Base point, its gradient, the proximal parameter and the cached
/// `D = eta Z - ∇f(Z)`.
#[derive(Debug, Clone)]
pub struct ProxData<'a> {
    z: &'a SupportMatrix,
    grad: &'a DenseMatrix,
    eta: f64,
    d: DenseMatrix,
}

impl<'a> ProxData<'a> {
    pub fn new(z: &'a SupportMatrix, grad: &'a DenseMatrix, eta: f64) -> Result<Self> {
        if grad.shape() != z.shape() {
            return Err(Error::ShapeMismatch {
                expected: z.shape(),
                found: grad.shape(),
            });
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidOptions(
                "proximal parameter must be positive and finite",
            ));
        }
        let mut d = grad.clone();
        d.scale(-1.0);
        for (i, e) in z.entries().iter().enumerate() {
            if let Some(e) = e {
                d[(i, e.col)] += eta * e.val;
            }
        }
        Ok(Self { z, grad, eta, d })
    }

    #[inline]
    pub fn z(&self) -> &SupportMatrix {
        self.z
    }

    #[inline]
    pub fn grad(&self) -> &DenseMatrix {
        self.grad
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `[eta Z - ∇f(Z)]_{ij}`.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn d_matrix(&self) -> &DenseMatrix {
        &self.d
    }

    /// `f(Z) - <∇f(Z), Z> + eta p`: the part of the optimal value that does
    /// not depend on the support.
    pub fn value_offset(&self, f_z: f64) -> f64 {
        f_z - self.z.dot_dense(self.grad) + self.eta * self.z.n_cols() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedSupportSolution {
    pub x: SupportMatrix,
    pub alphas: Vec<f64>,
    /// `sum_j alpha_j = <x, ∇f(Z) - eta Z>`.
    pub linval: f64,
}

/// Global minimizer of `fbar_Z` over feasible points supported in `s`.
pub fn solve_fixed_support(pd: &ProxData<'_>, s: &SignPattern) -> Result<FixedSupportSolution> {
    let (n, p) = pd.z.shape();
    if s.n_rows() != n || s.n_cols() != p {
        return Err(Error::ShapeMismatch {
            expected: (n, p),
            found: (s.n_rows(), s.n_cols()),
        });
    }
    let mut sumsq = vec![0.0; p];
    let mut count = vec![0usize; p];
    let mut best: Vec<Option<(usize, f64)>> = vec![None; p];
    for i in 0..n {
        let Some(j) = s.col_of(i) else { continue };
        let dij = pd.d(i, j);
        count[j] += 1;
        if dij > 0.0 {
            sumsq[j] += dij * dij;
        }
        // Rows are visited in increasing order, so strict < keeps the minimal index.
        if best[j].is_none_or(|(_, v)| -dij < v) {
            best[j] = Some((i, -dij));
        }
    }
    if let Some(j) = count.iter().position(|&c| c == 0) {
        return Err(Error::EmptyColumnInPattern(j));
    }

    let mut alphas = vec![0.0; p];
    let mut norms = vec![0.0; p];
    for j in 0..p {
        if sumsq[j] >= W_ZERO_SQ {
            norms[j] = libm::sqrt(sumsq[j]);
            alphas[j] = -norms[j];
        } else {
            alphas[j] = best[j].map(|(_, v)| v).unwrap_or(0.0);
        }
    }
    let mut entries = vec![None; n];
    for (i, slot) in entries.iter_mut().enumerate() {
        let Some(j) = s.col_of(i) else { continue };
        if norms[j] > 0.0 {
            let dij = pd.d(i, j);
            if dij > 0.0 {
                *slot = Some((j, dij / norms[j]));
            }
        } else if best[j].is_some_and(|(r, _)| r == i) {
            *slot = Some((j, 1.0));
        }
    }
    let x = SupportMatrix::from_raw(n, p, entries)?;
    let linval = alphas.iter().sum();
    Ok(FixedSupportSolution { x, alphas, linval })
}

/// `fbar_Z(x)` evaluated directly from its definition.
pub fn proximal_value(pd: &ProxData<'_>, x: &SupportMatrix, f_z: f64) -> Result<f64> {
    let dist = x.frob_dist(pd.z)?;
    let lin = x.dot_dense(pd.grad) - pd.z.dot_dense(pd.grad);
    Ok(f_z + lin + 0.5 * pd.eta * dist * dist)
}

/// Per-column running state of `W = max(0, D ⊙ S)` for a sign pattern that
/// changes one row at a time.
///
/// `sumsq[j]` is `||W_j||²`, `best_neg[j]` is the minimum of `-D_ij` over the
/// rows assigned to `j` (smallest row index on ties). `best_neg` is refreshed
/// lazily: only when a column's best row leaves and the value is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnState {
    members: Vec<Vec<usize>>,
    slot: Vec<usize>,
    col_of: Vec<Option<usize>>,
    sumsq: Vec<f64>,
    n_pos: Vec<usize>,
    best_neg: Vec<Option<(usize, f64)>>,
    best_stale: Vec<bool>,
    updates: Vec<u32>,
}

/// Saved state for [`ColumnState::revert`].
#[derive(Debug, Clone, PartialEq)]
pub struct RowMove {
    pub row: usize,
    pub from: usize,
    pub to: usize,
    /// Change of `alpha_from` and `alpha_to` caused by the move.
    pub d_alpha: (f64, f64),
    removed_slot: usize,
    saved_from: ColumnSnapshot,
    saved_to: ColumnSnapshot,
}

#[derive(Debug, Clone, PartialEq)]
struct ColumnSnapshot {
    sumsq: f64,
    n_pos: usize,
    best_neg: Option<(usize, f64)>,
    best_stale: bool,
    updates: u32,
}

/// Full O(n) scan of `s` against `pd`.
pub fn build_column_state(pd: &ProxData<'_>, s: &SignPattern) -> ColumnState {
    ColumnState::build(pd, s)
}

impl ColumnState {
    pub fn build(pd: &ProxData<'_>, s: &SignPattern) -> Self {
        let p = s.n_cols();
        let n = s.n_rows();
        let mut st = ColumnState {
            members: vec![Vec::new(); p],
            slot: vec![usize::MAX; n],
            col_of: vec![None; n],
            sumsq: vec![0.0; p],
            n_pos: vec![0; p],
            best_neg: vec![None; p],
            best_stale: vec![false; p],
            updates: vec![0; p],
        };
        for i in 0..n {
            if let Some(j) = s.col_of(i) {
                st.slot[i] = st.members[j].len();
                st.members[j].push(i);
                st.col_of[i] = Some(j);
                let dij = pd.d(i, j);
                if dij > 0.0 {
                    st.sumsq[j] += dij * dij;
                    st.n_pos[j] += 1;
                }
                if st.best_neg[j].is_none_or(|(_, v)| -dij < v) {
                    st.best_neg[j] = Some((i, -dij));
                }
            }
        }
        st
    }

    pub fn n_cols(&self) -> usize {
        self.members.len()
    }

    pub fn sumsq(&self, j: usize) -> f64 {
        self.sumsq[j]
    }

    /// Number of assigned rows with `D_ij > 0`.
    pub fn positive_count(&self, j: usize) -> usize {
        self.n_pos[j]
    }

    pub fn members(&self, j: usize) -> &[usize] {
        &self.members[j]
    }

    pub fn col_of(&self, row: usize) -> Option<usize> {
        self.col_of[row]
    }

    /// Whether column `j` takes the normalized-`W` branch.
    pub fn is_positive(&self, j: usize) -> bool {
        self.n_pos[j] > 0 && self.sumsq[j] >= W_ZERO_SQ
    }

    /// `(row, -D_row,j)` minimizing over the rows of column `j`.
    pub fn best_neg(&mut self, pd: &ProxData<'_>, j: usize) -> Option<(usize, f64)> {
        if self.best_stale[j] {
            self.best_neg[j] = scan_best(pd, j, &self.members[j]);
            self.best_stale[j] = false;
        }
        self.best_neg[j]
    }

    /// `alpha_j` for the current assignment; `+inf` for an empty column.
    pub fn alpha(&mut self, pd: &ProxData<'_>, j: usize) -> f64 {
        if self.is_positive(j) {
            -libm::sqrt(self.sumsq[j])
        } else {
            self.best_neg(pd, j).map_or(f64::INFINITY, |(_, v)| v)
        }
    }

    /// `alpha_j` if `row` (currently unassigned) were added to column `j`.
    pub fn alpha_with(&mut self, pd: &ProxData<'_>, row: usize, j: usize) -> f64 {
        debug_assert!(self.col_of[row].is_none());
        let dv = pd.d(row, j);
        let w = dv.max(0.0);
        let s = self.sumsq[j] + w * w;
        let n_pos = self.n_pos[j] + usize::from(w > 0.0);
        if n_pos > 0 && s >= W_ZERO_SQ {
            -libm::sqrt(s)
        } else {
            match self.best_neg(pd, j) {
                Some((r, v)) if v < -dv || (v == -dv && r < row) => v,
                _ => -dv,
            }
        }
    }

    /// Removes `row` from its column. Returns the column it left.
    pub fn detach(&mut self, pd: &ProxData<'_>, row: usize) -> Option<usize> {
        let j = self.col_of[row]?;
        let k = self.slot[row];
        self.members[j].swap_remove(k);
        if let Some(&moved) = self.members[j].get(k) {
            self.slot[moved] = k;
        }
        self.slot[row] = usize::MAX;
        self.col_of[row] = None;
        let dij = pd.d(row, j);
        if dij > 0.0 {
            self.sumsq[j] -= dij * dij;
            self.n_pos[j] -= 1;
            if self.n_pos[j] == 0 {
                self.sumsq[j] = 0.0;
            }
        }
        if self.best_neg[j].is_some_and(|(r, _)| r == row) {
            self.best_stale[j] = true;
        }
        self.bump(pd, j);
        Some(j)
    }

    /// Adds an unassigned `row` to column `j`.
    pub fn attach(&mut self, pd: &ProxData<'_>, row: usize, j: usize) {
        debug_assert!(self.col_of[row].is_none());
        self.slot[row] = self.members[j].len();
        self.members[j].push(row);
        self.col_of[row] = Some(j);
        let dij = pd.d(row, j);
        if dij > 0.0 {
            self.sumsq[j] += dij * dij;
            self.n_pos[j] += 1;
        }
        if !self.best_stale[j] {
            match self.best_neg[j] {
                Some((r, v)) if v < -dij || (v == -dij && r < row) => {}
                _ => self.best_neg[j] = Some((row, -dij)),
            }
        }
        self.bump(pd, j);
    }

    /// Moves `row` from column `from` to column `to` in O(1) (amortized),
    /// returning the change in `alpha_from` and `alpha_to`.
    pub fn move_row(
        &mut self,
        pd: &ProxData<'_>,
        row: usize,
        from: usize,
        to: usize,
    ) -> Result<RowMove> {
        if self.col_of[row] != Some(from) {
            return Err(Error::RowNotInColumn { row, col: from });
        }
        let saved_from = self.snapshot(from);
        let saved_to = self.snapshot(to);
        let removed_slot = self.slot[row];
        let a_from = self.alpha(pd, from);
        let a_to = self.alpha(pd, to);
        self.detach(pd, row);
        self.attach(pd, row, to);
        let d_alpha = (self.alpha(pd, from) - a_from, self.alpha(pd, to) - a_to);
        Ok(RowMove {
            row,
            from,
            to,
            d_alpha,
            removed_slot,
            saved_from,
            saved_to,
        })
    }

    /// Undoes a [`RowMove`]; moves must be reverted in reverse order. The
    /// column sums are restored from the saved values, so the state is
    /// bit-identical to the one before the move.
    pub fn revert(&mut self, mv: RowMove) {
        let RowMove {
            row,
            from,
            to,
            removed_slot,
            ..
        } = mv;
        debug_assert_eq!(self.col_of[row], Some(to));
        let k = self.slot[row];
        self.members[to].swap_remove(k);
        if let Some(&moved) = self.members[to].get(k) {
            self.slot[moved] = k;
        }
        let list = &mut self.members[from];
        list.push(row);
        let last = list.len() - 1;
        list.swap(removed_slot, last);
        self.slot[list[last]] = last;
        self.slot[row] = removed_slot;
        self.col_of[row] = Some(from);
        self.restore(from, &mv.saved_from);
        self.restore(to, &mv.saved_to);
    }

    /// Recomputes the running sums of column `j` from its member list.
    pub fn refresh(&mut self, pd: &ProxData<'_>, j: usize) {
        let mut s = 0.0;
        let mut n_pos = 0;
        for &i in &self.members[j] {
            let dij = pd.d(i, j);
            if dij > 0.0 {
                s += dij * dij;
                n_pos += 1;
            }
        }
        self.sumsq[j] = s;
        self.n_pos[j] = n_pos;
        self.best_neg[j] = scan_best(pd, j, &self.members[j]);
        self.best_stale[j] = false;
        self.updates[j] = 0;
    }

    /// The current assignment as a sign pattern.
    pub fn pattern(&self) -> Result<SignPattern> {
        SignPattern::from_raw(self.n_cols(), self.col_of.clone())
    }

    fn bump(&mut self, pd: &ProxData<'_>, j: usize) {
        self.updates[j] += 1;
        if self.updates[j] >= REFRESH_PERIOD {
            self.refresh(pd, j);
        }
    }

    fn snapshot(&self, j: usize) -> ColumnSnapshot {
        ColumnSnapshot {
            sumsq: self.sumsq[j],
            n_pos: self.n_pos[j],
            best_neg: self.best_neg[j],
            best_stale: self.best_stale[j],
            updates: self.updates[j],
        }
    }

    fn restore(&mut self, j: usize, s: &ColumnSnapshot) {
        self.sumsq[j] = s.sumsq;
        self.n_pos[j] = s.n_pos;
        self.best_neg[j] = s.best_neg;
        self.best_stale[j] = s.best_stale;
        self.updates[j] = s.updates;
    }
}

fn scan_best(pd: &ProxData<'_>, j: usize, rows: &[usize]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &i in rows {
        let v = -pd.d(i, j);
        match best {
            Some((r, b)) if b < v || (b == v && r < i) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}
