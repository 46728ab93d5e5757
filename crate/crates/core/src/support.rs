//! Row-indexed storage for feasible points and sign patterns.
//!
//! A matrix with orthonormal, entrywise-nonnegative columns has at most one
//! nonzero entry per row: two nonnegative columns are orthogonal only if their
//! supports are disjoint. [`SupportMatrix`] keeps exactly that, one optional
//! `(column, value)` pair per row, and every update in the solver is phrased
//! as activating, rescaling or moving such a pair.

use alloc::vec;
use alloc::vec::Vec;

use crate::{DenseMatrix, Error, Result};

/// Values strictly below this are stored as empty rows.
pub const ZERO_CLIP: f64 = 1e-15;

/// Absolute tolerance on `|‖column‖² - 1|` accepted by [`SupportMatrix::validate`].
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub col: usize,
    pub val: f64,
}

/// A point of the nonnegative Stiefel manifold in row-indexed form.
///
/// Construction through [`SupportMatrix::new`] validates; [`SupportMatrix::from_raw`]
/// does not, so that diagnostics can inspect arbitrary row data.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Option<Entry>>,
}

impl SupportMatrix {
    /// Builds and validates.
    pub fn new(n_rows: usize, n_cols: usize, entries: Vec<Option<(usize, f64)>>) -> Result<Self> {
        let x = Self::from_raw(n_rows, n_cols, entries)?;
        x.validate()?;
        Ok(x)
    }

    /// Builds without checking the column invariants. Nonnegative values
    /// below [`ZERO_CLIP`] become empty rows; column indices must be in range.
    pub fn from_raw(
        n_rows: usize,
        n_cols: usize,
        entries: Vec<Option<(usize, f64)>>,
    ) -> Result<Self> {
        if entries.len() != n_rows {
            return Err(Error::ShapeMismatch {
                expected: (n_rows, n_cols),
                found: (entries.len(), n_cols),
            });
        }
        if n_cols == 0 {
            return Err(Error::InvalidShape("at least one column required"));
        }
        let mut out = Vec::with_capacity(n_rows);
        for (row, e) in entries.into_iter().enumerate() {
            out.push(match e {
                None => None,
                Some((col, _)) if col >= n_cols => {
                    return Err(Error::ColumnOutOfRange { row, col, n_cols })
                }
                Some((_, val)) if (0.0..ZERO_CLIP).contains(&val) => None,
                Some((col, val)) => Some(Entry { col, val }),
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries: out,
        })
    }

    /// Extracts the row supports of a dense matrix. Fails if any row has
    /// more than one nonzero entry.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let mut entries = Vec::with_capacity(m.rows());
        for i in 0..m.rows() {
            let mut found = None;
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    if found.is_some() {
                        return Err(Error::InvalidShape("row with more than one nonzero entry"));
                    }
                    found = Some((j, v));
                }
            }
            entries.push(found);
        }
        Self::from_raw(m.rows(), m.cols(), entries)
    }

    /// Checks nonnegativity, unit columns and column coverage, reporting the
    /// first violation.
    pub fn validate(&self) -> Result<()> {
        let mut sumsq = vec![0.0; self.n_cols];
        let mut hit = vec![false; self.n_cols];
        for (row, e) in self.entries.iter().enumerate() {
            if let Some(Entry { col, val }) = *e {
                if !(val > 0.0) || !val.is_finite() {
                    return Err(Error::NonPositiveValue(row));
                }
                sumsq[col] += val * val;
                hit[col] = true;
            }
        }
        for col in 0..self.n_cols {
            if !hit[col] {
                return Err(Error::ZeroColumn(col));
            }
            if (sumsq[col] - 1.0).abs() > UNIT_TOL {
                return Err(Error::NonUnitColumn {
                    col,
                    norm: libm::sqrt(sumsq[col]),
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    #[inline]
    pub fn entry(&self, row: usize) -> Option<Entry> {
        self.entries[row]
    }

    #[inline]
    pub fn col_of(&self, row: usize) -> Option<usize> {
        self.entries[row].map(|e| e.col)
    }

    /// Value at `(row, col)`, zero off the support.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        match self.entries[row] {
            Some(e) if e.col == col => e.val,
            _ => 0.0,
        }
    }

    pub fn entries(&self) -> &[Option<Entry>] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().flatten().count()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(e) = e {
                d[(i, e.col)] = e.val;
            }
        }
        d
    }

    /// Rows with no stored entry.
    pub fn zero_rows(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.is_none().then_some(i))
            .collect()
    }

    /// Row indices per column, in increasing row order.
    pub fn column_lists(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(e) = e {
                cols[e.col].push(i);
            }
        }
        cols
    }

    /// Frobenius distance in O(n): rows agreeing in column contribute
    /// `(a - b)²`, rows that differ contribute `a² + b²`.
    pub fn frob_dist(&self, other: &SupportMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(libm::sqrt(row_pairs_dist_sq(&self.entries, &other.entries)))
    }

    /// `<X, D>` for a dense `D` of the same shape.
    pub fn dot_dense(&self, d: &DenseMatrix) -> f64 {
        debug_assert_eq!(d.shape(), self.shape());
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|e| e.val * d[(i, e.col)]))
            .sum()
    }

    /// The support template of this matrix. Not checked for column coverage.
    pub fn sign(&self) -> SignPattern {
        SignPattern {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            assignment: self.entries.iter().map(|e| e.map(|e| e.col)).collect(),
        }
    }

    /// Renames column `j` to `perm[j]`.
    pub fn relabel_columns(&self, perm: &[usize]) -> SupportMatrix {
        assert_eq!(perm.len(), self.n_cols);
        SupportMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self
                .entries
                .iter()
                .map(|e| {
                    e.map(|e| Entry {
                        col: perm[e.col],
                        val: e.val,
                    })
                })
                .collect(),
        }
    }

    /// True when both matrices place their entries in the same columns.
    pub fn same_support(&self, other: &SupportMatrix) -> bool {
        self.shape() == other.shape()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.map(|e| e.col) == b.map(|e| e.col))
    }
}

/// Squared Frobenius distance between two raw row-entry sequences.
pub(crate) fn row_pairs_dist_sq(a: &[Option<Entry>], b: &[Option<Entry>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) if x.col == y.col => (x.val - y.val) * (x.val - y.val),
            (Some(x), Some(y)) => x.val * x.val + y.val * y.val,
            (Some(x), None) => x.val * x.val,
            (None, Some(y)) => y.val * y.val,
            (None, None) => 0.0,
        })
        .sum()
}

/// At most one admissible column per row; every column used at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    n_rows: usize,
    n_cols: usize,
    assignment: Vec<Option<usize>>,
}

impl SignPattern {
    pub fn new(n_cols: usize, assignment: Vec<Option<usize>>) -> Result<Self> {
        let s = Self::from_raw(n_cols, assignment)?;
        s.validate()?;
        Ok(s)
    }

    /// Range-checked but coverage is not enforced.
    pub fn from_raw(n_cols: usize, assignment: Vec<Option<usize>>) -> Result<Self> {
        if let Some((row, col)) = assignment
            .iter()
            .enumerate()
            .find_map(|(i, c)| c.filter(|&c| c >= n_cols).map(|c| (i, c)))
        {
            return Err(Error::ColumnOutOfRange { row, col, n_cols });
        }
        Ok(Self {
            n_rows: assignment.len(),
            n_cols,
            assignment,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut hit = vec![false; self.n_cols];
        for c in self.assignment.iter().flatten() {
            hit[*c] = true;
        }
        match hit.iter().position(|h| !h) {
            Some(j) => Err(Error::EmptyColumnInPattern(j)),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn col_of(&self, row: usize) -> Option<usize> {
        self.assignment[row]
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }
}
