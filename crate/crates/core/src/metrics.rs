//! Solution quality measures: subspace distance and relative gap for PCA-type
//! problems, and entropy / purity / NMI / accuracy for clusterings.
//!
//! Cluster labels are `Option<usize>`; `None` marks a point the solution left
//! unassigned (a zero row). Such points count towards `n` but never towards
//! any cluster, so they can only lower purity, NMI and accuracy.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, SupportMatrix};

/// Per-point cluster ids in `[0, p)`, `None` for unassigned points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<Option<usize>>,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<Option<usize>>) -> Self {
        Self { labels }
    }

    pub fn from_labels(labels: &[usize]) -> Self {
        Self {
            labels: labels.iter().map(|&l| Some(l)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Row `i` of `x` belongs to the cluster of its nonzero column.
pub fn labels_from(x: &SupportMatrix) -> ClusterAssignment {
    ClusterAssignment {
        labels: (0..x.n_rows()).map(|i| x.col_of(i)).collect(),
    }
}

/// `counts[i][j] = |C_i ∩ C*_j|` with `C` predicted and `C*` the truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    p: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(pred: &ClusterAssignment, truth: &ClusterAssignment, p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::DegenerateP(p));
        }
        if pred.len() != truth.len() {
            return Err(Error::ShapeMismatch {
                expected: (truth.len(), 1),
                found: (pred.len(), 1),
            });
        }
        if pred.is_empty() {
            return Err(Error::InvalidShape("no points to compare"));
        }
        let mut counts = vec![0u64; p * p];
        let mut row_sums = vec![0u64; p];
        let mut col_sums = vec![0u64; p];
        for (&a, &b) in pred.labels.iter().zip(&truth.labels) {
            for label in [a, b].into_iter().flatten() {
                if label >= p {
                    return Err(Error::LabelOutOfRange { label, p });
                }
            }
            if let (Some(i), Some(j)) = (a, b) {
                counts[i * p + j] += 1;
                row_sums[i] += 1;
                col_sums[j] += 1;
            }
        }
        Ok(Self {
            p,
            counts,
            row_sums,
            col_sums,
            n: pred.len() as u64,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Total number of points, assigned or not.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.p + j]
    }

    /// Predicted cluster sizes `n_i`.
    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    /// True class sizes `n*_j`.
    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }
}

/// `-1/(n log2 p) sum_{i,j} n_ij log2(n_ij / n*_j)`.
pub fn entropy(pred: &ClusterAssignment, truth: &ClusterAssignment, p: usize) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth, p)?;
    let mut s = 0.0;
    for i in 0..p {
        for j in 0..p {
            let nij = t.count(i, j);
            if nij > 0 {
                s += nij as f64 * libm::log2(nij as f64 / t.col_sums[j] as f64);
            }
        }
    }
    Ok(-s / (t.n as f64 * libm::log2(p as f64)))
}

/// `(1/n) sum_j max_i n_ij`.
pub fn purity(pred: &ClusterAssignment, truth: &ClusterAssignment, p: usize) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth, p)?;
    let hits: u64 = (0..p)
        .map(|j| (0..p).map(|i| t.count(i, j)).max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / t.n as f64)
}

/// Mutual information of the table over `max(h(C), h(C*))`.
///
/// The mutual information is evaluated as `h(C) + h(C*) - h(C, C*)`, which
/// equals `sum_ij (n_ij/n) log2(n n_ij / (n_i n*_j))` and makes the perfect
/// and independent cases come out exact.
pub fn nmi(pred: &ClusterAssignment, truth: &ClusterAssignment, p: usize) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth, p)?;
    let n = t.n as f64;
    let h = |sizes: &mut dyn Iterator<Item = u64>| -> f64 {
        sizes
            .filter(|&s| s > 0)
            .map(|s| {
                let q = s as f64 / n;
                -q * libm::log2(q)
            })
            .sum()
    };
    let h_pred = h(&mut t.row_sums.iter().copied());
    let h_truth = h(&mut t.col_sums.iter().copied());
    let denom = h_pred.max(h_truth);
    if denom <= 0.0 {
        return Err(Error::DegenerateAssignment);
    }
    let h_joint = h(&mut t.counts.iter().copied());
    Ok((h_pred + h_truth - h_joint) / denom)
}

/// Fraction of points whose predicted cluster, after the best one-to-one
/// relabeling, equals the true class.
pub fn accuracy(pred: &ClusterAssignment, truth: &ClusterAssignment, p: usize) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth, p)?;
    let perm = best_matching(&t);
    let hits: u64 = perm.iter().enumerate().map(|(i, &j)| t.count(i, j)).sum();
    Ok(hits as f64 / t.n as f64)
}

/// Predicted-to-true relabeling maximizing `sum_i n_{i, perm[i]}`
/// (Hungarian algorithm on `max - n_ij`).
pub fn best_matching(t: &ContingencyTable) -> Vec<usize> {
    let p = t.p;
    let max = t.counts.iter().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| max - t.count(i, j) as i64;

    // Potentials and matching, 1-based with a virtual column 0.
    let mut u = vec![0i64; p + 1];
    let mut v = vec![0i64; p + 1];
    let mut way = vec![0usize; p + 1];
    let mut col_match = vec![0usize; p + 1];
    for i in 1..=p {
        col_match[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; p + 1];
        let mut used = vec![false; p + 1];
        loop {
            used[j0] = true;
            let i0 = col_match[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=p {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=p {
                if used[j] {
                    u[col_match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_match[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_match[j0] = col_match[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; p];
    for j in 1..=p {
        perm[col_match[j] - 1] = j - 1;
    }
    perm
}

/// `||X X^T - Y Y^T||_F` via `p_x + p_y - 2 ||X^T Y||²_F`, in O(n).
pub fn subspace_distance(x: &SupportMatrix, y: &SupportMatrix) -> Result<f64> {
    if x.n_rows() != y.n_rows() {
        return Err(Error::ShapeMismatch {
            expected: x.shape(),
            found: y.shape(),
        });
    }
    // X^T Y is p_x x p_y with one contribution per row.
    let mut cross = vec![0.0; x.n_cols() * y.n_cols()];
    for (a, b) in x.entries().iter().zip(y.entries()) {
        if let (Some(a), Some(b)) = (a, b) {
            cross[a.col * y.n_cols() + b.col] += a.val * b.val;
        }
    }
    let sq: f64 = cross.iter().map(|c| c * c).sum();
    let d2 = x.n_cols() as f64 + y.n_cols() as f64 - 2.0 * sq;
    Ok(libm::sqrt(d2.max(0.0)))
}

/// `(f_alg - f_opt) / (1 + |f_opt|)`, not clamped.
pub fn relative_gap(f_alg: f64, f_opt: f64) -> f64 {
    (f_alg - f_opt) / (1.0 + f_opt.abs())
}
