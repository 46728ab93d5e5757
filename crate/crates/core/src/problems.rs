//! Synthetic instances and spectral starting points.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigen::{leading_eigenpairs, orthonormalize_columns, GramOperator};
use crate::{DenseMatrix, Error, Result, SupportMatrix};

/// Nonnegative PCA instance `min -1/2 ||A X||²` with a known global minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedNpca {
    /// `m x n` data matrix.
    pub a: DenseMatrix,
    pub x_opt: SupportMatrix,
    pub f_opt: f64,
    /// Singular values of `A`, descending.
    pub sigma: Vec<f64>,
}

/// Range of the singular values before scaling.
pub const SIGMA_RANGE: (f64, f64) = (0.5, 1.5);

/// Planted instance with singular values drawn from [`SIGMA_RANGE`].
pub fn gen_planted_npca(n: usize, m: usize, p: usize, seed: u64) -> Result<PlantedNpca> {
    gen_planted_npca_scaled(n, m, p, seed, 1.0)
}

/// `A = U Sigma V^T` with `V = [X_opt, V_bar]`. `X_opt` is a random feasible
/// point using every row and at least two rows per column, `V_bar` an
/// orthonormal completion and `U` a random orthogonal matrix. Because
/// `Sigma` is sorted descending, `X_opt` spans the top-`p` right singular
/// subspace and attains `-1/2 sum_{j<p} sigma_j²`.
pub fn gen_planted_npca_scaled(
    n: usize,
    m: usize,
    p: usize,
    seed: u64,
    scale: f64,
) -> Result<PlantedNpca> {
    if p == 0 || p >= m || m > n {
        return Err(Error::InvalidShape("planted instance needs 0 < p < m <= n"));
    }
    if n < 2 * p {
        return Err(Error::InvalidShape("planted instance needs n >= 2p"));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidShape("scale must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    let mut assignment = vec![0usize; n];
    for (k, &i) in rows.iter().enumerate() {
        assignment[i] = if k < 2 * p {
            k / 2
        } else {
            rng.gen_range(0..p)
        };
    }
    let x_opt = normalized_point(n, p, &assignment, &mut rng)?;

    // V = [X_opt, V_bar], n x m.
    let mut v = x_opt.to_dense();
    let mut vfull = DenseMatrix::zeros(n, m);
    for i in 0..n {
        vfull.row_mut(i)[..p].copy_from_slice(v.row(i));
    }
    for j in p..m {
        loop {
            for i in 0..n {
                vfull[(i, j)] = StandardNormal.sample(&mut rng);
            }
            if complete_column(&mut vfull, j) {
                break;
            }
        }
    }
    v = vfull;

    let mut u = DenseMatrix::zeros(m, m);
    loop {
        for x in u.as_mut_slice() {
            *x = StandardNormal.sample(&mut rng);
        }
        if orthonormalize_columns(&mut u) == m {
            break;
        }
    }

    let mut sigma: Vec<f64> = (0..m)
        .map(|_| scale * rng.gen_range(SIGMA_RANGE.0..SIGMA_RANGE.1))
        .collect();
    sigma.sort_by(|a, b| b.total_cmp(a));

    // A = (U Sigma) V^T.
    let mut us = u;
    for i in 0..m {
        for (k, x) in us.row_mut(i).iter_mut().enumerate() {
            *x *= sigma[k];
        }
    }
    let mut a = DenseMatrix::zeros(m, n);
    for r in 0..m {
        let ur = us.row(r);
        for c in 0..n {
            a[(r, c)] = ur.iter().zip(v.row(c)).map(|(x, y)| x * y).sum();
        }
    }
    let f_opt = -0.5 * sigma[..p].iter().map(|s| s * s).sum::<f64>();
    Ok(PlantedNpca {
        a,
        x_opt,
        f_opt,
        sigma,
    })
}

/// Orthogonalizes column `j` of `v` against columns `0..j` (twice) and
/// normalizes it. Returns false when the draw was numerically dependent.
fn complete_column(v: &mut DenseMatrix, j: usize) -> bool {
    let n = v.rows();
    let original = libm::sqrt((0..n).map(|i| v[(i, j)] * v[(i, j)]).sum());
    for _ in 0..2 {
        for k in 0..j {
            let dot: f64 = (0..n).map(|i| v[(i, j)] * v[(i, k)]).sum();
            for i in 0..n {
                v[(i, j)] -= dot * v[(i, k)];
            }
        }
    }
    let norm = libm::sqrt((0..n).map(|i| v[(i, j)] * v[(i, j)]).sum());
    if norm <= 1e-8 * original {
        return false;
    }
    for i in 0..n {
        v[(i, j)] /= norm;
    }
    true
}

fn normalized_point(
    n: usize,
    p: usize,
    assignment: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<SupportMatrix> {
    let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let mut sumsq = vec![0.0; p];
    for i in 0..n {
        sumsq[assignment[i]] += vals[i] * vals[i];
    }
    let entries = (0..n)
        .map(|i| {
            let j = assignment[i];
            Some((j, vals[i] / libm::sqrt(sumsq[j])))
        })
        .collect();
    SupportMatrix::new(n, p, entries)
}

const ASSIGNMENT_REDRAWS: usize = 1000;

/// Random feasible point with every row nonzero.
///
/// Rows are assigned to columns uniformly, redrawing until every column is
/// used; when that keeps failing (`n` barely above `p`) the first `p` rows of
/// a random permutation are dealt one per column instead.
pub fn gen_random_feasible(n: usize, p: usize, seed: u64) -> Result<SupportMatrix> {
    if p == 0 || p > n {
        return Err(Error::InvalidShape("random point needs 0 < p <= n"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    let mut covered = false;
    for _ in 0..ASSIGNMENT_REDRAWS {
        let mut used = vec![false; p];
        for a in assignment.iter_mut() {
            *a = rng.gen_range(0..p);
            used[*a] = true;
        }
        if used.iter().all(|&u| u) {
            covered = true;
            break;
        }
    }
    if !covered {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        for (k, &i) in rows.iter().enumerate() {
            assignment[i] = if k < p { k } else { rng.gen_range(0..p) };
        }
    }
    normalized_point(n, p, &assignment, &mut rng)
}

/// Matrix whose leading eigenvectors seed [`spectral_init`].
#[derive(Debug, Clone, Copy)]
pub enum SpectralSource<'a> {
    /// A symmetric `n x n` matrix.
    Symmetric(&'a DenseMatrix),
    /// An `n x m` matrix `A`; eigenvectors of `A A^T` are used.
    Gram(&'a DenseMatrix),
}

/// Entries below this magnitude do not claim a row.
pub const SPECTRAL_ZERO: f64 = 1e-12;

/// Feasible point from the top-`p` eigenvectors: each row goes to the column
/// of its largest-magnitude entry (first index on ties) with value `|entry|`,
/// then columns are normalized.
///
/// Rows whose largest entry is below [`SPECTRAL_ZERO`] stay empty unless some
/// column would be left empty; such columns receive those rows round-robin,
/// and if there are not enough of them, rows are borrowed from columns that
/// hold more than one.
pub fn spectral_init(source: SpectralSource<'_>, p: usize) -> Result<SupportMatrix> {
    let eig = match source {
        SpectralSource::Symmetric(m) => {
            if m.rows() != m.cols() || !m.is_symmetric(1e-10 * m.max_abs().max(1.0)) {
                return Err(Error::InvalidShape("spectral source must be symmetric"));
            }
            leading_eigenpairs(m, p)?
        }
        SpectralSource::Gram(a) => leading_eigenpairs(&GramOperator(a), p)?,
    };
    let v = eig.vectors;
    let n = v.rows();
    if p == 0 || p > n {
        return Err(Error::InvalidShape("need 0 < p <= n"));
    }

    let mut assign: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut tiny = Vec::new();
    let mut count = vec![0usize; p];
    for (i, slot) in assign.iter_mut().enumerate() {
        let (j, val) = v
            .row(i)
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bj, bv), (j, x)| {
                if x.abs() > bv {
                    (j, x.abs())
                } else {
                    (bj, bv)
                }
            });
        if val < SPECTRAL_ZERO {
            tiny.push(i);
        } else {
            *slot = Some((j, val));
            count[j] += 1;
        }
    }

    let mut uncovered: Vec<usize> = (0..p).filter(|&j| count[j] == 0).collect();
    let mut tiny_rows = tiny.into_iter();
    uncovered.retain(|&j| match tiny_rows.next() {
        Some(i) => {
            assign[i] = Some((j, 1.0));
            count[j] += 1;
            false
        }
        None => true,
    });
    for j in uncovered {
        // Borrow the row with the largest |V_ij| among columns holding >= 2 rows.
        let donor = (0..n)
            .filter(|&i| assign[i].is_some_and(|(c, _)| count[c] >= 2))
            .max_by(|&a, &b| v[(a, j)].abs().total_cmp(&v[(b, j)].abs()).then(b.cmp(&a)))
            .ok_or(Error::InvalidShape("not enough rows to cover every column"))?;
        let (c, _) = assign[donor].expect("donor is assigned");
        count[c] -= 1;
        count[j] += 1;
        assign[donor] = Some((j, v[(donor, j)].abs().max(SPECTRAL_ZERO)));
    }

    let mut sumsq = vec![0.0; p];
    for (j, val) in assign.iter().flatten() {
        sumsq[*j] += val * val;
    }
    let entries = assign
        .into_iter()
        .map(|e| e.map(|(j, val)| (j, val / libm::sqrt(sumsq[j]))))
        .collect();
    SupportMatrix::new(n, p, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{NpcaObjective, Objective};
    use crate::stationarity::residuals;

    #[test]
    fn planted_value_matches_f_opt() {
        for seed in 0..3 {
            let inst = gen_planted_npca(30, 10, 3, seed).unwrap();
            let obj = NpcaObjective::new(inst.a.clone());
            let f = obj.value(&inst.x_opt).unwrap();
            assert!((f - inst.f_opt).abs() < 1e-9, "{f} vs {}", inst.f_opt);
            assert!(residuals(&obj, &inst.x_opt).unwrap().epsilon < 1e-8);
            for j in 0..3 {
                assert!(
                    inst.x_opt
                        .entries()
                        .iter()
                        .flatten()
                        .filter(|e| e.col == j)
                        .count()
                        >= 2
                );
            }
            assert_eq!(inst.x_opt.nnz(), 30);
        }
    }

    #[test]
    fn planted_is_deterministic() {
        let a = gen_planted_npca(20, 8, 2, 99).unwrap();
        let b = gen_planted_npca(20, 8, 2, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.a, gen_planted_npca(20, 8, 2, 100).unwrap().a);
    }

    #[test]
    fn planted_rejects_bad_shapes() {
        assert!(gen_planted_npca(10, 12, 3, 0).is_err());
        assert!(gen_planted_npca(10, 3, 3, 0).is_err());
        assert!(gen_planted_npca(5, 4, 3, 0).is_err());
    }

    #[test]
    fn random_feasible_shapes() {
        for seed in 0..50 {
            let x = gen_random_feasible(3, 2, seed).unwrap();
            assert!(x.validate().is_ok());
            let y = gen_random_feasible(5, 4, seed).unwrap();
            assert_eq!(y.nnz(), 5);
        }
        let tight = gen_random_feasible(41, 40, 1).unwrap();
        assert_eq!(tight.nnz(), 41);
    }

    #[test]
    fn spectral_identity_uses_minimal_index() {
        let i4 = DenseMatrix::identity(4);
        let x = spectral_init(SpectralSource::Symmetric(&i4), 2).unwrap();
        assert!(x.validate().is_ok());
        assert_eq!(x.col_of(0), Some(0));
        assert_eq!(x.col_of(1), Some(1));
    }

    #[test]
    fn spectral_diagonal_leaves_null_row_empty() {
        let d = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
        let x = spectral_init(SpectralSource::Symmetric(&d), 2).unwrap();
        assert_eq!(x.entry(0).map(|e| (e.col, e.val)), Some((0, 1.0)));
        assert_eq!(x.entry(1).map(|e| (e.col, e.val)), Some((1, 1.0)));
        assert_eq!(x.entry(2), None);
    }

    #[test]
    fn spectral_borrows_rows_for_uncovered_columns() {
        // Rank-one-ish matrix: the second eigenvector is dominated everywhere.
        let a = DenseMatrix::from_rows(&[&[4.0, 4.0, 4.0], &[4.0, 4.0, 4.0], &[4.0, 4.0, 4.1]])
            .unwrap();
        let x = spectral_init(SpectralSource::Symmetric(&a), 2).unwrap();
        assert!(x.validate().is_ok());
    }

    #[test]
    fn spectral_gram_source_is_valid() {
        let inst = gen_planted_npca(40, 10, 3, 5).unwrap();
        let at = inst.a.transpose();
        let x = spectral_init(SpectralSource::Gram(&at), 3).unwrap();
        assert!(x.validate().is_ok());
    }
}
