#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sso_core::{DenseMatrix, SignPattern, SupportMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut *rng);
            scale * z
        })
        .collect::<Vec<f64>>();
    DenseMatrix::from_row_major(rows, cols, data).unwrap()
}

pub fn symmetric(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let g = gaussian(rng, n, n, 1.0);
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = 0.5 * (g[(i, j)] + g[(j, i)]);
        }
    }
    m
}

/// Random column assignment covering every column; each remaining row is
/// left empty with probability `empty`.
pub fn random_assignment(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    empty: f64,
) -> Vec<Option<usize>> {
    let mut rows: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(rows.as_mut_slice(), rng);
    let mut a = vec![None; n];
    for (k, &i) in rows.iter().enumerate() {
        a[i] = if k < p {
            Some(k)
        } else if rng.gen_bool(empty) {
            None
        } else {
            Some(rng.gen_range(0..p))
        };
    }
    a
}

/// Feasible point with possibly empty rows and a spread of entry sizes.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize, p: usize, empty: f64) -> SupportMatrix {
    let a = random_assignment(rng, n, p, empty);
    let vals: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                rng.gen_range(0.01..0.1)
            } else {
                rng.gen_range(0.1..1.0)
            }
        })
        .collect();
    let mut sumsq = vec![0.0; p];
    for i in 0..n {
        if let Some(j) = a[i] {
            sumsq[j] += vals[i] * vals[i];
        }
    }
    let entries = (0..n)
        .map(|i| a[i].map(|j| (j, vals[i] / sumsq[j].sqrt())))
        .collect();
    SupportMatrix::new(n, p, entries).unwrap()
}

pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize, p: usize) -> SignPattern {
    SignPattern::new(p, random_assignment(rng, n, p, 0.2)).unwrap()
}

pub fn max_abs_diff(a: &SupportMatrix, b: &SupportMatrix) -> f64 {
    a.to_dense().sub(&b.to_dense()).unwrap().max_abs()
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
