mod common;

use proptest::prelude::*;
use rand::Rng;
use sso_core::metrics::{accuracy, entropy, nmi, purity, subspace_distance, ClusterAssignment};
use sso_core::objective::LinearObjective;
use sso_core::solver::relocation_step;
use sso_core::stationarity::{residuals, riemannian_gradient};
use sso_core::subproblem::{build_column_state, proximal_value, solve_fixed_support, ProxData};
use sso_core::{DenseMatrix, SignPattern};

use common::*;

fn permute_columns(m: &DenseMatrix, perm: &[usize]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, perm[j])] = m[(i, j)];
        }
    }
    out
}

fn random_perm(r: &mut rand_chacha::ChaCha8Rng, p: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..p).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), r);
    perm
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn column_state_tracks_rebuild(seed in any::<u64>(), moves in 1usize..300) {
        let mut r = rng(seed);
        let n = r.gen_range(2..30);
        let p = r.gen_range(1..=n.min(5));
        let z = random_point(&mut r, n, p, 0.3);
        let g = gaussian(&mut r, n, p, 1.0);
        let pd = ProxData::new(&z, &g, r.gen_range(0.1..5.0)).unwrap();
        let s = random_pattern(&mut r, n, p);
        let mut st = build_column_state(&pd, &s);
        let mut assignment = s.assignment().to_vec();
        for _ in 0..moves {
            let row = r.gen_range(0..n);
            let Some(from) = assignment[row] else { continue };
            let to = r.gen_range(0..p);
            st.move_row(&pd, row, from, to).unwrap();
            assignment[row] = Some(to);
        }
        let fresh = build_column_state(&pd, &SignPattern::from_raw(p, assignment.clone()).unwrap());
        let mut fresh = fresh;
        for j in 0..p {
            prop_assert!((st.sumsq(j) - fresh.sumsq(j)).abs() <= 1e-12 * (1.0 + fresh.sumsq(j)));
            prop_assert_eq!(st.positive_count(j), fresh.positive_count(j));
            prop_assert_eq!(st.best_neg(&pd, j), fresh.best_neg(&pd, j));
        }
        let pattern = st.pattern().unwrap();
        prop_assert_eq!(pattern.assignment(), &assignment[..]);
    }

    #[test]
    fn move_and_revert_restore_state(seed in any::<u64>(), moves in 1usize..40) {
        let mut r = rng(seed);
        let n = r.gen_range(2..20);
        let p = r.gen_range(1..=n.min(4));
        let z = random_point(&mut r, n, p, 0.2);
        let g = gaussian(&mut r, n, p, 1.0);
        let pd = ProxData::new(&z, &g, 1.0).unwrap();
        let s = random_pattern(&mut r, n, p);
        let mut st = build_column_state(&pd, &s);
        let before = st.clone();
        let mut log = Vec::new();
        for _ in 0..moves {
            let row = r.gen_range(0..n);
            let Some(from) = st.col_of(row) else { continue };
            log.push(st.move_row(&pd, row, from, r.gen_range(0..p)).unwrap());
        }
        while let Some(mv) = log.pop() {
            st.revert(mv);
        }
        prop_assert_eq!(st, before);
    }

    #[test]
    fn subproblem_improves_on_base_point(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..25);
        let p = r.gen_range(1..=n.min(5));
        let z = random_point(&mut r, n, p, 0.3);
        let g = gaussian(&mut r, n, p, 2.0);
        let eta = r.gen_range(0.1..10.0);
        let pd = ProxData::new(&z, &g, eta).unwrap();
        // Any pattern containing supp(z) admits z itself.
        let assignment = (0..n)
            .map(|i| z.col_of(i).or_else(|| r.gen_bool(0.5).then(|| r.gen_range(0..p))))
            .collect();
        let s = SignPattern::new(p, assignment).unwrap();
        let sol = solve_fixed_support(&pd, &s).unwrap();
        prop_assert!(sol.x.validate().is_ok());
        let f_z = 0.0;
        let at_sol = proximal_value(&pd, &sol.x, f_z).unwrap();
        prop_assert!(at_sol <= f_z + 1e-12);
        // Every feasible point on the pattern does no better.
        let vals: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..1.0)).collect();
        let mut norms = vec![0.0; p];
        for i in 0..n {
            if let Some(j) = s.col_of(i) {
                norms[j] += vals[i] * vals[i];
            }
        }
        let cand = sso_core::SupportMatrix::new(
            n,
            p,
            (0..n).map(|i| s.col_of(i).map(|j| (j, vals[i] / norms[j].sqrt()))).collect(),
        )
        .unwrap();
        prop_assert!(at_sol <= proximal_value(&pd, &cand, f_z).unwrap() + 1e-12);
    }

    #[test]
    fn relocation_does_not_increase_prox_value(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..40);
        let p = r.gen_range(1..=n.min(6));
        let y = random_point(&mut r, n, p, 0.3);
        let g = gaussian(&mut r, n, p, 1.0);
        let eta = r.gen_range(0.2..5.0);
        let f_y = r.gen_range(-2.0..2.0);
        let out = relocation_step(&y, f_y, &g, eta, r.gen_range(0.05..0.9)).unwrap();
        prop_assert!(out.x.validate().is_ok());
        prop_assert!(out.prox_value <= f_y + 1e-12);
        let pd = ProxData::new(&y, &g, eta).unwrap();
        let direct = proximal_value(&pd, &out.x, f_y).unwrap();
        prop_assert!((direct - out.prox_value).abs() <= 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn riemannian_gradient_is_tangent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..30);
        let p = r.gen_range(1..=n.min(5));
        let x = random_point(&mut r, n, p, 0.3);
        let g = gaussian(&mut r, n, p, 3.0);
        let rg = riemannian_gradient(&x, &g).unwrap();
        let xtr = x.to_dense().t_matmul(&rg).unwrap();
        for j in 0..p {
            prop_assert!(xtr[(j, j)].abs() <= 1e-12);
        }
    }

    #[test]
    fn residuals_follow_column_relabeling(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..20);
        let p = r.gen_range(1..=n.min(4));
        let x = random_point(&mut r, n, p, 0.4);
        let c = gaussian(&mut r, n, p, 1.0);
        let perm = random_perm(&mut r, p);
        let a = residuals(&LinearObjective::new(c.clone()), &x).unwrap();
        let b = residuals(&LinearObjective::new(permute_columns(&c, &perm)), &x.relabel_columns(&perm))
            .unwrap();
        prop_assert!((a.supp_residual - b.supp_residual).abs() <= 1e-14);
        prop_assert_eq!(a.zrow_residual, b.zrow_residual);
    }

    #[test]
    fn subspace_distance_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..40);
        let p = r.gen_range(1..=n.min(5));
        let x = random_point(&mut r, n, p, 0.2);
        let y = random_point(&mut r, n, p, 0.2);
        let d = subspace_distance(&x, &y).unwrap();
        let cross = x.to_dense().t_matmul(&y.to_dense()).unwrap().frobenius_norm();
        prop_assert!((d * d + 2.0 * cross * cross - 2.0 * p as f64).abs() <= 1e-10);
        prop_assert!((d - subspace_distance(&y, &x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn cluster_metrics_ignore_relabeling(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = r.gen_range(2..6);
        let n = r.gen_range(2..50);
        let pred: Vec<Option<usize>> =
            (0..n).map(|_| r.gen_bool(0.9).then(|| r.gen_range(0..p))).collect();
        let truth: Vec<usize> = (0..n).map(|_| r.gen_range(0..p)).collect();
        let perm = random_perm(&mut r, p);
        let a = ClusterAssignment::new(pred.clone());
        let b = ClusterAssignment::new(pred.iter().map(|l| l.map(|l| perm[l])).collect());
        let t = ClusterAssignment::from_labels(&truth);
        prop_assert!((entropy(&a, &t, p).unwrap() - entropy(&b, &t, p).unwrap()).abs() < 1e-12);
        prop_assert_eq!(purity(&a, &t, p).unwrap(), purity(&b, &t, p).unwrap());
        prop_assert_eq!(accuracy(&a, &t, p).unwrap(), accuracy(&b, &t, p).unwrap());
        let acc = accuracy(&a, &t, p).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        if let (Ok(x), Ok(y)) = (nmi(&a, &t, p), nmi(&t, &a, p)) {
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((x - nmi(&b, &t, p).unwrap()).abs() < 1e-12);
        }
    }
}
