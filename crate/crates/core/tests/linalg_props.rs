mod common;

use common::*;
use mcckf::linalg::{
    cholesky_solve, cholesky_upper, condition_estimate, invert, solve_upper, solve_upper_transposed, triangularize,
    weighted_norm, LinalgError, Matrix, UpperTriangular,
};
use proptest::prelude::*;

fn spd_strategy(max_n: usize) -> impl Strategy<Value = Rows> {
    (1..=max_n, any::<u64>()).prop_map(|(n, seed)| random_spd(&mut rng(seed), n, 0.05))
}

fn array_strategy() -> impl Strategy<Value = (Matrix, usize)> {
    (1usize..=5, 0usize..=4, 0usize..=2, any::<u64>()).prop_map(|(lead, extra_rows, extra_cols, seed)| {
        let rows = lead + extra_rows;
        let m = random_matrix(&mut rng(seed), rows, lead + extra_cols);
        (from_rows(&m), lead)
    })
}

/// `‖A x − b‖∞ / (‖A‖max ‖x‖∞ + ‖b‖∞)`.
fn backward_error(a: &Matrix, ax: &[f64], x: &[f64], b: &[f64]) -> f64 {
    let inf = |v: &[f64]| v.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    inf(&r) / (a.max_abs() * inf(x) + inf(b))
}

proptest! {
    #[test]
    fn cholesky_reconstructs(a in spd_strategy(6)) {
        let a = from_rows(&a);
        let u = cholesky_upper(&a).unwrap();
        prop_assert!(UpperTriangular::new(u.as_matrix().clone()).is_ok());
        prop_assert!(rel_diff_m(&u.gram(), &a) < 1e-12);
    }

    #[test]
    fn triangularization_preserves_gram((pre, lead) in array_strategy()) {
        let post = triangularize(&pre, lead).unwrap();
        prop_assert_eq!(post.shape(), pre.shape());
        for j in 0..lead {
            prop_assert!(post[(j, j)] >= 0.0);
            for i in (j + 1)..post.rows() {
                prop_assert_eq!(post[(i, j)], 0.0);
            }
        }
        let g_pre = pre.t_matmul(&pre);
        let g_post = post.t_matmul(&post);
        prop_assert!(rel_diff_m(&g_post, &g_pre) < 1e-12);
    }

    #[test]
    fn triangular_solves_have_small_residuals(a in spd_strategy(6), seed in any::<u64>()) {
        let u = cholesky_upper(&from_rows(&a)).unwrap();
        let n = u.dim();
        let b: Vec<f64> = random_matrix(&mut rng(seed), 1, n).remove(0);
        let x = solve_upper_transposed(&u, &b).unwrap();
        prop_assert!(backward_error(u.as_matrix(), &u.t_mul_vec(&x), &x, &b) < 1e-12);
        let y = solve_upper(&u, &b).unwrap();
        prop_assert!(backward_error(u.as_matrix(), &u.as_matrix().mul_vec(&y), &y, &b) < 1e-12);
    }

    #[test]
    fn explicit_inverse_matches_oracle(a in spd_strategy(5)) {
        let inv = invert(&from_rows(&a)).unwrap();
        prop_assert!(rel_diff_m(&inv, &from_rows(&inverse(&a))) < 1e-10);
    }

    #[test]
    fn cholesky_solve_matches_oracle(a in spd_strategy(5), seed in any::<u64>()) {
        let n = a.len();
        let b = random_matrix(&mut rng(seed), n, 2);
        let x = cholesky_solve(&cholesky_upper(&from_rows(&a)).unwrap(), &from_rows(&b)).unwrap();
        prop_assert!(rel_diff_m(&x, &from_rows(&mm(&inverse(&a), &b))) < 1e-10);
    }
}

#[test]
fn oracle_inverse_round_trips() {
    let mut r = rng(3);
    for n in 1..=6 {
        let a = random_spd(&mut r, n, 0.3);
        let prod: Vec<f64> = mm(&a, &inverse(&a)).into_iter().flatten().collect();
        let id: Vec<f64> = eye(n).into_iter().flatten().collect();
        assert!(rel_diff(&prod, &id, 1.0) < 1e-12);
    }
    let perm = vec![vec![0.0, 2.0], vec![4.0, 0.0]];
    assert_eq!(inverse(&perm), vec![vec![0.0, 0.25], vec![0.5, 0.0]]);
}

#[test]
fn documented_factor_examples() {
    let u = cholesky_upper(&Matrix::from_diag(&[4.0, 4.0, 3.0, 3.0])).unwrap();
    assert_eq!(u.diag(), vec![2.0, 2.0, 3f64.sqrt(), 3f64.sqrt()]);
    let u = cholesky_upper(&Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]])).unwrap();
    let s2 = 2f64.sqrt();
    let expect = Matrix::from_rows(&[[s2, 1.0 / s2], [0.0, (1.5f64).sqrt()]]);
    assert!(rel_diff_m(u.as_matrix(), &expect) < 1e-15);
    let post = triangularize(&Matrix::from_rows(&[[0.0], [3.0]]), 1).unwrap();
    assert_eq!(post, Matrix::from_rows(&[[3.0], [0.0]]));
    // ‖[1, 1]‖ weighted by (0.1 I)⁻¹
    let w = Matrix::from_diag(&[0.1, 0.1]);
    assert!((weighted_norm(&[1.0, 1.0], &w).unwrap() - 20f64.sqrt()).abs() < 1e-14);
}

#[test]
fn failures_are_typed() {
    let indefinite = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
    assert!(matches!(cholesky_upper(&indefinite), Err(LinalgError::NotPositiveDefinite { .. })));
    let asym = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]);
    assert_eq!(cholesky_upper(&asym), Err(LinalgError::NotSymmetric));
    let zero_col = Matrix::from_rows(&[[0.0, 1.0], [0.0, 2.0]]);
    assert!(matches!(triangularize(&zero_col, 1), Err(LinalgError::RankDeficient { column: 0 })));
    let singular = UpperTriangular::new(Matrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]])).unwrap();
    assert!(matches!(solve_upper(&singular, &[1.0, 1.0]), Err(LinalgError::SingularFactor { index: 1 })));
    assert_eq!(condition_estimate(&singular), f64::INFINITY);
}
