use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rbm_core::linalg::kmeans::kmeans_runs;
use rbm_core::linalg::*;

fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
}

#[test]
fn singular_values_of_transpose_agree() {
    for seed in 0..50 {
        let a = random(3 + seed as usize % 5, 2 + seed as usize % 4, seed);
        let s = svd(&a).unwrap().singular_values;
        let t = svd(&a.transpose()).unwrap().singular_values;
        for (x, y) in s.iter().zip(&t) {
            assert!((x - y).abs() <= 1e-12 * s[0]);
        }
    }
}

#[test]
fn svd_reconstructs_and_is_orthonormal() {
    let a = random(6, 4, 9);
    let r = svd(&a).unwrap();
    let mut us = r.left_vectors.clone();
    for (j, &s) in r.singular_values.iter().enumerate() {
        us.column_mut(j).iter_mut().for_each(|x| *x *= s);
    }
    let back = us.matmul(&r.right_vectors.transpose()).unwrap();
    assert!(back.sub(&a).unwrap().frobenius_norm() <= 1e-12 * a.frobenius_norm());
    assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
    let utu = r.left_vectors.t_matmul(&r.left_vectors).unwrap();
    assert!(utu.sub(&DenseMatrix::identity(utu.rows())).unwrap().max_abs() < 1e-12);
}

#[test]
fn kmeans_objective_matches_recomputation() {
    let data = random(40, 3, 5);
    let k = 4;
    let runs = kmeans_runs(&data, k, 5, 17).unwrap();
    let best = kmeans(&data, k, 5, 17).unwrap();
    for run in &runs {
        assert!(run.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{:?}", run.history);
        assert!(best.objective <= run.result.objective);
    }
    let mut sum = 0.0;
    for i in 0..data.rows() {
        let c = best.assignments[i];
        sum += (0..3).map(|d| (data.get(i, d) - best.centroids.get(c, d)).powi(2)).sum::<f64>();
    }
    assert!((sum - best.objective).abs() <= 1e-9 * sum);
    for (c, &r) in best.representative_rows.iter().enumerate() {
        assert_eq!(best.assignments[r], c);
    }
    for c in 0..k {
        assert!(best.assignments.contains(&c));
    }
}

#[test]
fn kmeans_is_deterministic() {
    let data = random(30, 2, 1);
    let a = kmeans(&data, 3, 5, 8).unwrap();
    let b = kmeans(&data, 3, 5, 8).unwrap();
    assert_eq!(a.assignments, b.assignments);
    assert_eq!(a.representative_rows, b.representative_rows);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn qr_diagonal_is_permutation_invariant(seed in 0u64..1000, rows in 3usize..8, cols in 2usize..6) {
        let a = random(rows, cols, seed);
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        for i in (1..cols).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let b = a.select_columns(&perm).unwrap();
        let mut da: Vec<f64> = pivoted_qr(&a).r_diagonal().iter().map(|x| x.abs()).collect();
        let mut db: Vec<f64> = pivoted_qr(&b).r_diagonal().iter().map(|x| x.abs()).collect();
        da.sort_by(f64::total_cmp);
        db.sort_by(f64::total_cmp);
        for (x, y) in da.iter().zip(&db) {
            prop_assert!((x - y).abs() <= 1e-10 * a.frobenius_norm());
        }
    }

    #[test]
    fn qr_factorizes_with_non_increasing_diagonal(seed in 0u64..1000) {
        let a = random(8, 5, seed);
        let f = pivoted_qr(&a);
        let ap = a.select_columns(&f.pivots).unwrap();
        let qr = f.q_factor.matmul(&f.r_factor).unwrap();
        prop_assert!(ap.sub(&qr).unwrap().frobenius_norm() <= 1e-10 * a.frobenius_norm());
        let d: Vec<f64> = f.r_diagonal().iter().map(|x| x.abs()).collect();
        prop_assert!(d.windows(2).all(|w| w[0] >= w[1] * (1.0 - 1e-12)));
    }

    #[test]
    fn orthonormalization_is_idempotent(seed in 0u64..1000, cols in 1usize..5) {
        let w = random(12, cols, seed);
        let out = orthonormalize_against(&ReducedBasis::empty(12), Some(&w)).basis;
        prop_assert!(out.orthogonality_error() <= 1e-12);
        let again = orthonormalize_against(&out, None).basis;
        prop_assert_eq!(again.matrix(), out.matrix());
        // the span is kept: every input column is reproduced by its projection
        for j in 0..cols {
            let x = w.column(j);
            let px = out.expand(&out.project(x));
            let err: f64 = x.iter().zip(&px).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-10 * norm2(x));
        }
    }
}
