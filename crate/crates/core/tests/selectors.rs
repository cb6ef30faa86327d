use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rbm_core::benchmarks::toy::toy_snapshots;
use rbm_core::linalg::svd::singular_values;
use rbm_core::linalg::*;
use rbm_core::selector::*;

fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
}

/// Snapshot matrix of exact rank `rank`.
fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> DenseMatrix {
    random(rows, rank, seed).matmul(&random(rank, cols, seed + 100)).unwrap()
}

fn orthonormal(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    svd(&random(rows, cols, seed)).unwrap().left_vectors.leading_columns(cols).unwrap()
}

/// `U (PᵀU)⁻¹ Pᵀ g` for a square selection.
fn interpolate(sel: &InterpolationSelection, g: &[f64]) -> Vec<f64> {
    let pu = sel.selected_rows();
    let rhs: Vec<f64> = sel.indices.iter().map(|&i| g[i]).collect();
    let alpha = DenseLu::factor(&pu, "test").unwrap().solve(&rhs);
    sel.basis.matvec(&alpha)
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Checks `‖g − ĝ‖ ≤ ‖(PᵀU)⁻¹‖₂ ‖g − UUᵀg‖` for 100 seeded vectors.
fn check_deim_bound(sel: &InterpolationSelection, seed: u64) {
    let u = &sel.basis;
    let inv_norm = 1.0 / singular_values(&sel.selected_rows()).unwrap().last().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let g: Vec<f64> = (0..u.rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = diff_norm(&g, &interpolate(sel, &g));
        let proj = u.matvec(&u.t_matvec(&g));
        let rhs = inv_norm * diff_norm(&g, &proj);
        assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12, "{lhs} > {rhs}");
    }
}

#[test]
fn deim_bound_for_square_selectors() {
    let f = low_rank(60, 30, 6, 1);
    for sel in [deim(&f, 1e-10).unwrap(), qdeim(&f, 1e-10).unwrap(), kdeim(&f, 1e-10, 3).unwrap()] {
        assert_eq!(sel.rank(), 6);
        assert!(sel.is_square());
        check_deim_bound(&sel, 42);
    }
}

#[test]
fn interpolation_is_exact_on_the_span() {
    let f = low_rank(50, 20, 5, 2);
    for sel in [deim(&f, 1e-10).unwrap(), qdeim(&f, 1e-10).unwrap()] {
        let coeffs = [0.3, -1.2, 0.7, 2.0, -0.1];
        let g = sel.basis.matvec(&coeffs);
        let back = interpolate(&sel, &g);
        assert!(diff_norm(&g, &back) <= 1e-10 * norm2(&g));
    }
}

#[test]
fn single_column_qdeim_matches_deim() {
    let u = DenseMatrix::new(5, 1, vec![0.1, -0.3, 0.8, -0.5, 0.2]).unwrap();
    assert_eq!(qdeim_indices(&u), deim_indices(&u).unwrap());
    assert_eq!(qdeim_indices(&u), vec![2]);
}

#[test]
fn gappy_eigenvector_picks_match_exhaustive_one_step_search() {
    let u = orthonormal(20, 3, 4);
    let base = InterpolationSelection {
        indices: qdeim_indices(&u),
        basis: u.clone(),
        method: SelectorKind::Qdeim,
    };
    let (out, history) = gappy_eigenvector_trace(&base, 6).unwrap();
    assert_eq!(out.indices[..3], base.indices[..]);
    for step in 3..6 {
        let prefix = &out.indices[..step];
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for cand in 0..20 {
            if prefix.contains(&cand) {
                continue;
            }
            let mut trial = prefix.to_vec();
            trial.push(cand);
            let s = *singular_values(&u.select_rows(&trial).unwrap()).unwrap().last().unwrap();
            if s > best.1 {
                best = (cand, s);
            }
        }
        assert_eq!(out.indices[step], best.0, "step {step}");
    }
    assert!(history.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn kdeim_splits_well_separated_groups() {
    // rows 0..5 near (1, 0), rows 5..10 near (0, 1)
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = DenseMatrix::from_fn(10, 8, |i, j| {
        let base = if i < 5 { [1.0, 0.0] } else { [0.0, 1.0] };
        base[j % 2] * (1.0 + j as f64) + 1e-3 * rng.gen_range(-1.0..1.0)
    })
    .unwrap();
    let sel = kdeim(&f, 1e-3, 2).unwrap();
    assert_eq!(sel.len(), 2);
    let groups: Vec<bool> = sel.indices.iter().map(|&i| i < 5).collect();
    assert!(groups.contains(&true) && groups.contains(&false), "{:?}", sel.indices);
}

#[test]
fn gappy_clustering_representatives_are_one_per_cluster() {
    let f = low_rank(40, 15, 4, 8);
    let sel = gappy_clustering(&f, 1e-10, 8, 5).unwrap();
    assert_eq!(sel.len(), 8);
    sel.check().unwrap();
    let km = kmeans(&sel.basis, 8, KMEANS_RESTARTS, 5).unwrap();
    assert_eq!(km.representative_rows, sel.indices);
    for (c, &r) in km.representative_rows.iter().enumerate() {
        assert_eq!(km.assignments[r], c);
        let dist = |i: usize| (0..sel.rank()).map(|d| (sel.basis.get(i, d) - km.centroids.get(c, d)).powi(2)).sum::<f64>();
        for i in (0..40).filter(|&i| km.assignments[i] == c) {
            assert!(dist(r) <= dist(i));
        }
    }
    let same_budget = gappy_clustering(&f, 1e-10, 4, 5).unwrap();
    assert_eq!(same_budget.len(), kdeim(&f, 1e-10, 5).unwrap().len());
}

#[test]
fn pivot_selection_agrees_with_qdeim_on_orthonormal_rows() {
    let u = orthonormal(30, 5, 12);
    let qr = qr_pivot_select(&u, 1e-12).unwrap();
    assert_eq!(qr.indices, qdeim_indices(&u));
}

#[test]
fn qdeim_on_toy_gives_an_invertible_block() {
    let f = toy_snapshots();
    let sel = qdeim(&f.matrix, 1e-10).unwrap();
    assert!(sel.is_square());
    let smin = *singular_values(&sel.selected_rows()).unwrap().last().unwrap();
    let inv_norm = 1.0 / smin;
    assert!(inv_norm.is_finite() && inv_norm < 1e4, "‖(PᵀU)⁻¹‖ = {inv_norm}");
    check_deim_bound(&sel, 7);
}

#[test]
fn every_selector_returns_distinct_in_range_indices() {
    let y = low_rank(30, 12, 4, 21);
    let cfg = SelectorConfig { eps_svd: 1e-8, eps_qr: 1e-8, oversample: 2.0, seed: 1 };
    for kind in SelectorKind::ALL {
        let sel = select(kind, &y, &cfg).unwrap();
        sel.check().unwrap();
        if kind.is_oversampled() {
            assert_eq!(sel.len(), 8, "{kind}");
        } else {
            assert_eq!(sel.len(), 4, "{kind}");
            let smin = *singular_values(&sel.selected_rows()).unwrap().last().unwrap();
            assert!(smin > 1e-10, "{kind}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gappy_growth_never_lowers_sigma_min(seed in 0u64..500, rank in 1usize..5, extra in 1usize..8) {
        let u = orthonormal(25, rank, seed);
        let base = InterpolationSelection { indices: qdeim_indices(&u), basis: u, method: SelectorKind::Qdeim };
        let (_, history) = gappy_eigenvector_trace(&base, rank + extra).unwrap();
        prop_assert!(history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn deim_bound_holds_for_random_bases(seed in 0u64..500, rank in 1usize..6) {
        let u = orthonormal(30, rank, seed);
        let sel = InterpolationSelection { indices: deim_indices(&u).unwrap(), basis: u, method: SelectorKind::Deim };
        check_deim_bound(&sel, seed);
    }
}
