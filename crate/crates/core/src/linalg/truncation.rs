use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance {
            value: eps,
            expected: "(0, 1)",
        })
    }
}

/// Smallest ℓ whose discarded tail `Σ_{i>ℓ} σ_i` is a fraction below `eps`
/// of the total `Σ σ_i`.
pub fn rank_from_energy(sigma: &[f64], eps: f64) -> Result<usize> {
    check_eps(eps)?;
    // suffix sums accumulated from the small end keep the tail accurate
    let mut tails = vec![0.0; sigma.len() + 1];
    for i in (0..sigma.len()).rev() {
        tails[i] = tails[i + 1] + sigma[i].abs();
    }
    let total = tails[0];
    if total <= 0.0 {
        return Err(Error::ZeroSpectrum);
    }
    Ok((1..=sigma.len())
        .find(|&l| tails[l] / total < eps)
        .unwrap_or(sigma.len()))
}

/// Smallest q with `|R(q+1,q+1)| / |R(1,1)| < eps` (one-based), or the full
/// diagonal length when no entry drops below the threshold.
pub fn rank_from_rdiag(r: &DenseMatrix, eps: f64) -> Result<usize> {
    let k = r.rows().min(r.cols());
    let r11 = r.get(0, 0).abs();
    if r11 == 0.0 {
        return Err(Error::RankZero);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidTolerance {
            value: eps,
            expected: "(0, inf)",
        });
    }
    Ok((1..k).find(|&q| r.get(q, q).abs() / r11 < eps).unwrap_or(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr::pivoted_qr;
    use crate::linalg::svd::svd;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> DenseMatrix {
        DenseMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 }).unwrap()
    }

    #[test]
    fn energy_examples() {
        assert_eq!(rank_from_energy(&[10.0, 1.0, 1e-9], 1e-6).unwrap(), 2);
        assert_eq!(rank_from_energy(&[1.0, 1.0, 1.0, 1.0], 0.5).unwrap(), 3);
        assert_eq!(rank_from_energy(&[5.0], 0.3).unwrap(), 1);
        assert!(matches!(rank_from_energy(&[0.0, 0.0], 0.1), Err(Error::ZeroSpectrum)));
        assert!(rank_from_energy(&[1.0], 1.5).is_err());
    }

    #[test]
    fn rdiag_examples() {
        assert_eq!(rank_from_rdiag(&diag(&[1.0, 1e-3, 1e-12]), 1e-6).unwrap(), 2);
        assert_eq!(rank_from_rdiag(&diag(&[4.0, 2.0, 1.0]), 1e-6).unwrap(), 3);
        assert!(matches!(rank_from_rdiag(&diag(&[0.0, 1.0]), 1e-6), Err(Error::RankZero)));
    }

    #[test]
    fn rdiag_rank_matches_svd_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let l = DenseMatrix::from_fn(6, 3, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let r = DenseMatrix::from_fn(3, 6, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let a = l.matmul(&r).unwrap();
        let h = rank_from_rdiag(&pivoted_qr(&a).r_factor, 1e-8).unwrap();
        let oracle = svd(&a).unwrap().rank_above(1e-8);
        assert_eq!(h, 3);
        assert_eq!(h, oracle);
    }

    proptest! {
        #[test]
        fn energy_rank_is_monotone(
            mut sigma in proptest::collection::vec(0.0f64..10.0, 1..20),
            e1 in 1e-12f64..0.99,
            e2 in 1e-12f64..0.99,
        ) {
            sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
            prop_assume!(sigma[0] > 0.0);
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let l_lo = rank_from_energy(&sigma, lo).unwrap();
            let l_hi = rank_from_energy(&sigma, hi).unwrap();
            prop_assert!(l_lo >= l_hi);
            let total: f64 = sigma.iter().sum();
            let tail = |l: usize| sigma[l..].iter().sum::<f64>() / total;
            prop_assert!(tail(l_lo) < lo);
            if l_lo > 1 {
                prop_assert!(tail(l_lo - 1) >= lo * (1.0 - 1e-12));
            }
        }

        #[test]
        fn rdiag_rank_is_monotone(
            d in proptest::collection::vec(1e-14f64..1.0, 1..12),
            e1 in 1e-14f64..1.0,
            e2 in 1e-14f64..1.0,
        ) {
            let r = diag(&d);
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(rank_from_rdiag(&r, lo).unwrap() >= rank_from_rdiag(&r, hi).unwrap());
        }
    }
}
