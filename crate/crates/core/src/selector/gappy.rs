use super::{InterpolationSelection, SelectorKind, KMEANS_RESTARTS};
use crate::error::{Error, Result};
use crate::linalg::svd::singular_values;
use crate::linalg::{kmeans, rank_from_energy, svd, DenseMatrix, SvdResult};

fn sigma_min(rows: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(rows)?.last().copied().unwrap_or(0.0))
}

/// Grows `base` one row at a time up to `m` rows, each time adding the row
/// that maximizes the smallest singular value of the selected block. Every
/// unselected row is tried.
pub fn gappy_eigenvector(base: &InterpolationSelection, m: usize) -> Result<InterpolationSelection> {
    Ok(gappy_eigenvector_trace(base, m)?.0)
}

/// Like [`gappy_eigenvector`], also returning `σ_min` of the selected block
/// before the first append and after every append.
pub fn gappy_eigenvector_trace(base: &InterpolationSelection, m: usize) -> Result<(InterpolationSelection, Vec<f64>)> {
    let u = &base.basis;
    let n = u.rows();
    if m > n || m < base.len() {
        return Err(Error::InvalidBudget {
            m,
            base: base.len(),
            rows: n,
        });
    }
    base.check()?;
    let mut indices = base.indices.clone();
    let mut chosen = vec![false; n];
    for &i in &indices {
        chosen[i] = true;
    }
    let mut history = vec![sigma_min(&u.select_rows(&indices)?)?];
    while indices.len() < m {
        let mut best: Option<(usize, f64)> = None;
        let mut trial = indices.clone();
        trial.push(0);
        for cand in 0..n {
            if chosen[cand] {
                continue;
            }
            *trial.last_mut().expect("non-empty") = cand;
            let s = sigma_min(&u.select_rows(&trial)?)?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((cand, s));
            }
        }
        let (pick, s) = best.expect("m <= n leaves a candidate");
        chosen[pick] = true;
        indices.push(pick);
        history.push(s);
    }
    Ok((
        InterpolationSelection {
            basis: base.basis.clone(),
            indices,
            method: SelectorKind::GappyEig,
        },
        history,
    ))
}

/// k-means with `k = m` on the rows of the rank-ℓ basis of `f`.
pub fn gappy_clustering(f: &DenseMatrix, eps_svd: f64, m: usize, seed: u64) -> Result<InterpolationSelection> {
    gappy_clustering_from_svd(&svd(f)?, eps_svd, m, seed)
}

pub(super) fn gappy_clustering_from_svd(s: &SvdResult, eps_svd: f64, m: usize, seed: u64) -> Result<InterpolationSelection> {
    let l = rank_from_energy(&s.singular_values, eps_svd)?;
    let basis = s.left_vectors.leading_columns(l)?;
    let n = basis.rows();
    if m < l || m > n {
        return Err(Error::InvalidBudget { m, base: l, rows: n });
    }
    let km = kmeans(&basis, m, KMEANS_RESTARTS, seed)?;
    Ok(InterpolationSelection {
        basis,
        indices: km.representative_rows,
        method: SelectorKind::GappyClust,
    })
}
