use super::{InterpolationSelection, SelectorKind, KMEANS_RESTARTS};
use crate::error::{Error, Result};
use crate::linalg::{kmeans, pivoted_qr, rank_from_energy, svd, DenseLu, DenseMatrix, SvdResult};

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

fn leading_basis(f: &DenseMatrix, eps_svd: f64) -> Result<DenseMatrix> {
    leading_from_svd(&svd(f)?, eps_svd)
}

fn leading_from_svd(s: &SvdResult, eps_svd: f64) -> Result<DenseMatrix> {
    let l = rank_from_energy(&s.singular_values, eps_svd)?;
    s.left_vectors.leading_columns(l)
}

/// Greedy DEIM point selection on the columns of `u`, in column order. Each
/// new point is where the current column is worst interpolated by the
/// previous ones; exact ties go to the lowest row.
pub fn deim_indices(u: &DenseMatrix) -> Result<Vec<usize>> {
    let mut indices = vec![argmax_abs(u.column(0))];
    for i in 1..u.cols() {
        let ui = u.column(i);
        let prev = u.leading_columns(i)?;
        let pu = prev.select_rows(&indices)?;
        let rhs: Vec<f64> = indices.iter().map(|&p| ui[p]).collect();
        let alpha = DenseLu::factor(&pu, "deim interpolation matrix")?.solve(&rhs);
        let approx = prev.matvec(&alpha);
        let residual: Vec<f64> = ui.iter().zip(&approx).map(|(a, b)| a - b).collect();
        indices.push(argmax_abs(&residual));
    }
    Ok(indices)
}

pub fn deim(f: &DenseMatrix, eps_svd: f64) -> Result<InterpolationSelection> {
    let basis = leading_basis(f, eps_svd)?;
    let indices = deim_indices(&basis)?;
    Ok(InterpolationSelection {
        basis,
        indices,
        method: SelectorKind::Deim,
    })
}

/// DEIM from a precomputed decomposition. With `transposed` the right
/// singular vectors are used, which selects on the columns of the original
/// matrix.
pub fn deim_from_svd(s: &SvdResult, eps_svd: f64, transposed: bool) -> Result<InterpolationSelection> {
    let basis = if transposed {
        let l = rank_from_energy(&s.singular_values, eps_svd)?;
        s.right_vectors.leading_columns(l)?
    } else {
        leading_from_svd(s, eps_svd)?
    };
    let indices = deim_indices(&basis)?;
    Ok(InterpolationSelection {
        basis,
        indices,
        method: SelectorKind::Deim,
    })
}

/// First `ℓ` pivots of the column-pivoted QR of `Uᵀ`.
pub fn qdeim_indices(u: &DenseMatrix) -> Vec<usize> {
    let f = pivoted_qr(&u.transpose());
    f.pivots[..u.cols()].to_vec()
}

pub fn qdeim(f: &DenseMatrix, eps_svd: f64) -> Result<InterpolationSelection> {
    let basis = leading_basis(f, eps_svd)?;
    let indices = qdeim_indices(&basis);
    Ok(InterpolationSelection {
        basis,
        indices,
        method: SelectorKind::Qdeim,
    })
}

/// Clusters the rows of `U` into ℓ groups and keeps, per group, the row
/// nearest the centroid.
pub fn kdeim(f: &DenseMatrix, eps_svd: f64, seed: u64) -> Result<InterpolationSelection> {
    let basis = leading_basis(f, eps_svd)?;
    if basis.cols() > basis.rows() {
        return Err(Error::TooManyClusters {
            k: basis.cols(),
            rows: basis.rows(),
        });
    }
    let km = kmeans(&basis, basis.cols(), KMEANS_RESTARTS, seed)?;
    Ok(InterpolationSelection {
        basis,
        indices: km.representative_rows,
        method: SelectorKind::Kdeim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_picks_largest_magnitude() {
        let u = DenseMatrix::new(3, 1, vec![0.1, -0.9, 0.3]).unwrap();
        assert_eq!(deim_indices(&u).unwrap(), vec![1]);
        assert_eq!(qdeim_indices(&u), vec![1]);
    }

    #[test]
    fn hand_enumerated_four_by_two() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = DenseMatrix::from_columns(&[vec![s, s, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]]).unwrap();
        // first column ties rows 0 and 1; the residual of e₃ is e₃ itself
        assert_eq!(deim_indices(&u).unwrap(), vec![0, 2]);
    }

    #[test]
    fn canonical_columns_select_their_ones() {
        let u = DenseMatrix::from_fn(6, 3, |i, j| if i == [4, 1, 5][j] { 1.0 } else { 0.0 }).unwrap();
        let mut q = qdeim_indices(&u);
        q.sort();
        assert_eq!(q, vec![1, 4, 5]);
        assert_eq!(deim_indices(&u).unwrap(), vec![4, 1, 5]);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        assert!(deim(&DenseMatrix::zeros(4, 3), 1e-6).is_err());
    }

    #[test]
    fn kdeim_with_full_rank_takes_every_row() {
        let f = DenseMatrix::from_fn(4, 6, |i, j| ((i + 1) as f64 * (j as f64 + 0.3)).cos()).unwrap();
        let s = kdeim(&f, 1e-15, 1).unwrap();
        let mut idx = s.indices.clone();
        idx.sort();
        assert_eq!(s.rank(), 4);
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }
}
