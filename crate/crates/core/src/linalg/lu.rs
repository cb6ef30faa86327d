use faer::linalg::solvers::{PartialPivLu, Solve, SolveLstsq};
use faer::Mat;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Partial-pivoting LU of a small square matrix, rejected when a pivot is
/// negligible relative to the largest one.
pub struct DenseLu {
    n: usize,
    lu: PartialPivLu<f64>,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix, context: &str) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch {
                op: "lu",
                left: a.shape(),
                right: (a.cols(), a.rows()),
            });
        }
        let n = a.rows();
        let lu = a.as_faer().partial_piv_lu();
        let u = lu.U();
        let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].abs()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(dmin > dmax * n as f64 * f64::EPSILON) || !dmin.is_finite() {
            return Err(Error::Singular {
                context: context.to_string(),
            });
        }
        Ok(Self { n, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(&mut x);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(b.rows(), self.n);
        let mut x = b.as_faer().to_owned();
        self.lu.solve_in_place(&mut x);
        DenseMatrix::from_faer(x)
    }

    /// `(Aᵀ)⁻¹ B`.
    pub fn solve_transpose_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(b.rows(), self.n);
        let mut x = b.as_faer().to_owned();
        self.lu.solve_transpose_in_place(&mut x);
        DenseMatrix::from_faer(x)
    }

    pub fn inverse(&self) -> DenseMatrix {
        self.solve_matrix(&DenseMatrix::identity(self.n))
    }
}

/// Least-squares solution of the overdetermined system `A X = B` with `A`
/// of full column rank.
pub fn least_squares(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() || a.rows() < a.cols() {
        return Err(Error::DimensionMismatch {
            op: "least squares",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let x = a.as_faer().qr().solve_lstsq(b.as_faer());
    let x = DenseMatrix::from_faer(x.as_ref().subrows(0, a.cols()));
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            context: "least squares".into(),
        });
    }
    Ok(x)
}
