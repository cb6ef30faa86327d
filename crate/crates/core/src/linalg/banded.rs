use super::matrix::dot;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Cholesky factor `A = L Lᵀ` of a symmetric positive definite band matrix.
/// Only the lower band of width `b` is stored, row by row.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
    lt: Vec<f64>,
    /// Reciprocal pivots; multiplying keeps divisions off the dependency chain.
    inv_diag: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.rows();
        if n != a.cols() {
            return Err(Error::DimensionMismatch {
                op: "banded cholesky",
                left: (a.rows(), a.cols()),
                right: (a.cols(), a.rows()),
            });
        }
        let b = a.bandwidth();
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row_entries(i) {
                if j <= i {
                    l[i * w + (j + b - i)] = v;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(b);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(b));
                let mut s = l[i * w + (j + b - i)];
                for k in klo..j {
                    s -= l[i * w + (k + b - i)] * l[j * w + (k + b - j)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::Singular {
                            context: format!("banded cholesky pivot {i} is {s:e}"),
                        });
                    }
                    l[i * w + b] = s.sqrt();
                } else {
                    l[i * w + (j + b - i)] = s / l[j * w + b];
                }
            }
        }
        let inv_diag = (0..n).map(|i| 1.0 / l[i * w + b]).collect();
        // row i of Lᵀ: entries (i, i..i+b), diagonal first
        let mut lt = vec![0.0; n * w];
        for i in 0..n {
            for k in i..(i + w).min(n) {
                lt[i * w + (k - i)] = l[k * w + (i + b - k)];
            }
        }
        Ok(Self { n, b, l, lt, inv_diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        if self.b == 1 {
            return self.solve_tridiagonal(x);
        }
        self.forward_in_place(x);
        let (n, w) = (self.n, self.b + 1);
        for i in (0..n).rev() {
            let hi = (i + w).min(n);
            let row = &self.lt[i * w + 1..i * w + (hi - i)];
            let s = x[i] - dot(row, &x[i + 1..hi]);
            x[i] = s * self.inv_diag[i];
        }
    }

    fn solve_tridiagonal(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let n = self.n;
        if n == 0 {
            return;
        }
        let (l, lt, d) = (&self.l[..2 * n], &self.lt[..2 * n], &self.inv_diag[..n]);
        let mut prev = x[0] * d[0];
        x[0] = prev;
        for i in 1..n {
            prev = (x[i] - l[2 * i] * prev) * d[i];
            x[i] = prev;
        }
        prev *= d[n - 1];
        x[n - 1] = prev;
        for i in (0..n - 1).rev() {
            prev = (x[i] - lt[2 * i + 1] * prev) * d[i];
            x[i] = prev;
        }
    }

    /// Applies `L⁻¹` only.
    pub fn forward_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let (b, w) = (self.b, self.b + 1);
        for i in 0..self.n {
            let lo = i.saturating_sub(b);
            let row = &self.l[i * w + (lo + b - i)..i * w + b];
            let s = x[i] - dot(row, &x[lo..i]);
            x[i] = s * self.inv_diag[i];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_plus_identity(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
            if i + 3 < n {
                t.push((i, i + 3, 0.5));
                t.push((i + 3, i, 0.5));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn solves_against_matvec() {
        let a = laplacian_plus_identity(12);
        let chol = BandedCholesky::factor(&a).unwrap();
        let x_true: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let rhs = a.matvec(&x_true);
        let x = chol.solve(&rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(BandedCholesky::factor(&a), Err(Error::Singular { .. })));
    }
}
