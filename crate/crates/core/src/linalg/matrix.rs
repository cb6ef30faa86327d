use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Dense real matrix stored in column-major order.
///
/// Construction rejects empty shapes and non-finite entries, so every
/// `DenseMatrix` in circulation is at least 1x1 and finite.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows,
                col: pos / rows,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Builds a matrix from row slices. Convenient for small literals.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::LengthMismatch {
                rows: nrows,
                cols: ncols,
                len: rows.iter().map(|r| r.len()).sum(),
            });
        }
        Self::from_fn(nrows, ncols, |i, j| rows[i][j])
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            if c.len() != rows {
                return Err(Error::LengthMismatch {
                    rows,
                    cols,
                    len: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::new(rows, cols, data)
    }

    /// Zero matrix. Panics on an empty shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "DenseMatrix::zeros with empty shape");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[j * self.rows + i] = value;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let rows = self.rows;
        let (lo, hi) = (a.min(b), a.max(b));
        let (left, right) = self.data.split_at_mut(hi * rows);
        left[lo * rows..(lo + 1) * rows].swap_with_slice(&mut right[..rows]);
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.data[i * self.cols + j] = self.data[j * self.rows + i];
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self::from_faer(self.as_faer() * other.as_faer()))
    }

    /// `selfᵀ · other`.
    pub fn t_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                op: "t_matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self::from_faer(self.as_faer().transpose() * other.as_faer()))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, aij) in y.iter_mut().zip(self.column(j)) {
                    *yi += aij * xj;
                }
            }
        }
        y
    }

    /// `selfᵀ · x`.
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.column(j), x)).collect()
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op: "sub",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rows `indices` of the matrix, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<DenseMatrix> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.rows) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.rows,
            });
        }
        Self::from_fn(indices.len(), self.cols, |i, j| self.get(indices[i], j))
    }

    pub fn select_columns(&self, indices: &[usize]) -> Result<DenseMatrix> {
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.cols,
            });
        }
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for &j in indices {
            data.extend_from_slice(self.column(j));
        }
        Self::new(self.rows, indices.len(), data)
    }

    /// Leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> Result<DenseMatrix> {
        let k = k.min(self.cols);
        Self::new(self.rows, k, self.data[..self.rows * k].to_vec())
    }

    pub fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.rows, self.cols)
    }

    pub(crate) fn from_faer(m: impl AsMatRef) -> Self {
        let m = m.as_mat_ref();
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(m[(i, j)]);
            }
        }
        Self { rows, cols, data }
    }
}

pub(crate) trait AsMatRef {
    fn as_mat_ref(&self) -> MatRef<'_, f64>;
}

impl AsMatRef for Mat<f64> {
    fn as_mat_ref(&self) -> MatRef<'_, f64> {
        self.as_ref()
    }
}

impl AsMatRef for MatRef<'_, f64> {
    fn as_mat_ref(&self) -> MatRef<'_, f64> {
        *self
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    // scaled to avoid overflow on large snapshot entries
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = a.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
