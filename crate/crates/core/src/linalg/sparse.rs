use super::matrix::DenseMatrix;

/// Compressed sparse row matrix with sorted, de-duplicated column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicate entries are summed; explicit zeros are kept out.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) outside {rows}x{cols}");
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        let mut m = Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        };
        m.prune();
        m
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &t)
    }

    fn prune(&mut self) {
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                if self.values[p] != 0.0 {
                    indices.push(self.indices[p]);
                    values.push(self.values[p]);
                }
            }
            indptr[i + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |p| (self.indices[p], self.values[p]))
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                t.push((i, j, v));
            }
        }
        t
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y = A x` without allocating.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
            *yi = self.indices[lo..hi].iter().zip(&self.values[lo..hi]).map(|(&j, v)| v * x[j]).sum();
        }
    }

    pub fn mul_dense(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(b.rows(), self.cols);
        let mut out = DenseMatrix::zeros(self.rows, b.cols());
        for c in 0..b.cols() {
            let y = self.matvec(b.column(c));
            out.column_mut(c).copy_from_slice(&y);
        }
        out
    }

    /// `Σ αᵢ Mᵢ` over matrices of identical shape.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> CsrMatrix {
        let (rows, cols) = (terms[0].1.rows, terms[0].1.cols);
        let mut t = Vec::new();
        for (alpha, m) in terms {
            assert_eq!((m.rows, m.cols), (rows, cols), "shape mismatch in linear combination");
            t.extend(m.triplets().into_iter().map(|(i, j, v)| (i, j, alpha * v)));
        }
        CsrMatrix::from_triplets(rows, cols, &t)
    }

    /// Largest |i − j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.rows)
            .flat_map(|i| self.row_entries(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| self.row_entries(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows.max(1), self.cols.max(1));
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                d.set(i, j, v);
            }
        }
        d
    }

    /// Frobenius norm, which is the spectral norm for a single-row matrix.
    pub fn frobenius_norm(&self) -> f64 {
        super::matrix::norm2(&self.values)
    }
}
