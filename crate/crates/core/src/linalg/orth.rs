use super::matrix::{axpy, dot, norm2, DenseMatrix};

/// Orthonormal column basis of dimension `r` in an `n`-dimensional space.
/// `r` may be zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBasis {
    n: usize,
    data: Vec<f64>,
}

impl ReducedBasis {
    pub fn empty(n: usize) -> Self {
        Self { n, data: Vec::new() }
    }

    /// Wraps columns that the caller guarantees to be orthonormal.
    pub fn from_orthonormal(m: &DenseMatrix) -> Self {
        Self {
            n: m.rows(),
            data: m.data().to_vec(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_orthonormal(&DenseMatrix::identity(n))
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.data.len().checked_div(self.n).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn matrix(&self) -> Option<DenseMatrix> {
        if self.is_empty() {
            None
        } else {
            Some(DenseMatrix::new(self.n, self.dim(), self.data.clone()).expect("basis entries are finite"))
        }
    }

    /// `V z`.
    pub fn expand(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.dim());
        let mut x = vec![0.0; self.n];
        for (j, &zj) in z.iter().enumerate() {
            axpy(zj, self.column(j), &mut x);
        }
        x
    }

    /// `Vᵀ x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|j| dot(self.column(j), x)).collect()
    }

    /// `max |VᵀV − I|`, zero for the empty basis.
    pub fn orthogonality_error(&self) -> f64 {
        let r = self.dim();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in 0..=i {
                let g = dot(self.column(i), self.column(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    fn push(&mut self, col: &[f64]) {
        self.data.extend_from_slice(col);
    }
}

/// Result of appending new directions to a basis.
#[derive(Clone, Debug)]
pub struct Orthonormalized {
    pub basis: ReducedBasis,
    pub dropped: usize,
}

/// Appends the columns of `w` to `v` by classical Gram-Schmidt with one full
/// re-orthogonalization pass. A column whose norm after projection falls
/// below `1e-12 · (norm before + 1)` is dropped and counted.
pub fn orthonormalize_against(v: &ReducedBasis, w: Option<&DenseMatrix>) -> Orthonormalized {
    let mut basis = v.clone();
    let mut dropped = 0;
    let Some(w) = w else {
        return Orthonormalized { basis, dropped };
    };
    assert_eq!(w.rows(), v.ambient_dim(), "ambient dimension mismatch");
    for j in 0..w.cols() {
        let mut x = w.column(j).to_vec();
        let pre = norm2(&x);
        for _ in 0..2 {
            let coeffs = basis.project(&x);
            for (c, &a) in coeffs.iter().enumerate() {
                let col = basis.column(c).to_vec();
                axpy(-a, &col, &mut x);
            }
        }
        let post = norm2(&x);
        if post < 1e-12 * (pre + 1.0) {
            dropped += 1;
            continue;
        }
        x.iter_mut().for_each(|e| *e /= post);
        basis.push(&x);
    }
    Orthonormalized { basis, dropped }
}
