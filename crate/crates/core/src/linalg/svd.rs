use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Thin singular value decomposition `A = U diag(σ) Vᵀ`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub left_vectors: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub right_vectors: DenseMatrix,
}

impl SvdResult {
    pub fn rank_above(&self, rel_tol: f64) -> usize {
        let s1 = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values.iter().filter(|&&s| s > rel_tol * s1).count()
    }
}

pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    let dec = a.as_faer().thin_svd().map_err(|_| Error::SvdNoConvergence {
        rows: a.rows(),
        cols: a.cols(),
    })?;
    let s = dec.S().column_vector();
    let singular_values: Vec<f64> = (0..s.nrows()).map(|i| s[i].max(0.0)).collect();
    Ok(SvdResult {
        left_vectors: DenseMatrix::from_faer(dec.U()),
        singular_values,
        right_vectors: DenseMatrix::from_faer(dec.V()),
    })
}

pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    a.as_faer()
        .singular_values()
        .map(|v| v.into_iter().map(|s| s.max(0.0)).collect())
        .map_err(|_| Error::SvdNoConvergence {
            rows: a.rows(),
            cols: a.cols(),
        })
}

/// Leading `k` left singular vectors and values by seeded randomized subspace
/// iteration. Falls back to the exact thin SVD when the matrix is small.
pub fn leading_left_singular(a: &DenseMatrix, k: usize, seed: u64) -> Result<(DenseMatrix, Vec<f64>)> {
    leading_left_singular_projected(a, None, k, seed)
}

/// As [`leading_left_singular`], for `(I − V Vᵀ) A` with orthonormal `V`.
/// The projected matrix is only formed on the exact-SVD fallback; otherwise
/// the projection is applied to the thin sketch products.
pub fn leading_left_singular_projected(
    a: &DenseMatrix,
    v: Option<&DenseMatrix>,
    k: usize,
    seed: u64,
) -> Result<(DenseMatrix, Vec<f64>)> {
    let (m, n) = a.shape();
    if let Some(v) = v {
        if v.rows() != m {
            return Err(Error::DimensionMismatch {
                op: "projected singular vectors",
                left: v.shape(),
                right: a.shape(),
            });
        }
    }
    let k = k.min(m.min(n)).max(1);
    let sketch = (2 * k + 10).min(m.min(n));
    let af = a.as_faer();
    let vf = v.map(|v| v.as_faer());
    let project = |x: Mat<f64>| match vf {
        Some(vf) => {
            let c = vf.transpose() * &x;
            x - vf * c
        }
        None => x,
    };
    if sketch * 4 >= m.min(n) {
        let full = svd(&DenseMatrix::from_faer(project(af.to_owned())))?;
        let u = full.left_vectors.leading_columns(k)?;
        return Ok((u, full.singular_values[..k].to_vec()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = Mat::<f64>::from_fn(n, sketch, |_, _| rng.sample::<f64, _>(StandardNormal));
    // q is projected again before every product with Aᵀ: its columns are
    // unit length, so any leftover component along V would be amplified by ‖A‖
    let mut q = orth_columns(&project(af * &omega));
    for _ in 0..2 {
        let z = orth_columns(&(af.transpose() * project(q)));
        q = orth_columns(&project(af * &z));
    }
    let q = project(q);
    let b = q.transpose() * af;
    let dec = b.thin_svd().map_err(|_| Error::SvdNoConvergence { rows: m, cols: n })?;
    let u = &q * dec.U();
    let s = dec.S().column_vector();
    let u = DenseMatrix::from_faer(u.as_ref().subcols(0, k));
    Ok((u, (0..k).map(|i| s[i].max(0.0)).collect()))
}

fn orth_columns(m: &Mat<f64>) -> Mat<f64> {
    m.qr().compute_thin_Q()
}
