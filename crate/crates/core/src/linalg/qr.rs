use super::matrix::{dot, DenseMatrix};

/// Relative window inside which two residual column norms count as tied.
const TIE_RTOL: f64 = 1e-14;

/// `A·Π = Q·R` with `Q` thin (rows × k) and `R` upper trapezoidal (k × cols),
/// where k = min(rows, cols). `pivots[j]` is the original column placed at
/// position j.
#[derive(Clone, Debug)]
pub struct PivotedQrResult {
    pub q_factor: DenseMatrix,
    pub r_factor: DenseMatrix,
    pub pivots: Vec<usize>,
}

impl PivotedQrResult {
    pub fn r_diagonal(&self) -> Vec<f64> {
        let k = self.r_factor.rows().min(self.r_factor.cols());
        (0..k).map(|i| self.r_factor.get(i, i)).collect()
    }
}

/// Householder QR with greedy column pivoting. Residual column norms are
/// recomputed from scratch at every step instead of downdated, trading a
/// little work for pivots that do not drift on nearly dependent columns.
pub fn pivoted_qr(a: &DenseMatrix) -> PivotedQrResult {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);

    for step in 0..k {
        let norms: Vec<f64> = (step..n).map(|j| tail_norm(w.column(j), step)).collect();
        let best = norms.iter().cloned().fold(0.0f64, f64::max);
        let mut choice = step;
        let mut choice_orig = usize::MAX;
        for (off, &nv) in norms.iter().enumerate() {
            let j = step + off;
            if nv >= best * (1.0 - TIE_RTOL) && perm[j] < choice_orig {
                choice = j;
                choice_orig = perm[j];
            }
        }
        if choice != step {
            w.swap_columns(step, choice);
            perm.swap(step, choice);
        }

        let x = &w.column(step)[step..];
        let alpha_norm = tail_norm(w.column(step), step);
        let mut v = x.to_vec();
        if alpha_norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -alpha_norm } else { alpha_norm };
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        if vnorm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vnorm);

        {
            let col = &mut w.column_mut(step)[step..];
            col[0] = alpha;
            col[1..].iter_mut().for_each(|e| *e = 0.0);
        }
        for j in step + 1..n {
            let col = &mut w.column_mut(j)[step..];
            let s = 2.0 * dot(&v, col);
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        reflectors.push(v);
    }

    let mut r = DenseMatrix::zeros(k, n);
    for j in 0..n {
        for i in 0..=j.min(k - 1) {
            r.set(i, j, w.get(i, j));
        }
    }

    // Q = H_0 H_1 … H_{k-1} applied to the leading k columns of the identity.
    let mut q = DenseMatrix::zeros(m, k);
    for j in 0..k {
        q.set(j, j, 1.0);
    }
    for (step, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for j in 0..k {
            let col = &mut q.column_mut(j)[step..];
            let s = 2.0 * dot(v, col);
            for (c, vi) in col.iter_mut().zip(v) {
                *c -= s * vi;
            }
        }
    }

    PivotedQrResult {
        q_factor: q,
        r_factor: r,
        pivots: perm,
    }
}

fn tail_norm(col: &[f64], from: usize) -> f64 {
    super::matrix::norm2(&col[from..])
}
