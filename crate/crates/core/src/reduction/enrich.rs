use crate::error::{Error, Result};
use crate::linalg::svd::leading_left_singular_projected;
use crate::linalg::{orthonormalize_against, DenseMatrix, ReducedBasis};

/// Singular values below this fraction of `‖X‖_F` are treated as noise.
const MODE_FLOOR: f64 = 1e-12;

/// Outcome of a basis enrichment.
#[derive(Clone, Debug)]
pub struct Enrichment {
    pub basis: ReducedBasis,
    pub added: usize,
    /// Requested directions that were not added, because the projected
    /// snapshots had fewer significant modes or Gram-Schmidt deflated them.
    pub dropped: usize,
}

/// `X − V Vᵀ X`. Modes extracted from the result are re-orthogonalized
/// against `V` before they are appended.
pub fn project_out(v: &ReducedBasis, x: &DenseMatrix) -> DenseMatrix {
    let Some(vm) = v.matrix() else {
        return x.clone();
    };
    let coeffs = vm.t_matmul(x).expect("ambient dimensions agree");
    let back = vm.matmul(&coeffs).expect("ambient dimensions agree");
    x.sub(&back).expect("same shape")
}

fn append_modes(v: &ReducedBasis, modes: Option<&DenseMatrix>, requested: usize) -> Enrichment {
    let before = v.dim();
    let out = orthonormalize_against(v, modes);
    let added = out.basis.dim() - before;
    Enrichment {
        basis: out.basis,
        added,
        dropped: requested - added,
    }
}

fn significant(sigma: &[f64], floor: f64) -> usize {
    sigma.iter().take_while(|&&s| s.is_finite() && s >= floor).count()
}

fn check_rows(v: &ReducedBasis, x: &DenseMatrix) -> Result<()> {
    if x.rows() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            op: "basis enrichment",
            left: (v.ambient_dim(), v.dim()),
            right: x.shape(),
        });
    }
    Ok(())
}

/// Adds up to `r_pod` leading left singular vectors of the part of `x` not
/// yet captured by `v`.
pub fn pod_enrich(v: &ReducedBasis, x: &DenseMatrix, r_pod: usize, seed: u64) -> Result<Enrichment> {
    check_rows(v, x)?;
    if r_pod == 0 {
        return Err(Error::InvalidTolerance {
            value: 0.0,
            expected: "r_pod >= 1",
        });
    }
    let scale = x.frobenius_norm();
    if scale == 0.0 {
        return Ok(append_modes(v, None, r_pod));
    }
    let (modes, sigma) = leading_left_singular_projected(x, v.matrix().as_ref(), r_pod, seed)?;
    let keep = significant(&sigma, MODE_FLOOR * scale);
    let modes = (keep > 0).then(|| modes.leading_columns(keep)).transpose()?;
    Ok(append_modes(v, modes.as_ref(), r_pod))
}

/// Grows the interpolation basis of the nonlinear term with snapshots `f`:
/// at most `budget` leading modes of the part of `f` outside `u`, skipping
/// modes whose singular value is below `rel_floor · ‖f‖_F`.
pub fn grow_nonlinear_basis(u: &ReducedBasis, f: &DenseMatrix, budget: usize, rel_floor: f64, seed: u64) -> Result<Enrichment> {
    check_rows(u, f)?;
    let scale = f.frobenius_norm();
    let floor = rel_floor.max(MODE_FLOOR) * scale;
    if budget == 0 || scale == 0.0 {
        return Ok(append_modes(u, None, budget));
    }
    let (modes, sigma) = leading_left_singular_projected(f, u.matrix().as_ref(), budget, seed)?;
    let keep = significant(&sigma, floor);
    let modes = (keep > 0).then(|| modes.leading_columns(keep)).transpose()?;
    Ok(append_modes(u, modes.as_ref(), budget))
}
