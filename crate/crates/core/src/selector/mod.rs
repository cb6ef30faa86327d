//! Row selection on snapshot bases: DEIM and its QR, clustering and
//! oversampled variants, plus pivoted-QR selection on output snapshots.
//!
//! Every selector returns row indices of the matrix it is handed. When that
//! matrix has one row per training parameter the indices are parameter
//! indices and feed [`subsample_training_set`].

mod deim;
mod gappy;

use serde::{Deserialize, Serialize};

pub use deim::{deim, deim_from_svd, deim_indices, kdeim, qdeim, qdeim_indices};
pub use gappy::{gappy_clustering, gappy_eigenvector, gappy_eigenvector_trace};

use crate::benchmarks::{Provenance, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::{pivoted_qr, rank_from_rdiag, svd, DenseMatrix};

pub const KMEANS_RESTARTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectorKind {
    Qr,
    Deim,
    Qdeim,
    Kdeim,
    GappyEig,
    GappyClust,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 6] = [
        SelectorKind::Qr,
        SelectorKind::Deim,
        SelectorKind::Qdeim,
        SelectorKind::Kdeim,
        SelectorKind::GappyEig,
        SelectorKind::GappyClust,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SelectorKind::Qr => "qr",
            SelectorKind::Deim => "deim",
            SelectorKind::Qdeim => "qdeim",
            SelectorKind::Kdeim => "kdeim",
            SelectorKind::GappyEig => "gappy-eig",
            SelectorKind::GappyClust => "gappy-clust",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown selector '{s}'")))
    }

    pub fn is_oversampled(&self) -> bool {
        matches!(self, SelectorKind::GappyEig | SelectorKind::GappyClust)
    }
}

impl std::fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Selected rows `indices` of an orthonormal basis `basis`. `rank` is the
/// number of basis columns ℓ; `indices.len()` is ℓ, or more when
/// oversampled.
#[derive(Clone, Debug)]
pub struct InterpolationSelection {
    pub basis: DenseMatrix,
    pub indices: Vec<usize>,
    pub method: SelectorKind,
}

impl InterpolationSelection {
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.indices.len() == self.rank()
    }

    /// `PᵀU`, the selected rows of the basis.
    pub fn selected_rows(&self) -> DenseMatrix {
        self.basis.select_rows(&self.indices).expect("indices validated on construction")
    }

    pub fn check(&self) -> Result<()> {
        let n = self.basis.rows();
        if self.indices.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut seen = vec![false; n];
        for &i in &self.indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if seen[i] {
                return Err(Error::DuplicateSample { index: i });
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Tolerances and budget shared by all selectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectorConfig {
    pub eps_svd: f64,
    pub eps_qr: f64,
    /// Oversampled selections use `m = ceil(oversample · ℓ)` rows.
    pub oversample: f64,
    pub seed: u64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            eps_svd: 1e-6,
            eps_qr: 1e-6,
            oversample: 2.0,
            seed: 0,
        }
    }
}

pub fn oversampled_budget(rank: usize, factor: f64, rows: usize) -> Result<usize> {
    if !(factor >= 1.0) || !factor.is_finite() {
        return Err(Error::InvalidBudget {
            m: 0,
            base: rank,
            rows,
        });
    }
    Ok(((rank as f64 * factor).ceil() as usize).min(rows).max(rank))
}

/// Runs the selector `kind` on the rows of `y`.
pub fn select(kind: SelectorKind, y: &DenseMatrix, cfg: &SelectorConfig) -> Result<InterpolationSelection> {
    let sel = match kind {
        SelectorKind::Qr => qr_pivot_select(y, cfg.eps_qr)?,
        SelectorKind::Deim => deim(y, cfg.eps_svd)?,
        SelectorKind::Qdeim => qdeim(y, cfg.eps_svd)?,
        SelectorKind::Kdeim => kdeim(y, cfg.eps_svd, cfg.seed)?,
        SelectorKind::GappyEig => {
            let base = qdeim(y, cfg.eps_svd)?;
            let m = oversampled_budget(base.rank(), cfg.oversample, y.rows())?;
            gappy_eigenvector(&base, m)?
        }
        SelectorKind::GappyClust => {
            let probe = svd(y)?;
            let l = crate::linalg::rank_from_energy(&probe.singular_values, cfg.eps_svd)?;
            let m = oversampled_budget(l, cfg.oversample, y.rows())?;
            gappy::gappy_clustering_from_svd(&probe, cfg.eps_svd, m, cfg.seed)?
        }
    };
    sel.check()?;
    Ok(sel)
}

/// Pivoted QR on `Yᵀ`: the first `h` pivots, with `h` read off the decay of
/// the R diagonal. The attached basis is an orthonormal basis of the
/// leading `h` pivot directions expressed in row space, so the selected rows
/// form a square, invertible block.
pub fn qr_pivot_select(y: &DenseMatrix, eps_qr: f64) -> Result<InterpolationSelection> {
    let f = pivoted_qr(&y.transpose());
    let h = rank_from_rdiag(&f.r_factor, eps_qr)?;
    let indices = f.pivots[..h].to_vec();
    // Y Q_h = Π R[:h, :]ᵀ, whose columns span the same space as the leading
    // h pivot directions.
    let yq = y.matmul(&f.q_factor.leading_columns(h)?)?;
    let basis = crate::linalg::DenseMatrix::from_faer(yq.as_faer().qr().compute_thin_Q());
    Ok(InterpolationSelection {
        basis,
        indices,
        method: SelectorKind::Qr,
    })
}

/// Training samples at the selected indices, in fine-set order.
pub fn subsample_training_set(fine: &TrainingSet, selection: &InterpolationSelection) -> Result<TrainingSet> {
    if selection.indices.is_empty() {
        return Err(Error::EmptySelection);
    }
    fine.subset(&selection.indices, Provenance::Subsampled)
}
