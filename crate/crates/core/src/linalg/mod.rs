//! Dense and banded linear algebra used throughout the crate.

pub mod banded;
pub mod kmeans;
pub mod lu;
pub mod matrix;
pub mod orth;
pub mod qr;
pub mod sparse;
pub mod svd;
pub mod truncation;

pub use banded::BandedCholesky;
pub use kmeans::{kmeans, KmeansResult};
pub use lu::{least_squares, DenseLu};
pub use matrix::{axpy, dot, norm2, DenseMatrix};
pub use orth::{orthonormalize_against, Orthonormalized, ReducedBasis};
pub use qr::{pivoted_qr, PivotedQrResult};
pub use sparse::CsrMatrix;
pub use svd::{svd, SvdResult};
pub use truncation::{rank_from_energy, rank_from_rdiag};
