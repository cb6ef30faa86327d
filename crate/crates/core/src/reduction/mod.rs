//! Projection-based reduced models: Galerkin operators with DEIM for the
//! nonlinear term, reduced time stepping, POD enrichment, output snapshots,
//! error indicators and true-error metrics.

mod enrich;
mod indicator;
mod output;
mod rom;

pub use crate::linalg::ReducedBasis;
pub use enrich::{grow_nonlinear_basis, pod_enrich, project_out, Enrichment};
pub use indicator::{direct_residual_norms, error_indicator, ErrorEstimate, ErrorIndicator, IndicatorMode};
pub use output::{
    assemble_output_matrix, output_row, parameter_error, time_averaged_error, true_output_error, OutputSnapshotMatrix,
    OutputSolver, OutputSource, TrueErrorReport,
};
pub use rom::{galerkin_project, rom_solve, HyperReduction, ReducedTrajectory, RomOperators};

pub(crate) use output::annotate;
