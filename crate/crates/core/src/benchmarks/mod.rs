//! Full-order models: viscous Burgers, the thermal block and a toy function.

pub mod burgers;
pub mod fom;
pub mod params;
pub mod thermal;
pub mod toy;

pub use burgers::{build_burgers, burgers_training_set, solve_burgers};
pub use fom::{AffineTerm, Axis, Coefficient, Nonlinearity, ParametricFom, SnapshotMatrix, TimeGrid, Trajectory};
pub use params::{GridSpacing, ParameterDomain, ParameterSample, Provenance, TrainingSet};
pub use thermal::{build_thermal, solve_thermal, thermal_training_set};
pub use toy::{toy_eval, toy_snapshots};
