//! Reduced basis offline stage with output-driven training set subsampling.

pub mod error;
pub mod benchmarks;
pub mod greedy;
pub mod harness;
pub mod linalg;
pub mod reduction;
pub mod selector;

pub use error::{Error, Result};
