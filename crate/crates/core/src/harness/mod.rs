//! Experiment configuration, runs, matrix files and CSV reports.

mod config;
mod experiment;
mod matfile;
mod report;

pub use config::{Benchmark, ExperimentConfig, GreedySection, ModelSection, ResolvedExperiment, TestSection, TrainingSection};
pub use experiment::{format_float, median, method_label, run_experiment, write_csv, write_selection, write_trace, ExperimentSummary, TRACE_HEADER};
pub use matfile::{decode_matrix, encode_matrix, read_matrix, write_atomic, write_matrix, MAGIC};
pub use report::{emit_report, format_significant, parse_report, read_report, render_report, ResultRow, REPORT_HEADER};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "RBM_NUM_THREADS";

/// Applies the thread cap from the environment, if set. Returns the cap.
pub fn configure_threads() -> crate::Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| crate::Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a second call finds the pool already built, which is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}
