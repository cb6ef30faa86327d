use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimensions must be at least 1x1, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("data length {len} does not match {rows}x{cols}")]
    LengthMismatch { rows: usize, cols: usize, len: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("svd did not converge for a {rows}x{cols} matrix")]
    SvdNoConvergence { rows: usize, cols: usize },
    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    EigNoConvergence { dim: usize },
    #[error("zero spectrum")]
    ZeroSpectrum,
    #[error("rank-zero matrix")]
    RankZero,
    #[error("tolerance {value} outside of {expected}")]
    InvalidTolerance { value: f64, expected: &'static str },
    #[error("cannot form {k} clusters from {rows} rows")]
    TooManyClusters { k: usize, rows: usize },
    #[error("singular matrix in {context}")]
    Singular { context: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("parameter {values:?} outside of the admissible domain")]
    ParameterOutOfDomain { values: Vec<f64> },
    #[error("duplicate parameter sample at position {index}")]
    DuplicateSample { index: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("oversampling budget {m} invalid for base size {base} and {rows} rows")]
    InvalidBudget { m: usize, base: usize, rows: usize },
    #[error("selector returned no indices")]
    EmptySelection,
    #[error("burgers state became negative ({value:e}) at step {step} for mu = {mu:?}")]
    NegativeTransport { mu: Vec<f64>, step: usize, value: f64 },
    #[error("solver failure at parameter #{index}: {source}")]
    AtParameter {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("bad magic")]
    BadMagic,
    #[error("truncated matrix file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("matrix size overflow: {rows}x{cols}")]
    SizeOverflow { rows: u64, cols: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyMatrix { .. } => "empty_matrix",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SvdNoConvergence { .. } => "svd_no_convergence",
            Error::EigNoConvergence { .. } => "eig_no_convergence",
            Error::ZeroSpectrum => "zero_spectrum",
            Error::RankZero => "rank_zero",
            Error::InvalidTolerance { .. } => "invalid_tolerance",
            Error::TooManyClusters { .. } => "too_many_clusters",
            Error::Singular { .. } => "singular",
            Error::InvalidModel(_) => "invalid_model",
            Error::ParameterOutOfDomain { .. } => "parameter_out_of_domain",
            Error::DuplicateSample { .. } => "duplicate_sample",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidBudget { .. } => "invalid_budget",
            Error::EmptySelection => "empty_selection",
            Error::NegativeTransport { .. } => "negative_transport",
            Error::AtParameter { .. } => "at_parameter",
            Error::BadMagic => "bad_magic",
            Error::Truncated { .. } => "truncated",
            Error::SizeOverflow { .. } => "size_overflow",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
