use thiserror::Error;

/// Errors produced by operator construction and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("value is not exactly representable: {0}")]
    NotExact(String),

    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("weight rule lacks supremum structure: {reason} (finite-scan lower bound {scan_lower_bound})")]
    NoSupStructure { reason: String, scan_lower_bound: f64 },

    #[error("matrix is not normal (commutator norm {0:e})")]
    NotNormal(f64),

    #[error("operator is not a contraction (norm {0})")]
    NotContraction(f64),

    #[error("operator norm must be strictly below 1 (norm {0})")]
    NotStrictContraction(f64),

    #[error("matrix is not idempotent (defect {0:e})")]
    NotIdempotent(f64),

    #[error("spectral atom outside the open unit disk: {0}")]
    AtomOutsideDisk(String),

    #[error("identity-part split undefined: {0}")]
    SplitUndefined(String),

    #[error("no kernel information available for {0}")]
    NoKernelInfo(String),

    #[error("role mismatch: {0}")]
    RoleMismatch(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidOperator(_) => "invalid_operator",
            Error::InvalidWeights(_) => "invalid_weights",
            Error::NotExact(_) => "not_exact",
            Error::InvalidPrecision(_) => "invalid_precision",
            Error::Constraint(_) => "constraint",
            Error::NoSupStructure { .. } => "no_sup_structure",
            Error::NotNormal(_) => "not_normal",
            Error::NotContraction(_) => "not_contraction",
            Error::NotStrictContraction(_) => "not_strict_contraction",
            Error::NotIdempotent(_) => "not_idempotent",
            Error::AtomOutsideDisk(_) => "atom_outside_disk",
            Error::SplitUndefined(_) => "split_undefined",
            Error::NoKernelInfo(_) => "no_kernel_info",
            Error::RoleMismatch(_) => "role_mismatch",
            Error::InvalidMeasure(_) => "invalid_measure",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Unsupported(_) => "unsupported",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
