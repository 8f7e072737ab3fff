use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the solvers, instance generators, and harness.
///
/// Column and row indices are zero-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error(
        "system has {rows} rows but {cols} columns; at least as many rows as columns are required"
    )]
    Underdetermined { rows: usize, cols: usize },

    #[error("vectors and matrices must have at least one entry")]
    Empty,

    #[error("non-finite entry at position {index}")]
    NonFinite { index: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{}", match column {
        Some(c) => format!("singular pivot at column {c}"),
        None => "singular pivot".to_string(),
    })]
    SingularPivot { column: Option<usize> },

    #[error("summation ratio denominator cancels to zero")]
    ZeroDenominator,

    #[error("size guard exceeded: {size} > {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("row {row} is identically zero")]
    ZeroRow { row: usize },

    #[error("Gram matrix is numerically singular")]
    SingularGram,

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pivot count audit failed for n={n}, m={m}: expected {expected}, observed {observed}")]
    AuditFailure {
        n: usize,
        m: usize,
        expected: u64,
        observed: u64,
    },

    #[error("instance seed {seed}: {source}")]
    Instance { seed: u64, source: Box<Error> },
}

impl Error {
    pub(crate) fn singular(column: usize) -> Self {
        Error::SingularPivot {
            column: Some(column),
        }
    }

    /// Attach a column index to a bare `SingularPivot`.
    pub(crate) fn at_column(self, column: usize) -> Self {
        match self {
            Error::SingularPivot { column: None } => Error::singular(column),
            other => other,
        }
    }

    /// Short machine-readable tag, used in CSV status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Underdetermined { .. } => "underdetermined",
            Error::Empty => "empty",
            Error::NonFinite { .. } => "non_finite",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::SingularPivot { .. } => "singular_pivot",
            Error::ZeroDenominator => "zero_denominator",
            Error::SizeGuard { .. } => "size_guard",
            Error::ZeroRow { .. } => "zero_row",
            Error::SingularGram => "singular_gram",
            Error::UnknownMethod(_) => "unknown_method",
            Error::InvalidConfig(_) => "invalid_config",
            Error::AuditFailure { .. } => "audit_failure",
            Error::Instance { source, .. } => source.code(),
        }
    }
}
