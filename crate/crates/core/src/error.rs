//! Error type shared by all engine modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the engine.
///
/// Usage errors (bad shapes, violated preconditions, malformed input) are
/// distinguished from integrity errors (bundled data that fails its own
/// internal cross-checks) and numeric diagnostics (sampling or clustering
/// procedures that could not reach a well-separated configuration).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyShape,

    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },

    #[error("rows have different lengths: {left} vs {right}")]
    RowLengthMismatch { left: usize, right: usize },

    #[error("line {line}, column {col}: {reason}")]
    Parse { line: usize, col: usize, reason: String },

    #[error("rows {i} and {j} are not orthogonal")]
    NotOrthogonal { i: usize, j: usize },

    #[error("matrix is extendible; this operation requires an unextendible matrix")]
    NotUnextendible,

    #[error("invalid identification: {0}")]
    BadIdentification(String),

    #[error("column {col}: letter '{letter}' has no assigned vector")]
    MissingAssignment { col: usize, letter: char },

    #[error("column {col}: vectors assigned to '{letter}' and '{letter}'' are not perpendicular")]
    InvolutionViolation { col: usize, letter: char },

    #[error("numeric procedure failed: {0}")]
    Numeric(String),

    #[error("data integrity: {0}")]
    Integrity(String),

    #[error("search budget of {budget} node expansions exhausted ({expanded} expanded, {found} classes found so far)")]
    BudgetExhausted {
        budget: u64,
        expanded: u64,
        found: usize,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Convenience constructor for free-form usage errors.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
