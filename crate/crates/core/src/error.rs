use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("reference trace has no steps")]
    EmptyReference,

    #[error("cost matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("cost matrix entry ({row}, {col}) = {value} is outside [0, 1]")]
    InvalidCost {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("cost matrix data has {len} entries, expected {rows}x{cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error(
        "brute-force enumeration limited to {max_rows}x{max_cols} matrices (got {rows}x{cols})"
    )]
    TooLarge {
        rows: usize,
        cols: usize,
        max_rows: usize,
        max_cols: usize,
    },

    #[error("ground-truth answer is empty")]
    EmptyGroundTruth,

    #[error("group has {0} candidates, at least 2 are required")]
    GroupTooSmall(usize),

    #[error("log-probability lists differ in length: new={new}, old={old}, ref={reference}")]
    LengthMismatch {
        new: usize,
        old: usize,
        reference: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: parse error: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: &'static str },

    #[error("line {line}: invalid field `{field}`: {reason}")]
    InvalidField {
        line: usize,
        field: String,
        reason: String,
    },

    #[error("duplicate id `{id}` on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("line {line}: candidate {candidate}: {source}")]
    InvalidCandidate {
        line: usize,
        candidate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Innermost error, looking through line/candidate wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::InvalidCandidate { source, .. } | Error::AtLine { source, .. } => source.root(),
            other => other,
        }
    }
}
