use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the calibration pipeline and its file formats.
///
/// Class labels in messages are 1-based, matching the on-disk formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("plausibility vector is empty")]
    EmptyPlausibilities,
    #[error("negative plausibility {value} for class {class}")]
    NegativeMass { class: usize, value: f64 },
    #[error("plausibilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("annotation record has no entries")]
    EmptyAnnotations,
    #[error("label {label} outside 1..={classes}")]
    LabelOutOfRange { label: i64, classes: usize },
    #[error("class {class} appears in more than one block of a ranking")]
    OverlappingBlocks { class: usize },
    #[error("ranking contains an empty block at position {position}")]
    EmptyBlock { position: usize },
    #[error("every ranking excludes all classes; no plausibility mass to normalize")]
    AllMassExcluded,
    #[error("aggregation procedure {procedure} does not match a {payload} record")]
    ProcedureMismatch {
        procedure: &'static str,
        payload: &'static str,
    },
    #[error("multi-label set is empty")]
    EmptyLabelSet,
    #[error("replicate count mismatch: expected {expected}, found {found}")]
    ReplicateMismatch { expected: usize, found: usize },
    #[error("calibration split too small: n={n}, l={l} (need l >= 1 and n - l >= 2)")]
    SplitTooSmall { n: usize, l: usize },
    #[error("empirical CDF needs at least one sample")]
    EmptySample,
    #[error("row {row} has {found} scores, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite score in row {row}")]
    NonFiniteScore { row: usize },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("id mismatch: {0}")]
    IdMismatch(String),
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("config error in field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    /// Short stable name used in machine-readable CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyPlausibilities => "EmptyPlausibilities",
            Error::NegativeMass { .. } => "NegativeMass",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::EmptyAnnotations => "EmptyAnnotations",
            Error::LabelOutOfRange { .. } => "LabelOutOfRange",
            Error::OverlappingBlocks { .. } => "OverlappingBlocks",
            Error::EmptyBlock { .. } => "EmptyBlock",
            Error::AllMassExcluded => "AllMassExcluded",
            Error::ProcedureMismatch { .. } => "ProcedureMismatch",
            Error::EmptyLabelSet => "EmptyLabelSet",
            Error::ReplicateMismatch { .. } => "ReplicateMismatch",
            Error::SplitTooSmall { .. } => "SplitTooSmall",
            Error::EmptySample => "EmptySample",
            Error::RowLength { .. } => "RowLength",
            Error::NonFiniteScore { .. } => "NonFiniteScore",
            Error::DuplicateId(_) => "DuplicateId",
            Error::IdMismatch(_) => "IdMismatch",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::Config { .. } => "ConfigError",
            Error::Parse { .. } => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}
