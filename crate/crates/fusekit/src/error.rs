//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Any failure produced by this crate.
///
/// Validation failures identify the first violated invariant, naming the
/// offending model and row where applicable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty prediction set: {0}")]
    EmptySet(String),

    #[error("shape mismatch for model '{model}': {detail}")]
    ShapeMismatch { model: String, detail: String },

    #[error("model '{model}' row {row}: probabilities sum to {sum}, expected 1 within {tolerance}")]
    RowSumViolation {
        model: String,
        row: usize,
        sum: f64,
        tolerance: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("label {value} at row {row} out of range for {classes} classes")]
    LabelOutOfRange {
        row: usize,
        value: usize,
        classes: usize,
    },

    #[error("duplicate class name '{0}'")]
    DuplicateClass(String),

    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate groups for effect size: {0}")]
    DegenerateGroups(String),

    #[error("score tables do not align: {0}")]
    KeyMismatch(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("unknown method '{0}'")]
    UnknownMethod(String),

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{}: header mismatch: {detail}", path.display())]
    HeaderMismatch { path: PathBuf, detail: String },

    #[error("sample ids do not align: {0}")]
    SampleIdMismatch(String),

    #[error("{}: truth label for sample '{sample}' disagrees with an earlier file", path.display())]
    TruthMismatch { path: PathBuf, sample: String },

    #[error("{}, line {line}: {detail}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 1 for validation problems, 2 for I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingFile(_) | Error::Io(_) => 2,
            _ => 1,
        }
    }
}
