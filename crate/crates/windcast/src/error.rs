//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv read error: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing required column `{0}` in CSV header")]
    MissingColumn(String),

    #[error("duplicate timestamp {timestamp} at data row {row}")]
    DuplicateTimestamp { row: usize, timestamp: i64 },

    #[error("records are not on a {expected}-minute grid: step of {got} min before index {index}")]
    IrregularGrid {
        index: usize,
        expected: i64,
        got: i64,
    },

    #[error("need at least {need} records, got {got}")]
    TooFewRecords { need: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("all records invalid; nothing to anchor fills")]
    AllRecordsInvalid,

    #[error("matrix is ragged: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("column count mismatch: expected {expected}, got {got}")]
    ColumnMismatch { expected: usize, got: usize },

    #[error("no feature passed selection; check the weight threshold and the forecastable set")]
    EmptySelection,

    #[error("k-means requires 1 <= k <= points: k={k}, points={points}")]
    BadClusterCount { k: usize, points: usize },

    #[error("pearson requires two equal-length vectors of at least 2 elements")]
    PearsonLength,

    #[error("pearson is undefined for a constant vector")]
    ConstantVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite gradient; reduce the learning rate")]
    NonFiniteGradient,

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("validation split is empty")]
    EmptyValidation,

    #[error("ensemble member {member}: {source}")]
    EnsembleMember {
        member: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("ensemble manifest: {0}")]
    ManifestFormat(String),

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config key `{key}`: cannot parse `{value}`: {message}")]
    BadValue {
        key: String,
        value: String,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("stage `{stage}` failed: {source}\n  hint: {hint}")]
    Stage {
        stage: &'static str,
        hint: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in and a remediation hint.
    pub fn in_stage(self, stage: &'static str, hint: &'static str) -> Error {
        Error::Stage {
            stage,
            hint,
            source: Box::new(self),
        }
    }
}
