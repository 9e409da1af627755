use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{path}: {source_msg}")]
    Io { path: PathBuf, source_msg: String },

    /// Malformed grid or series input. `row`/`col` are 1-based CSV
    /// coordinates when the problem can be pinned to a cell.
    #[error("invalid grid data{}: {msg}", location(*row, *col))]
    InvalidData {
        row: Option<usize>,
        col: Option<usize>,
        msg: String,
    },

    #[error("unknown fixture `{0}` (expected one of table1, table2, table3, sigmoid_fig5)")]
    UnknownFixture(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("log model requires x > 0, got {0}")]
    LogDomain(f64),

    /// An exponent argument left the representable range. `term` is the
    /// semantic-loss term index (0-based) when the model has terms.
    #[error("exponent argument {arg:e} exceeds the |700| guard{}", term.map(|t| format!(" in term {t}")).unwrap_or_default())]
    ExponentRange { arg: f64, term: Option<usize> },

    #[error("ratio undefined: Shannon SNR is 0 dB at rate 1 bit/s/Hz")]
    UndefinedRatio,

    #[error("design matrix is rank deficient ({rows} rows, {cols} parameters)")]
    RankDeficient { rows: usize, cols: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("MAPE undefined: actual value at index {0} is zero")]
    ZeroActual(usize),

    #[error("every start diverged ({starts} starts)")]
    AllStartsDiverged { starts: usize },

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite parameter at iteration {iteration}")]
    NonFinite { iteration: usize },
}

fn location(row: Option<usize>, col: Option<usize>) -> String {
    match (row, col) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c}"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" at column {c}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn data(row: Option<usize>, col: Option<usize>, msg: impl Into<String>) -> Self {
        Error::InvalidData {
            row,
            col,
            msg: msg.into(),
        }
    }
}
