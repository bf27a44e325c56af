use thiserror::Error;

use crate::indicator::{Category, IndicatorId, Violation};

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the evaluation pipeline.
///
/// Variants fall into three broad classes that the CLI maps to exit codes:
/// input/format problems, validation failures, and numeric failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // --- input / format -------------------------------------------------
    #[error("unknown indicator `{0}`")]
    UnknownIndicator(String),
    #[error("duplicate indicator column `{0}`")]
    DuplicateColumn(IndicatorId),
    #[error("duplicate sample label `{0}`")]
    DuplicateLabel(String),
    #[error("non-numeric cell {value:?} at row `{row}`, column `{column}`")]
    NonNumeric { row: String, column: String, value: String },
    #[error("missing cell at row `{row}`, column `{column}`")]
    MissingCell { row: String, column: String },
    #[error("row {line} has {found} cells, expected {expected}")]
    ColumnCountMismatch { line: usize, expected: usize, found: usize },
    #[error("malformed input: {0}")]
    Format(String),

    // --- validation -----------------------------------------------------
    #[error("invalid hierarchy: {}", join_violations(.0))]
    InvalidHierarchy(Vec<Violation>),
    #[error("judgment matrix is not square ({rows} rows, row {row} has {cols} entries)")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("judgment matrix order {0} outside supported range 2..=15")]
    UnsupportedOrder(usize),
    #[error("judgment entry ({row},{col}) = {value} must be positive")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("judgment diagonal ({0},{0}) must equal 1")]
    Diagonal(usize),
    #[error("judgment entry ({row},{col}) = {value} outside the 1/9..9 scale")]
    OutOfScale { row: usize, col: usize, value: f64 },
    #[error("reciprocity violated at ({i},{j})/({j},{i}): {b_ij} * {b_ji} != 1")]
    Reciprocity { i: usize, j: usize, b_ij: f64, b_ji: f64 },
    #[error("judgment matrix `{level}` failed the consistency check (CR = {cr:.4} >= 0.1)")]
    Inconsistent { level: String, cr: f64 },
    #[error("no judgment matrix for level `{0}`")]
    MissingJudgment(String),
    #[error("judgment matrix `{level}` has order {found}, expected {expected}")]
    JudgmentOrder {
        level: String,
        expected: usize,
        found: usize,
    },
    #[error("category {0} has no weights")]
    MissingCategory(Category),
    #[error("interval bounds out of order: {a} > {b}")]
    IntervalOrder { a: f64, b: f64 },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{what} needs at least {min}, found {found}")]
    TooSmall {
        what: &'static str,
        min: usize,
        found: usize,
    },
    #[error("missing value for {0}")]
    MissingValue(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // --- numeric --------------------------------------------------------
    #[error("column `{0}` is all zeros")]
    ZeroColumn(String),
    #[error("column `{0}` contains negative values")]
    NegativeValue(String),
    #[error("every column is constant; entropy weights are undefined")]
    AllColumnsConstant,
    #[error("weight for {0} is zero")]
    ZeroWeight(String),
    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("series contains nonpositive value {value} at position {index}")]
    NonPositiveSeries { index: usize, value: f64 },
    #[error("singular least-squares system: {0}")]
    Singular(String),
}

impl Error {
    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            UnknownIndicator(_)
            | DuplicateColumn(_)
            | DuplicateLabel(_)
            | NonNumeric { .. }
            | MissingCell { .. }
            | ColumnCountMismatch { .. }
            | Format(_) => ErrorKind::Input,
            ZeroColumn(_)
            | NegativeValue(_)
            | AllColumnsConstant
            | ZeroWeight(_)
            | NoConvergence(_)
            | NonPositiveSeries { .. }
            | Singular(_) => ErrorKind::Numeric,
            _ => ErrorKind::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Validation,
    Numeric,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
