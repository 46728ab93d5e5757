use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {0} has no nonzero entry")]
    ZeroColumn(usize),
    #[error("column {col} has norm {norm}, expected 1")]
    NonUnitColumn { col: usize, norm: f64 },
    #[error("row {0} stores a non-positive or non-finite value")]
    NonPositiveValue(usize),
    #[error("row {row} refers to column {col}, but there are only {n_cols} columns")]
    ColumnOutOfRange {
        row: usize,
        col: usize,
        n_cols: usize,
    },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid shape: {0}")]
    InvalidShape(&'static str),
    #[error("sign pattern leaves column {0} without rows")]
    EmptyColumnInPattern(usize),
    #[error("row {row} is not assigned to column {col}")]
    RowNotInColumn { row: usize, col: usize },
    #[error("matrix has no nonzero entry")]
    AllRowsZero,
    #[error("invalid initial point: {0}")]
    InvalidInitialPoint(alloc::boxed::Box<Error>),
    #[error("invalid solver options: {0}")]
    InvalidOptions(&'static str),
    #[error("cluster metrics need p >= 2, got {0}")]
    DegenerateP(usize),
    #[error("label {label} is out of range for {p} clusters")]
    LabelOutOfRange { label: usize, p: usize },
    #[error("both assignments are single-cluster; NMI is undefined")]
    DegenerateAssignment,
    #[error("eigensolver failed: {0}")]
    EigFailure(&'static str),
    #[error("oracle guard exceeded: {0}")]
    GuardExceeded(&'static str),
    #[error("non-finite value encountered")]
    NonFinite,
}
