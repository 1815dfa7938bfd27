use thiserror::Error;

/// Errors raised by the correlation routines, the decomposition and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series needs at least 2 entries, got {0}")]
    Length(usize),
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("variable {0} has zero variance")]
    ZeroVariance(usize),
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{m} variables need at least {m} observations, got {n}")]
    Rank { m: usize, n: usize },
    #[error("value {0} outside [-1, 1]")]
    Domain(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("minor enumeration needs {count} minors, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("size {size} outside supported range {min}..={max}")]
    Size { size: usize, min: usize, max: usize },
    #[error("index {index} out of range for {len} vectors")]
    Index { index: usize, len: usize },
    #[error("closed form needs 2 or 3 vectors, got {0}")]
    Arity(usize),
    #[error("degenerate predictor basis: {0}")]
    DegenerateBasis(String),
    #[error("fitted values are constant; uncorrelation with the target is undefined")]
    ConstantFit,
    #[error("no feasible subset: every candidate predictor set is degenerate")]
    NoFeasibleSubset,
    #[error("angle {0} outside [0, 180] degrees")]
    Range(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("cut does not intersect the grid")]
    EmptyIntersection,
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("only {0} rows left after loading, need at least 2")]
    EmptyResult(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
