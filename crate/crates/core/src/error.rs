use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column {column} contains the tied value {value}")]
    TiesDetected { column: usize, value: f64 },

    #[error("exhaustive enumeration needs C(n, m) = {count} sub-samples, above the cap of {cap}")]
    EnumerationTooLarge { count: String, cap: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid of {m}^{d} cells is too large to materialise")]
    SizeOverflow { m: usize, d: usize },

    #[error("null grid has zero mass at cell {cell:?} where the estimate is positive")]
    NullHasZeroCell { cell: Vec<usize> },

    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },

    #[error("conditional slice has zero mass on the evaluation grid")]
    DegenerateSlice,

    #[error("correlation {rho} gives a singular equicorrelation matrix in dimension {d}")]
    SingularCorrelation { rho: f64, d: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
