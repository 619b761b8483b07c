use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid bounds: {0}")]
    InvalidBounds(&'static str),
    #[error("non-finite value at grid point ({i}, {j})")]
    NonFiniteValue { i: usize, j: usize },
    #[error("index ({i}, {j}) out of range for a grid with {n} points per side")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(&'static str),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("singular system: pivot {pivot:e} at unknown {index}")]
    SingularSystem { index: usize, pivot: f64 },
    #[error("relative residual {relative:e} exceeds {limit:e}")]
    ResidualTooLarge { relative: f64, limit: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid arguments: {0}")]
    InvalidArguments(&'static str),
    #[error("negative right-hand side f = {value:e} at grid point ({i}, {j})")]
    NegativeRhs { i: usize, j: usize, value: f64 },
    #[error("negative radicand {value:e} at grid point ({i}, {j})")]
    NegativeRadicand { i: usize, j: usize, value: f64 },
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("problem `{0}` has no exact solution")]
    NoExactSolution(String),
    #[error("need at least two data points, got {0}")]
    InsufficientPoints(usize),
    #[error("all values must be positive")]
    NonpositiveValues,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteValue { .. }
                | Error::SingularSystem { .. }
                | Error::ResidualTooLarge { .. }
                | Error::NegativeRadicand { .. }
        )
    }
}
