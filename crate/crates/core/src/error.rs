use thiserror::Error;

/// Errors raised by the expansion, interpolation and FEM routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An expansion node `a + k h / m` fell outside the field's domain box.
    #[error("expansion node k = {k} at {point:?} lies outside the field domain")]
    Domain { k: usize, point: Vec<f64> },

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("point {point:?} lies outside the closed simplex (min barycentric coordinate {min_lambda:e})")]
    OutOfElement { point: Vec<f64>, min_lambda: f64 },

    #[error("point {0:?} is not covered by the mesh")]
    OutOfDomain(Vec<f64>),

    #[error("inconsistent input: {0}")]
    Inconsistency(String),

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("unknown function `{name}`; available: {}", available.join(", "))]
    UnknownFunction { name: String, available: Vec<String> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
