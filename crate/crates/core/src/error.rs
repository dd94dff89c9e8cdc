use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input violates a structural invariant (shape, symmetry, finiteness).
    #[error("validation error: {0}")]
    Validation(String),

    /// An iterative kernel did not reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Argument outside the domain of a physical model.
    #[error("domain error: {0}")]
    Domain(String),

    /// Coincident points or zero-length directions.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The scenario admits no feasible solution.
    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    /// Trajectory feasibility restoration failed.
    #[error("projection failed: {0}")]
    Projection(String),

    /// Scenario document is malformed; `key` names the offending entry.
    #[error("schema error at `{key}`: {message}")]
    Schema { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
