use thiserror::Error;

/// Errors raised by the bandit library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An exact computation was asked for beyond its exhaustive-search budget.
    #[error("capability exceeded: {0}")]
    Capability(String),
    /// A property that holds on the concentration event failed during a run.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 2 for bad input, 3 for a failed run invariant, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::InvalidGraph(_) => 2,
            Error::InvariantViolation(_) => 3,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        assert_eq!(Error::InvalidGraph("x".into()).exit_code(), 2);
        assert_eq!(Error::InvariantViolation("x".into()).exit_code(), 3);
        assert_eq!(Error::Numeric("x".into()).exit_code(), 1);
    }
}
