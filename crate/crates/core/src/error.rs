use thiserror::Error;

/// Errors produced by construction, simulation and certification.
#[derive(Debug, Error)]
pub enum Error {
    /// A family parameter violates its constraints (e.g. `l >= N`).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A word or machine description could not be used as given.
    #[error("invalid input: {0}")]
    Input(String),

    /// A construction step that should always succeed did not.
    #[error("internal synthesis failure: {0}")]
    Internal(String),

    /// Exhaustive enumeration would exceed the configured machine budget.
    #[error("enumeration needs {required} machines, budget is {budget}")]
    Budget { required: u128, budget: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}
