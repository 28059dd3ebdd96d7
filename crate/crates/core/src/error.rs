use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("unsupported graph: {0}")]
    UnsupportedGraph(String),

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("graph is not an expander (lambda = {lambda})")]
    NonExpander { lambda: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
