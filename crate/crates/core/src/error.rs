use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("numerical inconsistency: {0}")]
    Inconsistent(String),
    #[error("not covered: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;
