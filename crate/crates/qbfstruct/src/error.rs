use thiserror::Error;

/// Errors raised by parsing, evaluation and the structural algorithms.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("variable budget exceeded: {vars} variables, budget {budget}")]
    VarBudget { vars: usize, budget: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot serialize: {0}")]
    Serialize(String),

    #[error("formula cache exceeded {0} entries")]
    CacheBudget(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for errors that signal an unmet algorithmic precondition rather than bad input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_) | Error::VarBudget { .. } | Error::CacheBudget(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
