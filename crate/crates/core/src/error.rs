use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("numeric error in {context}{}", index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    Numeric {
        context: String,
        index: Option<usize>,
    },

    #[error("config error for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("weight cache protocol violation: {0}")]
    Protocol(&'static str),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn numeric(context: impl Into<String>, index: Option<usize>) -> Self {
        Error::Numeric {
            context: context.into(),
            index,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
