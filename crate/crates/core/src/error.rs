use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed record in an input file. `line` is 1-based.
    #[error("{}line {line}: {message}", .file.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        file: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse failure classes, used by the CLI for its exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Runtime,
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach the file name to a parse error raised while reading `path`.
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                file: Some(path.into()),
                line,
                message,
            },
            other => other,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Io { .. } | Error::Parse { .. } => ErrorKind::Data,
            Error::InvalidInput(_) | Error::Shape(_) => ErrorKind::Runtime,
            Error::Context { source, .. } => source.kind(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_message_names_line() {
        let err = Error::parse(1, "expected 4 fields");
        assert_eq!(err.to_string(), "line 1: expected 4 fields");
        let err = err.in_file("data.tsv");
        assert_eq!(err.to_string(), "data.tsv: line 1: expected 4 fields");
        assert_eq!(err.kind(), ErrorKind::Data);
    }

    #[test]
    fn context_keeps_kind() {
        let err = Error::Config("folds must be >= 2".into()).context("loading run.ini");
        assert_eq!(err.kind(), ErrorKind::Config);
        assert!(err.to_string().starts_with("loading run.ini: "));
    }
}
