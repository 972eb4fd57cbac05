use std::path::PathBuf;

use thiserror::Error;

/// Exit status class of a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Validation,
    Runtime,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Validation => 2,
            ErrorKind::Runtime => 3,
        }
    }

    pub fn prefix(self) -> &'static str {
        match self {
            ErrorKind::Usage => "error[usage]",
            ErrorKind::Validation => "error[validation]",
            ErrorKind::Runtime => "error[runtime]",
        }
    }
}

#[derive(Debug, Error)]
pub enum SectError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {source}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}:{line}: {source}", path.display())]
    Invalid {
        path: PathBuf,
        line: usize,
        #[source]
        source: sect_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {message}", path.display())]
    Checkpoint { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sect_core::Error),
}

impl SectError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SectError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        use sect_core::Error as E;
        match self {
            SectError::Usage(_) => ErrorKind::Usage,
            SectError::Parse { .. } | SectError::Invalid { .. } | SectError::Json { .. } => ErrorKind::Validation,
            SectError::Core(e) => match e {
                E::Validation { .. }
                | E::UnknownLabel(_)
                | E::LabelSet(_)
                | E::UnknownMention { .. }
                | E::SourceNotEvent { .. }
                | E::Span { .. }
                | E::Split(_) => ErrorKind::Validation,
                E::Config(_) => ErrorKind::Usage,
                _ => ErrorKind::Runtime,
            },
            SectError::Io { .. } | SectError::Checkpoint { .. } => ErrorKind::Runtime,
        }
    }
}

pub type Result<T, E = SectError> = std::result::Result<T, E>;
