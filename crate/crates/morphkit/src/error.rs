use std::path::{Path, PathBuf};

/// Exit status for the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Numerical = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Core { context: String, source: morphkit_core::Error },
    #[error("{0}")]
    Usage(String),
    #[error("download failed: {0}")]
    Network(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().to_path_buf(), source }
    }

    pub fn format(path: impl AsRef<Path>, message: impl ToString) -> Self {
        Error::Format { path: path.as_ref().to_path_buf(), message: message.to_string() }
    }

    pub fn core(context: impl Into<String>, source: morphkit_core::Error) -> Self {
        Error::Core { context: context.into(), source }
    }

    pub fn exit_kind(&self) -> ExitKind {
        use morphkit_core::Error as C;
        match self {
            Error::Usage(_) => ExitKind::Usage,
            Error::Core { source, .. } => match source {
                C::NonFiniteEnergy | C::DegenerateCurve => ExitKind::Numerical,
                C::InvalidThreshold(_) | C::ConfigOutOfRange(_) | C::ConfigMismatch | C::InvalidK { .. } => {
                    ExitKind::Usage
                }
                _ => ExitKind::Data,
            },
            _ => ExitKind::Data,
        }
    }
}

impl From<morphkit_core::Error> for Error {
    fn from(source: morphkit_core::Error) -> Self {
        Error::Core { context: String::from("morphkit"), source }
    }
}

/// Attaches a context string to core errors.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for morphkit_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::core(what(), e))
    }
}
