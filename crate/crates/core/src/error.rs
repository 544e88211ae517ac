use std::path::PathBuf;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter, index or dimension is outside its allowed range.
    #[error("configuration error: {0}")]
    Config(String),

    /// A text input could not be parsed.
    #[error("{}:{line}: {message}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    /// A file parsed but its content is inconsistent.
    #[error("format error: {0}")]
    Format(String),

    /// The request exceeds what the simulator supports.
    #[error("capability error: {0}")]
    Capability(String),

    /// A run could not continue.
    #[error("run error: {0}")]
    Run(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(path: Option<&std::path::Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.map(|p| p.to_path_buf()),
            line,
            message: msg.into(),
        }
    }
}
