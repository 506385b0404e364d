use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CfnError>;

#[derive(Debug, Error)]
pub enum CfnError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0} is empty")]
    EmptyInput(String),

    #[error("rating {value} at (row {row}, col {col}) is outside the scale [{min}, {max}]")]
    OutOfScale {
        row: usize,
        col: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("side information must satisfy side_dim < bottleneck < input_dim, got P={side_dim}, k={bottleneck}, N={input_dim}")]
    SideConstraint {
        side_dim: usize,
        bottleneck: usize,
        input_dim: usize,
    },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}, batch {batch} (loss = {loss})")]
    Diverged { epoch: usize, batch: usize, loss: f64 },

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
}

impl CfnError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CfnError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CfnError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line driver: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CfnError::Config(_) | CfnError::Precondition(_) => 1,
            CfnError::NonFinite(_) | CfnError::Diverged { .. } => 3,
            _ => 2,
        }
    }
}
