use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {key}: {message}")]
    Config { key: String, message: String },

    #[error("solver failure at step {step} (t = {t:e}): {source}")]
    Solver {
        step: usize,
        t: f64,
        #[source]
        source: eulerswell::Error,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 config, 3 solver, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Innermost solver error, if any.
    pub fn root_cause(&self) -> Option<&eulerswell::Error> {
        match self {
            CliError::Solver { source, .. } => Some(source.root_cause()),
            _ => None,
        }
    }
}

/// Maps core parameter errors to config errors; everything else is a
/// solver failure at `step`.
pub fn from_core(e: eulerswell::Error, step: usize, t: f64) -> CliError {
    match e {
        eulerswell::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
        source => CliError::Solver { step, t, source },
    }
}
