use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the planner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("load fraction {0} outside [0, 1]")]
    LoadDomain(f64),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("trace file line {line}: {message}")]
    TraceParse { line: u64, message: String },

    #[error("trace file has {found} rows but the horizon needs {needed}")]
    TraceLength { found: usize, needed: usize },

    #[error("trace file row {row}, column `{column}`: negative value {value}")]
    TraceNegative { row: usize, column: String, value: f64 },

    #[error("no feasible mode sequence: every path is pruned at timestep {timestep}")]
    Infeasible { timestep: usize },

    #[error("brute force would enumerate 4^{exponent} sequences, above the cap of {cap}")]
    EnumerationCap { exponent: usize, cap: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible { .. } => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
