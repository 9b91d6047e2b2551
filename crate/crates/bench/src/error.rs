use std::fmt::Display;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error in `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("{}: {source}", path.display())]
    Matrix {
        path: PathBuf,
        source: nap_amg::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error(transparent)]
    Core(nap_amg::Error),
}

impl BenchError {
    pub fn config(key: impl Into<String>, msg: impl Display) -> Self {
        BenchError::Config {
            key: key.into(),
            msg: msg.to_string(),
        }
    }

    /// Core errors that stem from a bad setting are reported against the
    /// flag that carries it.
    pub fn from_core(e: nap_amg::Error) -> Self {
        match e {
            nap_amg::Error::Config { key, msg } => BenchError::Config { key, msg },
            nap_amg::Error::InvalidTheta(t) => {
                BenchError::config("strength-theta", format!("must lie in (0, 1], got {t}"))
            }
            nap_amg::Error::InvalidParams(msg) => BenchError::Config {
                key: "model-params".into(),
                msg,
            },
            nap_amg::Error::InvalidTopology(msg) => BenchError::Config {
                key: "procs/ppn".into(),
                msg,
            },
            other => BenchError::Core(other),
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Core(nap_amg::Error::Diverged { .. }) => 2,
            _ => 1,
        }
    }
}
