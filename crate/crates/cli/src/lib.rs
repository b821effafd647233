//! Command-line front end for the `elreg_core` simulator: TOML configuration,
//! CSV energy records, binary snapshots and the built-in self test.

// `!(x > 0.0)` is deliberate: NaN has to fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod app;
pub mod config;
pub mod records;
pub mod selftest;
pub mod snapshot;

pub use app::{run_cli, EXIT_FAILURE, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
pub use config::{parse_config, ConfigError, SimConfig};

/// Errors of the on-disk formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("snapshot payload has {found} bytes, header implies {expected}")]
    SizeMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Model(#[from] elreg_core::Error),
}

impl FormatError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
