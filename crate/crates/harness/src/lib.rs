//! Experiment runner, file formats and command-line front end for `mfgp-core`.

use std::path::PathBuf;

pub mod config;
pub mod experiment;
pub mod fluidized;
pub mod output;
pub mod summary;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] mfgp_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Load(#[from] fluidized::LoadError),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("holdout overlaps the {0}")]
    HoldoutLeak(&'static str),
}
