use std::path::{Path, PathBuf};

use island_core::config::ConfigFileError;
use island_core::engine::EngineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigFileError),
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("IO_ERROR: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV_ERROR: {0}")]
    Csv(#[from] csv::Error),
    #[error("MANIFEST_MISSING: no manifest at {}", .0.display())]
    ManifestMissing(PathBuf),
    #[error("MANIFEST_INVALID: {0}")]
    ManifestInvalid(String),
    #[error("SCHEMA_UNSUPPORTED: manifest schema version {0:?} is not supported")]
    SchemaUnsupported(Option<u64>),
    #[error("HASH_MISMATCH: {0} does not match its manifest hash")]
    HashMismatch(String),
    #[error("USAGE: {0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "INVALID_CONFIG",
            CliError::Engine(_) => "ENGINE_ERROR",
            CliError::Io { .. } => "IO_ERROR",
            CliError::Csv(_) => "CSV_ERROR",
            CliError::ManifestMissing(_) => "MANIFEST_MISSING",
            CliError::ManifestInvalid(_) => "MANIFEST_INVALID",
            CliError::SchemaUnsupported(_) => "SCHEMA_UNSUPPORTED",
            CliError::HashMismatch(_) => "HASH_MISMATCH",
            CliError::Usage(_) => "USAGE",
        }
    }
}
