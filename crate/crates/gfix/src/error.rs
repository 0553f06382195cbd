use std::path::PathBuf;

/// Everything that ends a run with exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Core(#[from] gfix_core::Error),
    #[error("writing {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("trace: {0}")]
    Trace(#[from] csv::Error),
    #[error("report encoding: {0}")]
    Encode(#[from] serde_json::Error),
}

impl CliError {
    pub const EXIT_CODE: i32 = 2;
}
