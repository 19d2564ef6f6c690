use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid config value `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("cannot read config {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] leray_strip::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type HarnessResult<T> = Result<T, HarnessError>;
