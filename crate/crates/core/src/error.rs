use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("chart domain error: {0}")]
    ChartDomain(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("numerics error: {0}")]
    Numerics(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("linear solve error: {message}")]
    LinearSolve { message: String, trace: Vec<f64> },
    #[error("convergence error: {message}")]
    Convergence { message: String, residuals: Vec<f64> },
    #[error("config error: {0}")]
    Config(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
