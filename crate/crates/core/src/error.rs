use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chart escape at parameter {param}: |x| = {radius} exceeds chart radius {limit}")]
    ChartEscape { param: f64, radius: f64, limit: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("concatenation refused: {0}")]
    Concatenation(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("scaling failed: {0}")]
    Scaling(String),
    #[error("smoothing failed: {0}")]
    Smoothing(String),
    #[error("spin invariant unavailable: {0}")]
    Spin(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
