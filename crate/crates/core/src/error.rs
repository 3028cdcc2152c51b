use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown function id `{0}`")]
    UnknownFunction(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inconclusive truncation at lambda = {lambda:e}: exterior bound {bound:e} exceeds 5% of estimate {estimate:e}")]
    InconclusiveTruncation { lambda: f64, bound: f64, estimate: f64 },

    #[error("resolution failure at lambda = {lambda:e}: refinement changed mu by {change:e}, bound was {bound:e}")]
    ResolutionFailure { lambda: f64, change: f64, bound: f64 },

    #[error("maximum attained at grid endpoint lambda = {lambda:e}")]
    EndpointAttained { lambda: f64 },

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
