use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("analytic branch required: {0}")]
    AnalyticBranch(String),
    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("continuation failed at g = {g:.6e} (last good g = {last_good:.6e}): {reason}")]
    Continuation { g: f64, last_good: f64, reason: String },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
