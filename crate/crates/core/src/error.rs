use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma = {0} is outside the long-jump regime (1, 2)")]
    GammaOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("N = {n} exceeds the exact-solve cap {max}; use the event-driven simulator instead")]
    SystemTooLarge { n: usize, max: usize },

    #[error("test function must be compactly supported in (0, 1)")]
    NotCompactlySupported,

    #[error("stationary solve failed: {0}")]
    SolverFailure(String),

    #[error("site index {x} out of range for N = {n}")]
    SiteOutOfRange { x: usize, n: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
