use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mixture spec: {0}")]
    InvalidMixture(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The data cannot determine the requested estimate (all-zero inputs,
    /// singular Gram matrix, no finite TLS direction, ...).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("solver failed: {0}")]
    SolverFailed(String),

    #[error("dataset does not retain ground-truth noise")]
    MissingNoise,

    /// N ≥ M > N/2 does not hold.
    #[error("no clean majority: need n >= m > n/2, got n = {n}, m = {m}")]
    CleanMajority { n: usize, m: usize },

    /// The clean set has no positive lower bound on |x̃|.
    #[error("clean inputs not bounded away from zero: need c > 0, got c = {0}")]
    InputMagnitude(f64),

    #[error("malformed dataset file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
