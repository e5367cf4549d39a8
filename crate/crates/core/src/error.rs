use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("map is not completely positive: Choi eigenvalue {eigenvalue:e}")]
    NonCp { eigenvalue: f64 },

    #[error("Kraus operators incomplete: |sum K^dag K - I| = {defect:e}")]
    IncompleteKraus { defect: f64 },

    #[error("tangent parameterization crosses a pole in [0, {t}]")]
    TangentBranch { t: f64 },

    #[error("history family too large: {times} times (limit {limit})")]
    SizeLimit { times: usize, limit: usize },

    #[error("family is not consistent: max off-diagonal {max_off_diagonal:e} > {tol:e}")]
    NotConsistent { max_off_diagonal: f64, tol: f64 },

    #[error("forward condition violated: residual {residual:e}")]
    ForwardConditionViolated { residual: f64 },

    #[error("bases are not mutually unbiased: max |<i|j>|^2 - 1/2| = {deviation:e}")]
    NotMutuallyUnbiased { deviation: f64 },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
