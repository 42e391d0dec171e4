use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A size guard was exceeded (factorial or exponential blow-up).
    #[error("size limit exceeded: {what} = {value}, maximum {max}")]
    SizeLimit { what: &'static str, value: u64, max: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The moment matrix `[d^(#cycles)]` is singular for these parameters.
    #[error("degenerate moment matrix for d = {d}, t = {t} (singular when d < t)")]
    Degenerate { d: u32, t: usize },

    #[error("rank-deficient complement: effective rank {effective_rank}, expected {expected}")]
    RankDeficient { effective_rank: usize, expected: usize },

    #[error("numerical integrity: {0}")]
    NumericalIntegrity(String),
}

impl LabError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }
}
