use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EfpfError {
    /// A parameter or argument lies outside the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An infinite sum was cut off before its tail became negligible.
    #[error("truncation not converged: last term / running sum = {last_ratio:e} after {terms} terms (tail_tol {tail_tol:e})")]
    TruncationNotConverged {
        terms: u64,
        last_ratio: f64,
        tail_tol: f64,
    },

    /// The requested exact enumeration is too large to run.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Conditioning on an event of probability zero.
    #[error("conditioning on a null event: {0}")]
    ConditioningOnNull(String),

    #[error("mixture weights sum to {0}, expected 1")]
    WeightNormalization(f64),

    /// A boundary path regime does not match the sign of alpha.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
}

impl EfpfError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        EfpfError::Domain(msg.into())
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            EfpfError::Domain(_) => "domain",
            EfpfError::TruncationNotConverged { .. } => "truncation",
            EfpfError::Infeasible(_) => "infeasible",
            EfpfError::ConditioningOnNull(_) => "null-conditioning",
            EfpfError::WeightNormalization(_) => "weight-normalization",
            EfpfError::RegimeMismatch(_) => "regime-mismatch",
        }
    }
}

pub type Result<T> = std::result::Result<T, EfpfError>;
