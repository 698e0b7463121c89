use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction parameters or out-of-domain arguments.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed serialized input (JSON/CSV).
    #[error("parse error: {0}")]
    Parse(String),

    /// A persisted object declares a format version we do not support.
    #[error("unsupported version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    /// Exact enumeration would exceed the configured budget.
    #[error("enumeration budget exceeded ({profiles:.3e} profiles > {budget:.3e}); use Monte-Carlo evaluation")]
    EnumerationBudget { profiles: f64, budget: f64 },

    /// An observed Monte-Carlo payment exceeded the declared cap, so the
    /// confidence interval would be invalid.
    #[error("payment {payment} exceeds cap {cap}; confidence interval invalid")]
    PaymentCapExceeded { payment: f64, cap: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
