use thiserror::Error;

/// Failures shared by every numerical routine in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pochhammer({x}, {s}) overflows 128-bit arithmetic")]
    Overflow { x: u64, s: u64 },

    #[error("{what} did not converge (n = {n}, last change {change:.3e})")]
    NoConvergence { what: String, n: usize, change: f64 },

    #[error("bracket violated: {0}")]
    Bracket(String),

    #[error("lambda = {lambda:e} too large for the region chart; largest admissible lambda ~ {max_lambda:e}")]
    LambdaTooLarge { lambda: f64, max_lambda: f64 },

    #[error("completeness defect {defect:.3e} exceeds {tol:.3e}; enlarge the eigenvalue window")]
    Completeness { defect: f64, tol: f64 },

    #[error("slow decay: tail estimate {tail:.3e} above {tol:.3e} after n = {n}")]
    SlowDecay { tail: f64, tol: f64, n: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Overflow { .. } => "overflow",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Bracket(_) => "bracket",
            Error::LambdaTooLarge { .. } => "lambda_too_large",
            Error::Completeness { .. } => "completeness",
            Error::SlowDecay { .. } => "slow_decay",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
