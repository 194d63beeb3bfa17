use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the function or violates a type invariant.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series did not reach its tolerance, or lost too many digits to cancellation.
    #[error("non-convergence in {what}: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge after {intervals} subintervals (estimated error {error:e})")]
    Quadrature { intervals: usize, error: f64 },

    /// A simulation or measurement configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate histogram: {0}")]
    DegenerateHistogram(String),

    #[error("insufficient crossings: {0}")]
    InsufficientCrossings(String),

    #[error("malformed trace: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Quadrature { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
