//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical input is outside its valid range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A config file line failed to parse.
    #[error("config line {line}: {reason}")]
    ConfigParse { line: usize, reason: String },

    /// An adaptive quadrature or grid refinement stalled above its target.
    #[error("convergence failure in {context}: achieved {achieved:.3e}, requested {requested:.3e}")]
    ConvergenceFailure {
        context: &'static str,
        achieved: f64,
        requested: f64,
    },

    /// The requested operation is not defined for this configuration.
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    /// A root search ended without a decisive answer.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// The Fock-space truncation of the few-mode oracle is too aggressive.
    #[error("fock cutoff too small: thermal tail mass {tail:.3e} exceeds {limit:.3e}; raise the cutoff")]
    CutoffTooSmall { tail: f64, limit: f64 },

    /// A Monte-Carlo proposal density is unusable (zero or non-finite width).
    #[error("degenerate sampling proposal: {0}")]
    DegenerateProposal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
