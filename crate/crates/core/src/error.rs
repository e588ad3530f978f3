use thiserror::Error;

/// Errors raised by the elicitation toolkit.
///
/// Variants split into two families: malformed inputs (bad shapes, bad
/// probabilities, bad scheme parameters) and domain failures where the inputs
/// are well-formed but the requested quantity does not exist.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode is ambiguous: several atoms share the maximal probability {prob}")]
    AmbiguousMode { prob: f64 },

    #[error("mode is undefined for Beta({alpha}, {beta}); both shapes must exceed 1")]
    UndefinedMode { alpha: f64, beta: f64 },

    #[error(
        "no best response: without incentives a point report cannot be mapped to any \
         feature of the belief distribution, so reports are uninterpretable"
    )]
    NoBestResponse,

    #[error("empty posterior: no atom of the prior lies inside the signal window")]
    EmptyPosterior,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("optimizer did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("regressor has zero variance")]
    ZeroVariance,

    #[error("signal is incompatible with the belief: {0}")]
    IncompatibleSignal(String),
}

impl Error {
    /// True for errors caused by malformed input rather than by the domain.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDistribution(_) | Error::InvalidScheme(_) | Error::InvalidParameter(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
