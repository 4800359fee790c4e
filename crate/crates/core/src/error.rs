use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the method is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A power series hit its term cap before the tail fell below tolerance.
    #[error("series did not converge after {terms} terms (tail estimate {tail:e})")]
    NotConverged { terms: usize, tail: f64 },

    /// The matching point sits on a zero of the right-hand solution.
    #[error("degenerate match point: |psi3(z_match)| = {0:e}")]
    MatchFailure(f64),

    /// User-facing configuration problem (CLI, config file).
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
