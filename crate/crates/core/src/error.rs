use thiserror::Error;

/// Errors produced by instance construction, oracle evaluation, and the
/// verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector left the declared box of an oracle.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A vector violates the problem constraints; the message names the
    /// violated constraint.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An enumeration guard tripped (brute force or class checks).
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// Bad algorithm configuration (t, alpha, epsilon out of range).
    #[error("invalid config: {0}")]
    Config(String),

    /// Structurally invalid input (ground set, stream, oracle spec).
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
