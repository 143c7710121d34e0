//! Crate-wide error type.

use thiserror::Error;

/// Errors raised across the estimation library.
///
/// The variants map onto the failure classes surfaced by the CLI:
/// numeric failures exit with status 3, everything else with status 2.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain: {0}")]
    Domain(String),
    /// Invalid or inconsistent configuration (unknown names, bad rates, ...).
    #[error("configuration: {0}")]
    Config(String),
    /// Required state is missing (e.g. the total weight is not known).
    #[error("state: {0}")]
    State(String),
    /// A local smoothing rule hit a point where the curvature or slope it
    /// divides by vanishes.
    #[error("degenerate: {0}")]
    Degenerate(String),
    /// A numeric procedure failed to reach its accuracy target.
    #[error("numeric: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
