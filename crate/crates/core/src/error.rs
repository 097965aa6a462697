use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the construction makes sense.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes or lengths of the arguments do not fit together.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The zero-order state does not admit the non-degenerate construction.
    #[error("degenerate zero-order state {state}: {reason}")]
    Degenerate { state: String, reason: String },

    /// A restricted linear system is numerically singular.
    #[error("singular system for state {state}: condition number {condition:.3e}")]
    Singular { state: String, condition: f64 },

    #[error("no solution found: {0}")]
    NoSolution(String),
}
