use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration (grid size, resolution, step counts, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Two sampled functions live on different grids or have the wrong length.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Degenerate input such as a double point built from a single mode.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A closed-form expression has a vanishing denominator.
    #[error("singular expression for mode {mode}: {detail}")]
    Singular { mode: u32, detail: String },

    /// Newton's method did not reach the residual tolerance.
    #[error("newton did not converge after {iterations} iterations (last residual {:e})", history.last().copied().unwrap_or(f64::NAN))]
    NewtonFailed {
        iterations: usize,
        history: Vec<f64>,
    },

    /// The reduced map comes too close to zero on the sampling circle.
    #[error("indeterminate degree: {0}")]
    IndeterminateDegree(String),

    /// The linear solve inside a Newton step failed.
    #[error("singular linear system: {0}")]
    SingularSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
