use thiserror::Error;

/// Errors raised by the force model, the terrain sampler and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates the documented domain of an operation.
    #[error("{0}")]
    Domain(String),

    /// `delta + rho + phi + beta` left the open interval `(0, pi)`; the wedge
    /// equilibrium has no solution there.
    #[error("singular wedge configuration: delta + rho + phi + beta = {sum}")]
    SingularConfiguration { sum: f64 },

    /// A query point lies outside the heightfield.
    #[error("point ({x}, {y}) lies outside the heightfield")]
    OutOfBounds { x: f64, y: f64 },

    #[error("height profile has no samples")]
    EmptyProfile,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
