use thiserror::Error;

use crate::qspace::QTuple;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The tuple lies outside the ball on which a local splitting is continuous.
    #[error("split radius exceeded: G_inf = {distance} is not below half the splitting distance {radius}")]
    SplitRadius { distance: f64, radius: f64 },

    #[error("frame construction failed: {0}")]
    FrameConstruction(String),

    #[error("decode did not converge after {iterations} iterations (residual {residual})")]
    DecodeFailure {
        best: QTuple,
        residual: f64,
        iterations: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dyadic depth {depth} exceeds the cap {cap}")]
    DepthCap { depth: u32, cap: u32 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid has no boundary nodes")]
    NoBoundary,

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
