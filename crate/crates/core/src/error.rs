use thiserror::Error;

use crate::levy_model::AssumptionReport;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed support interval ({lower}, {upper})")]
    MalformedSupport { lower: f64, upper: f64 },

    #[error("Lévy measure is not integrable against min(y², 1): {0}")]
    NotLevyMeasure(String),

    #[error("standing assumptions violated: {0}")]
    Assumptions(Box<AssumptionReport>),

    #[error("first moment of the large jumps is infinite; J'(0) is not finite")]
    InfiniteJPrimeAtZero,

    #[error("simulation outside the existence regime: {0}")]
    OutsideExistenceRegime(String),

    #[error("jump of size {size} at time {time} gives 1 + λ·ΔL = {factor} <= 0")]
    NonPositiveJumpFactor { time: f64, size: f64, factor: f64 },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("field is infinite at node ({i}, {j})")]
    InfiniteNode { i: usize, j: usize },

    #[error("path {path} (seed {seed}) diverged while solving the fixed point")]
    PathDiverged { path: u64, seed: u64 },

    #[error("parameter regime of the minorant violated: {0}")]
    MinorantRegime(String),

    #[error("time {0} is not a node of the grid")]
    NotAGridNode(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
