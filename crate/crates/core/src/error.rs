use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative weight {value} at {side}[{index}]")]
    NegativeWeight { side: &'static str, index: usize, value: String },

    #[error("marginal sum {sum} ≠ {expected} ({side})")]
    MarginalSum { side: &'static str, sum: String, expected: String },

    #[error("negative cost {value} at ({row},{col})")]
    NegativeCost { row: usize, col: usize, value: String },

    #[error("negative plan mass {value} at ({row},{col})")]
    NegativeMass { row: usize, col: usize, value: String },

    #[error("plan marginals do not match the instance ({side}[{index}])")]
    PlanMarginals { side: &'static str, index: usize },

    #[error("infinite cost on support pair ({x},{y})")]
    InfiniteCostOnSupport { x: usize, y: usize },

    #[error("plan has infinite total cost")]
    InfinitePlanCost,

    #[error("anchor ({x},{y}) is not a support pair")]
    AnchorNotInSupport { x: usize, y: usize },

    #[error("empty domain")]
    EmptyDomain,

    #[error("cycle pair ({x},{y}) carries no mass")]
    ZeroMassCycle { x: usize, y: usize },

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("no transport plan with finite cost exists")]
    Infeasible,

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
