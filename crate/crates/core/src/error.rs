use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("cut has no nonzero coefficient")]
    ZeroCut,

    #[error("objective vector is zero")]
    ZeroObjective,

    #[error("cut parallel to incumbent direction")]
    ParallelToIncumbent,

    #[error("incumbent coincides with the LP point")]
    IncumbentAtLpPoint,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("outside R_GC: a = {a} exceeds max_a(d) = {max_a} at d = {d}")]
    OutsideGoodRegion { a: f64, d: f64, max_a: f64 },

    #[error("target lambda {target} outside achievable range [{lo}, {hi}]")]
    UnreachableLambda { target: f64, lo: f64, hi: f64 },

    #[error("discretisation covers achievable range")]
    NoUsableGap,

    #[error("LP solve failed: {0}")]
    LpFailure(String),

    #[error("invalid cut applied: {0}")]
    InvalidCutApplied(String),

    #[error("simulation invariant violated: {0}")]
    SimulationInvariant(String),

    #[error("enumeration too large: {0}")]
    TooLarge(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
