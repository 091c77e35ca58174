use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("reaction {reaction}: dimension mismatch ({what} has length {found}, expected {expected})")]
    DimensionMismatch {
        reaction: usize,
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("reaction {reaction}: zero jump")]
    ZeroJump { reaction: usize },

    #[error("reaction {reaction}: negative coefficient {k}")]
    NegativeCoefficient { reaction: usize, k: f64 },

    #[error("reaction {reaction}: conservation violated (fast jump sums to {sum})")]
    ConservationViolated { reaction: usize, sum: i64 },

    #[error("model has no reactions")]
    NoReactions,

    #[error("fast state space has {count} states, above the cap of {cap}")]
    Capacity { count: u128, cap: usize },

    #[error("exponent overflow: |<p, gamma_x>| = {0} exceeds 700")]
    Overflow(f64),

    #[error("{what} did not converge after {iterations} iterations (last error {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("operator is reducible: eigenvector entry {entry:e} at state {state}")]
    Reducible { state: usize, entry: f64 },

    #[error("degenerate support: theta[{state}] = {weight:e}")]
    DegenerateSupport { state: usize, weight: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("pair count {pairs} exceeds the cap of {cap}")]
    PairCap { pairs: u128, cap: u128 },

    #[error("velocity grid is empty at node {0}")]
    EmptyVelocityGrid(usize),

    #[error("CFL violation: dt = {dt:e} exceeds the stable step {stable:e}")]
    Cfl { dt: f64, stable: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
