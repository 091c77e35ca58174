//! Grid solvers for the stationary equation `f - lambda H(x, grad f) = h`
//! and the evolution `d_t u = H(x, grad u)` on a truncated orthant.

mod evolution;
mod grid;
mod residual;
mod stationary;

use serde::Serialize;

pub use evolution::{estimate_sigma, solve_evolution, EvolutionConfig, Snapshot};
pub use grid::{Grid, GridFunction};
pub use residual::{discrete_comparison, gradient, residual_check, Comparison};
pub use stationary::{solve_stationary, OperatorStats, StationaryConfig, StationaryOperator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Sup-norm change of the last sweep or time step.
    pub final_update_sup: f64,
    /// Recomputed from the returned solution, not carried over from the iteration.
    pub residual_sup: f64,
    pub cfl_dt: Option<f64>,
    pub flags: Vec<String>,
    pub config: Option<serde_json::Value>,
}
