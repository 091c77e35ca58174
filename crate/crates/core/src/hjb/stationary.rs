//! Semi-Lagrangian value iteration for `f - lambda H(x, grad f) = h`.
//!
//! The resolvent is the value of a discounted control problem: run along a
//! path with velocity `v`, collect `h / lambda - L(x, v)` per unit time and
//! discount at rate `1 / lambda`. One step of length `dt` with frozen
//! velocity gives
//!
//! ```text
//! f(x) = max_v { (1 - b) (h(x) - lambda L(x, v)) + b Interp f(x + dt v) },   b = exp(-dt / lambda)
//! ```
//!
//! which is monotone in `(h, f)`, leaves constants fixed when `min_v L = 0`
//! and contracts with factor `b`.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{Grid, GridFunction};
use super::residual::residual_check;
use super::SolveReport;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::lagrangian::{legendre, velocity_bounds, LegendreConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryConfig {
    /// Velocity grid points per axis inside each node's velocity box.
    pub vgrid: usize,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Momentum radius used to estimate the velocity boxes.
    pub v_radius: f64,
    /// Run exactly this many sweeps from `f = h` instead of stopping on `tol`.
    pub sweeps: Option<usize>,
    pub legendre: LegendreConfig,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self {
            vgrid: 5,
            dt: 0.05,
            tol: 1e-10,
            max_iter: 100_000,
            v_radius: 1.0,
            sweeps: None,
            legendre: LegendreConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OperatorStats {
    pub velocities: usize,
    /// Velocities dropped because `L = +inf` there.
    pub unbounded: usize,
    /// Velocities dropped because the Legendre ascent failed.
    pub failed: usize,
    pub radius_limited: usize,
    /// Candidate foot points that left the grid box and were projected.
    pub projected_feet: usize,
}

/// The update with all `L` values and interpolation stencils precomputed,
/// reusable for any right-hand side `h` on the same grid.
#[derive(Debug, Clone)]
pub struct StationaryOperator {
    grid: Grid,
    lambda: f64,
    dt: f64,
    discount: f64,
    // node n owns candidates cand_start[n]..cand_start[n+1]
    cand_start: Vec<usize>,
    // (1 - b) lambda L(x, v)
    cand_cost: Vec<f64>,
    // candidate c owns stencil entries sten_start[c]..sten_start[c+1]
    sten_start: Vec<usize>,
    sten_node: Vec<u32>,
    // b * interpolation weight
    sten_weight: Vec<f64>,
    pub stats: OperatorStats,
}

struct NodeCandidates {
    costs: Vec<f64>,
    stencils: Vec<Vec<(usize, f64)>>,
    stats: OperatorStats,
}

fn velocity_grid(lower: &[f64], upper: &[f64], per_axis: usize, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let l = lower.len();
    let k = per_axis.max(1);
    let tick = |a: usize, i: usize| {
        if k == 1 || upper[a] == lower[a] {
            0.5 * (lower[a] + upper[a])
        } else {
            lower[a] + (upper[a] - lower[a]) * i as f64 / (k - 1) as f64
        }
    };
    let mut out: Vec<Vec<f64>> = extra.to_vec();
    for code in 0..k.pow(l as u32) {
        let mut c = code;
        let mut v = vec![0.0; l];
        for a in (0..l).rev() {
            v[a] = tick(a, c % k);
            c /= k;
        }
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

impl StationaryOperator {
    pub fn build<H: Hamiltonian + ?Sized>(h: &H, grid: &Grid, lambda: f64, cfg: &StationaryConfig) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        if !(cfg.dt > 0.0) {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if h.slow_dim() != grid.dim() {
            return Err(Error::InvalidArgument("grid dimension does not match the Hamiltonian".into()));
        }
        let discount = (-cfg.dt / lambda).exp();
        let gain = -(-cfg.dt / lambda).exp_m1();
        let per_node: Vec<Result<NodeCandidates>> = (0..grid.len())
            .into_par_iter()
            .map(|n| {
                let x = grid.node(n);
                let (_, v0) = h.value_and_grad(&x, &vec![0.0; x.len()])?;
                let bx = velocity_bounds(h, &x, cfg.v_radius)?;
                let vs = velocity_grid(&bx.lower, &bx.upper, cfg.vgrid, &[vec![0.0; x.len()], v0]);
                let mut out = NodeCandidates { costs: Vec::new(), stencils: Vec::new(), stats: OperatorStats::default() };
                for v in vs {
                    out.stats.velocities += 1;
                    let lr = match legendre(h, &x, &v, &cfg.legendre) {
                        Ok(r) => r,
                        Err(Error::NonConvergence { .. }) => {
                            out.stats.failed += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    if lr.unbounded {
                        out.stats.unbounded += 1;
                        continue;
                    }
                    if lr.radius_limited {
                        out.stats.radius_limited += 1;
                    }
                    let foot: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + cfg.dt * b).collect();
                    if grid.project(&foot) != foot {
                        out.stats.projected_feet += 1;
                    }
                    out.costs.push(gain * lambda * lr.value);
                    out.stencils.push(grid.stencil(&foot));
                }
                if out.costs.is_empty() {
                    return Err(Error::EmptyVelocityGrid(n));
                }
                Ok(out)
            })
            .collect();

        let mut op = StationaryOperator {
            grid: grid.clone(),
            lambda,
            dt: cfg.dt,
            discount,
            cand_start: vec![0],
            cand_cost: Vec::new(),
            sten_start: vec![0],
            sten_node: Vec::new(),
            sten_weight: Vec::new(),
            stats: OperatorStats::default(),
        };
        for node in per_node {
            let node = node?;
            for (cost, st) in node.costs.into_iter().zip(node.stencils) {
                op.cand_cost.push(cost);
                for (i, w) in st {
                    op.sten_node.push(i as u32);
                    op.sten_weight.push(discount * w);
                }
                op.sten_start.push(op.sten_node.len());
            }
            op.cand_start.push(op.cand_cost.len());
            let s = &mut op.stats;
            s.velocities += node.stats.velocities;
            s.unbounded += node.stats.unbounded;
            s.failed += node.stats.failed;
            s.radius_limited += node.stats.radius_limited;
            s.projected_feet += node.stats.projected_feet;
        }
        Ok(op)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Contraction factor `exp(-dt / lambda)`.
    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// One application of the update to the iterate `f`.
    pub fn sweep(&self, h: &[f64], f: &[f64]) -> Vec<f64> {
        let gain = -(-self.dt / self.lambda).exp_m1();
        (0..self.grid.len())
            .into_par_iter()
            .map(|n| {
                let mut best = f64::NEG_INFINITY;
                for c in self.cand_start[n]..self.cand_start[n + 1] {
                    let mut acc = -self.cand_cost[c];
                    for s in self.sten_start[c]..self.sten_start[c + 1] {
                        acc += self.sten_weight[s] * f[self.sten_node[s] as usize];
                    }
                    best = best.max(acc);
                }
                gain * h[n] + best
            })
            .collect()
    }

    /// Iterates from `f = h` to the fixed point (or for `cfg.sweeps` sweeps).
    /// The residual field is not computed here; see [`solve_stationary`].
    pub fn solve(&self, h: &GridFunction, cfg: &StationaryConfig) -> Result<(GridFunction, SolveReport)> {
        if h.grid != self.grid {
            return Err(Error::GridMismatch("right-hand side is not on the operator grid".into()));
        }
        let stop = cfg.tol * (1.0 - self.discount);
        let mut f = h.values.clone();
        let mut update = f64::INFINITY;
        let mut iterations = 0;
        let limit = cfg.sweeps.unwrap_or(cfg.max_iter);
        while iterations < limit {
            let next = self.sweep(&h.values, &f);
            update = next.iter().zip(&f).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            f = next;
            iterations += 1;
            if cfg.sweeps.is_none() && update <= stop {
                break;
            }
        }
        if cfg.sweeps.is_none() && !(update <= stop) {
            return Err(Error::NonConvergence { what: "stationary value iteration", iterations, residual: update });
        }
        let mut flags = Vec::new();
        let s = &self.stats;
        if s.unbounded > 0 {
            flags.push(format!("{} of {} velocities dropped as unreachable", s.unbounded, s.velocities));
        }
        if s.failed > 0 {
            flags.push(format!("{} velocities dropped after Legendre non-convergence", s.failed));
        }
        if s.radius_limited > 0 {
            flags.push(format!("{} radius-limited Legendre values", s.radius_limited));
        }
        if s.projected_feet > 0 {
            flags.push(format!("{} foot points projected onto the grid box", s.projected_feet));
        }
        let report = SolveReport {
            iterations,
            final_update_sup: update,
            residual_sup: f64::NAN,
            cfl_dt: None,
            flags,
            config: serde_json::to_value(cfg).ok(),
        };
        Ok((GridFunction::new(self.grid.clone(), f)?, report))
    }
}

/// Approximates the resolvent `R(lambda) h`. The report carries the post-hoc
/// residual sup of `f - lambda H(x, grad f) - h`.
pub fn solve_stationary<H: Hamiltonian + ?Sized>(
    h_eval: &H,
    h: &GridFunction,
    lambda: f64,
    cfg: &StationaryConfig,
) -> Result<(GridFunction, SolveReport)> {
    let op = StationaryOperator::build(h_eval, &h.grid, lambda, cfg)?;
    let (f, mut report) = op.solve(h, cfg)?;
    let (_, sup) = residual_check(&f, h, lambda, h_eval)?;
    report.residual_sup = sup;
    Ok((f, report))
}
