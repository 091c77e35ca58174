//! Explicit Lax-Friedrichs scheme for `d_t u = H(x, grad u)`.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{Grid, GridFunction};
use super::residual::gradient;
use super::SolveReport;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::lagrangian::momentum_sample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub cfl: f64,
    /// Per-axis dissipation; estimated from the initial datum when absent.
    pub sigma: Option<Vec<f64>>,
    /// Forced time step; must satisfy the stability bound.
    pub dt: Option<f64>,
    /// Output times in `(0, T]`; the final time is always included.
    pub snapshots: Vec<f64>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { cfl: 0.5, sigma: None, dt: None, snapshots: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub u: GridFunction,
}

/// Backward and forward differences at node `n`; both equal the one-sided
/// difference on boundary faces.
fn differences(grid: &Grid, u: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let multi = grid.multi_index(n);
    let l = grid.dim();
    let mut minus = vec![0.0; l];
    let mut plus = vec![0.0; l];
    for a in 0..l {
        let (s, dx, i, last) = (grid.stride(a), grid.spacing(a), multi[a], grid.cells()[a]);
        if i == 0 {
            let d = (u[n + s] - u[n]) / dx;
            minus[a] = d;
            plus[a] = d;
        } else if i == last {
            let d = (u[n] - u[n - s]) / dx;
            minus[a] = d;
            plus[a] = d;
        } else {
            minus[a] = (u[n] - u[n - s]) / dx;
            plus[a] = (u[n + s] - u[n]) / dx;
        }
    }
    (minus, plus)
}

/// Componentwise range of all one-sided differences of `u`.
fn gradient_range(grid: &Grid, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let l = grid.dim();
    let mut lo = vec![f64::INFINITY; l];
    let mut hi = vec![f64::NEG_INFINITY; l];
    for n in 0..grid.len() {
        let (m, p) = differences(grid, u, n);
        for a in 0..l {
            lo[a] = lo[a].min(m[a]).min(p[a]);
            hi[a] = hi[a].max(m[a]).max(p[a]);
        }
    }
    (lo, hi)
}

/// `1.25 * max |dH/dp_i|` over the nodes and a sample of the box `[lo, hi]`.
pub fn estimate_sigma<H: Hamiltonian + ?Sized>(h: &H, grid: &Grid, lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    let l = grid.dim();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let probes: Vec<Vec<f64>> = momentum_sample(&half, 8)
        .into_iter()
        .map(|q| q.iter().zip(&mid).map(|(a, b)| a + b).collect())
        .collect();
    let per_node = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let x = grid.node(n);
            let mut s = vec![0.0f64; l];
            for p in &probes {
                let (_, g) = h.value_and_grad(&x, p)?;
                for a in 0..l {
                    s[a] = s[a].max(g[a].abs());
                }
            }
            Ok(s)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut sigma = vec![0.0f64; l];
    for s in per_node {
        for a in 0..l {
            sigma[a] = sigma[a].max(s[a]);
        }
    }
    Ok(sigma.into_iter().map(|s| 1.25 * s).collect())
}

/// Runs the scheme to `t_final`, returning the requested snapshots.
pub fn solve_evolution<H: Hamiltonian + ?Sized>(
    h: &H,
    u0: &GridFunction,
    t_final: f64,
    cfg: &EvolutionConfig,
) -> Result<(Vec<Snapshot>, SolveReport)> {
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidArgument("final time must be positive".into()));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(Error::InvalidArgument("cfl must lie in (0, 1]".into()));
    }
    let grid = &u0.grid;
    if h.slow_dim() != grid.dim() {
        return Err(Error::InvalidArgument("grid dimension does not match the Hamiltonian".into()));
    }
    let mut times: Vec<f64> = cfg.snapshots.iter().copied().filter(|&t| t < t_final).collect();
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("snapshot times must be positive".into()));
    }
    times.push(t_final);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut flags = Vec::new();
    let (lo, hi) = gradient_range(grid, &u0.values);
    let sigma = match &cfg.sigma {
        Some(s) => {
            if s.len() != grid.dim() || s.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::InvalidArgument("sigma needs one nonnegative entry per axis".into()));
            }
            flags.push("sigma overridden".to_string());
            s.clone()
        }
        None => estimate_sigma(h, grid, &lo, &hi)?,
    };
    let rate: f64 = sigma.iter().sum::<f64>() / grid.min_spacing();
    let stable = if rate > 0.0 { 1.0 / rate } else { f64::INFINITY };
    let dt = match cfg.dt {
        Some(dt) if !(dt > 0.0) || dt > stable => return Err(Error::Cfl { dt, stable }),
        Some(dt) => dt,
        None => (cfg.cfl * stable).min(t_final),
    };

    let step = |u: &[f64], tau: f64| -> Result<(Vec<f64>, bool, bool)> {
        let out = (0..grid.len())
            .into_par_iter()
            .map(|n| {
                let (m, p) = differences(grid, u, n);
                let inside = m.iter().chain(&p).enumerate().all(|(k, &d)| {
                    let a = k % grid.dim();
                    let slack = 1e-9 * (1.0 + lo[a].abs().max(hi[a].abs()));
                    d >= lo[a] - slack && d <= hi[a] + slack
                });
                let centre: Vec<f64> = m.iter().zip(&p).map(|(a, b)| 0.5 * (a + b)).collect();
                let x = grid.node(n);
                // a one-sided boundary update is monotone only when dH/dp
                // points out of the box on that face
                let mut outflow = true;
                let mut num = if grid.is_boundary(n) {
                    let (hv, g) = h.value_and_grad(&x, &centre)?;
                    let multi = grid.multi_index(n);
                    for a in 0..grid.dim() {
                        if (multi[a] == 0 && g[a] < 0.0) || (multi[a] == grid.cells()[a] && g[a] > 0.0) {
                            outflow = false;
                        }
                    }
                    hv
                } else {
                    h.value(&x, &centre)?
                };
                for a in 0..grid.dim() {
                    num += 0.5 * sigma[a] * (p[a] - m[a]);
                }
                Ok((u[n] + tau * num, inside, outflow))
            })
            .collect::<Result<Vec<(f64, bool, bool)>>>()?;
        let inside = out.iter().all(|o| o.1);
        let outflow = out.iter().all(|o| o.2);
        Ok((out.into_iter().map(|o| o.0).collect(), inside, outflow))
    };

    let mut u = u0.values.clone();
    let mut prev = u.clone();
    let mut t = 0.0;
    let mut steps = 0;
    let mut last_dt = dt;
    let mut underflow = false;
    let mut inflow = false;
    let mut snapshots = Vec::with_capacity(times.len());
    for &target in &times {
        while t < target {
            // shrink the final step so the target is hit exactly
            let tau = if t + dt >= target * (1.0 - 1e-14) { target - t } else { dt };
            let (next, inside, outflow) = step(&u, tau)?;
            underflow |= cfg.sigma.is_none() && !inside;
            inflow |= !outflow;
            prev = std::mem::replace(&mut u, next);
            last_dt = tau;
            t = if tau == target - t { target } else { t + tau };
            steps += 1;
        }
        snapshots.push(Snapshot { time: target, u: GridFunction::new(grid.clone(), u.clone())? });
    }
    if underflow {
        flags.push("non-monotone: gradients left the range used to estimate sigma".to_string());
    }
    if inflow {
        flags.push("non-monotone: inflow through a boundary face".to_string());
    }

    let final_update_sup = u.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let residual_sup = (0..grid.len())
        .into_par_iter()
        .filter(|&n| !grid.is_boundary(n))
        .map(|n| {
            let hv = h.value(&grid.node(n), &gradient(grid, &u, n))?;
            Ok(((u[n] - prev[n]) / last_dt - hv).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let mut config = serde_json::to_value(cfg).ok();
    if let Some(serde_json::Value::Object(map)) = config.as_mut() {
        map.insert("sigma_used".into(), serde_json::json!(sigma));
        map.insert("T".into(), serde_json::json!(t_final));
    }
    let report = SolveReport { iterations: steps, final_update_sup, residual_sup, cfl_dt: Some(dt), flags, config };
    Ok((snapshots, report))
}
