//! Doubling of variables on a grid: maximize
//!
//! ```text
//! Phi(x, y) = u(x)/(1-e) - v(y)/(1+e) - (a/2)|x-y|^2 - e/(1-e) U(x) - e/(1+e) U(y)
//! ```
//!
//! over all node pairs and watch the penalty and the Hamiltonian difference
//! at `p = a (x - y)` as `a` grows.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::containment::ContainmentSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::hjb::GridFunction;

pub const PAIR_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoublingConfig {
    pub tol: f64,
    pub pair_cap: u128,
}

impl Default for DoublingConfig {
    fn default() -> Self {
        Self { tol: 1e-2, pair_cap: PAIR_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingRow {
    pub eps: f64,
    pub alpha: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub phi: f64,
    /// `a |x - y|^2 / 2`
    pub penalty: f64,
    pub momentum: Vec<f64>,
    /// `H(x, p)`, the value entering the subsolution inequality.
    pub h_sub: f64,
    /// `H(y, p)`, the value entering the supersolution inequality.
    pub h_super: f64,
    /// `H(x, p) - H(y, p)`; NaN when `H` overflows at `p`.
    pub h_diff: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSummary {
    pub eps: f64,
    /// Penalty non-increasing over the upper half of the alpha list.
    pub penalty_decreasing: bool,
    pub final_h_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub rows: Vec<DoublingRow>,
    pub summary: Vec<EpsSummary>,
    pub tol: f64,
    pub pass: bool,
}

impl DoublingReport {
    /// Columns `eps,alpha,x_1..x_l,y_1..y_l,penalty,H_diff`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let l = self.rows.first().map_or(0, |r| r.x.len());
        let mut header = vec!["eps".to_string(), "alpha".to_string()];
        header.extend((1..=l).map(|i| format!("x_{i}")));
        header.extend((1..=l).map(|i| format!("y_{i}")));
        header.extend(["penalty".to_string(), "H_diff".to_string()]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.eps.to_string(), r.alpha.to_string()];
            rec.extend(r.x.iter().chain(&r.y).map(|v| v.to_string()));
            rec.extend([r.penalty.to_string(), r.h_diff.to_string()]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn doubling_certificate<H: Hamiltonian + ?Sized>(
    u: &GridFunction,
    v: &GridFunction,
    upsilon: ContainmentSpec,
    eps_list: &[f64],
    alpha_list: &[f64],
    h: &H,
    cfg: &DoublingConfig,
) -> Result<DoublingReport> {
    u.check_same_grid(v)?;
    let grid = &u.grid;
    let n = grid.len();
    let pairs = (n as u128) * (n as u128);
    if pairs > cfg.pair_cap {
        return Err(Error::PairCap { pairs, cap: cfg.pair_cap });
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) || alpha_list.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("eps must lie in (0, 1) and alpha must be positive".into()));
    }
    let mut alphas = alpha_list.to_vec();
    alphas.sort_by(f64::total_cmp);
    let nodes: Vec<Vec<f64>> = grid.nodes().collect();
    let ups: Vec<f64> = nodes.iter().map(|x| upsilon.value(x)).collect();

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &eps in eps_list {
        let a: Vec<f64> = (0..n).map(|i| u.values[i] / (1.0 - eps) - eps / (1.0 - eps) * ups[i]).collect();
        let b: Vec<f64> = (0..n).map(|j| v.values[j] / (1.0 + eps) + eps / (1.0 + eps) * ups[j]).collect();
        let first = rows.len();
        for &alpha in &alphas {
            // per-x best y, then the lowest pair index among ties
            let best = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut bj = 0;
                    let mut bv = f64::NEG_INFINITY;
                    for j in 0..n {
                        let d2: f64 = nodes[i].iter().zip(&nodes[j]).map(|(p, q)| (p - q) * (p - q)).sum();
                        let phi = a[i] - b[j] - 0.5 * alpha * d2;
                        if phi > bv {
                            bv = phi;
                            bj = j;
                        }
                    }
                    (i, bj, bv)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold((0, 0, f64::NEG_INFINITY), |acc, c| if c.2 > acc.2 { c } else { acc });
            let (i, j, phi) = best;
            let (x, y) = (nodes[i].clone(), nodes[j].clone());
            let d2: f64 = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum();
            let momentum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| alpha * (p - q)).collect();
            let mut flags = Vec::new();
            let (h_sub, h_super) = match (h.value(&x, &momentum), h.value(&y, &momentum)) {
                (Ok(s), Ok(t)) => (s, t),
                (Err(Error::Overflow(_)), _) | (_, Err(Error::Overflow(_))) => {
                    flags.push("H overflow at the doubling momentum".to_string());
                    (f64::NAN, f64::NAN)
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            rows.push(DoublingRow {
                eps,
                alpha,
                x,
                y,
                phi,
                penalty: 0.5 * alpha * d2,
                momentum,
                h_sub,
                h_super,
                h_diff: h_sub - h_super,
                flags,
            });
        }
        let block = &rows[first..];
        let top = &block[block.len() / 2..];
        let penalty_decreasing = top.windows(2).all(|w| w[1].penalty <= w[0].penalty);
        let final_h_diff = block.last().map_or(f64::NAN, |r| r.h_diff);
        summary.push(EpsSummary { eps, penalty_decreasing, final_h_diff, pass: penalty_decreasing && final_h_diff <= cfg.tol });
    }
    let pass = !summary.is_empty() && summary.iter().all(|s| s.pass);
    Ok(DoublingReport { rows, summary, tol: cfg.tol, pass })
}
