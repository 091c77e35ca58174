use rayon::prelude::*;
use serde::Serialize;

use super::grid::{Grid, GridFunction};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

/// Centered differences at interior nodes, one-sided along axes where the
/// node touches the boundary.
pub fn gradient(grid: &Grid, values: &[f64], n: usize) -> Vec<f64> {
    let multi = grid.multi_index(n);
    (0..grid.dim())
        .map(|a| {
            let (s, dx, i, last) = (grid.stride(a), grid.spacing(a), multi[a], grid.cells()[a]);
            if i == 0 {
                (values[n + s] - values[n]) / dx
            } else if i == last {
                (values[n] - values[n - s]) / dx
            } else {
                (values[n + s] - values[n - s]) / (2.0 * dx)
            }
        })
        .collect()
}

/// Pointwise `f - lambda H(x, grad f) - h` and its sup-norm.
pub fn residual_check<H: Hamiltonian + ?Sized>(
    f: &GridFunction,
    h: &GridFunction,
    lambda: f64,
    h_eval: &H,
) -> Result<(GridFunction, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    f.check_same_grid(h)?;
    let grid = &f.grid;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let p = gradient(grid, &f.values, n);
            let hv = h_eval.value(&grid.node(n), &p)?;
            Ok(f.values[n] - lambda * hv - h.values[n])
        })
        .collect::<Result<Vec<f64>>>()?;
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((GridFunction::new(grid.clone(), values)?, sup))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub sup_diff: f64,
    pub argmax: usize,
    pub node: Vec<f64>,
}

/// `max_x (u - v)(x)` over the nodes; ties go to the lowest index.
pub fn discrete_comparison(u: &GridFunction, v: &GridFunction) -> Result<Comparison> {
    u.check_same_grid(v)?;
    let (argmax, sup_diff) = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| a - b)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    Ok(Comparison { sup_diff, argmax, node: u.grid.node(argmax) })
}
