use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hamiltonian::Hamiltonian;
use crate::hjb::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContainmentKind {
    /// `U(x) = log(1 + |x|^2) / 2`
    LogQuadratic,
    /// `U(x) = |x|^2 / 2`
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentSpec {
    pub kind: ContainmentKind,
    pub c_estimate: Option<f64>,
}

impl ContainmentSpec {
    pub fn new(kind: ContainmentKind) -> Self {
        Self { kind, c_estimate: None }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self.kind {
            ContainmentKind::LogQuadratic => 0.5 * r2.ln_1p(),
            ContainmentKind::Quadratic => 0.5 * r2,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            ContainmentKind::LogQuadratic => {
                let d = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
                x.iter().map(|v| v / d).collect()
            }
            ContainmentKind::Quadratic => x.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub spec: ContainmentSpec,
    pub c_estimate: f64,
    pub argmax: Vec<f64>,
    pub interior_max: f64,
    /// Max over nodes with some `x_i` in the outer 20% of its axis.
    pub shell_max: f64,
    pub pass: bool,
}

/// Evaluates `H(x, grad U(x))` on every node. Passes when the outer shell
/// does not exceed the inner region, i.e. no growth towards the truncation.
pub fn check_containment<H: Hamiltonian + ?Sized>(h: &H, spec: ContainmentSpec, grid: &Grid) -> Result<ContainmentReport> {
    let values = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let x = grid.node(n);
            h.value(&x, &spec.gradient(&x))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut interior_max = f64::NEG_INFINITY;
    let mut shell_max = f64::NEG_INFINITY;
    let mut best = 0;
    for (n, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = n;
        }
        let x = grid.node(n);
        let shell = x.iter().zip(grid.upper()).any(|(a, u)| *a > 0.8 * u);
        if shell {
            shell_max = shell_max.max(v);
        } else {
            interior_max = interior_max.max(v);
        }
    }
    let c_estimate = values[best];
    Ok(ContainmentReport {
        spec: ContainmentSpec { c_estimate: Some(c_estimate), ..spec },
        c_estimate,
        argmax: grid.node(best),
        interior_max,
        shell_max,
        pass: c_estimate.is_finite() && shell_max <= interior_max,
    })
}
