//! Principal eigenpair of a tilted generator.
//!
//! The matrix `Q = diag(V) + L` has nonnegative off-diagonal entries, so
//! `Q + sI` with `s = 1 + max |Q_yy|` is nonnegative with a positive
//! diagonal. Power iteration on the shifted matrix converges to the
//! eigenvector of the eigenvalue with maximal real part. On small spaces
//! the power phase is followed by shifted inverse iteration with the
//! Collatz-Wielandt upper bound as shift, which keeps the iterates positive
//! and converges in a handful of steps.

use nalgebra::{DMatrix, DVector};

use super::tilted::TiltedOperator;
use crate::error::{Error, Result};

/// Spaces up to this size get the inverse-iteration polish.
pub const DENSE_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Accept operators whose positivity graph is not strongly connected
    /// (boundary states where a rate vanishes). The eigenvectors may then
    /// carry zero entries.
    pub allow_reducible: bool,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self { tol: 1e-13, max_iter: 100_000, allow_reducible: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalEigen {
    pub value: f64,
    /// Right eigenvector, max entry 1.
    pub right: Vec<f64>,
    /// Left eigenvector, normalized so that `left . right = 1`.
    pub left: Vec<f64>,
    /// `|Q right - value right|_inf`
    pub residual: f64,
    pub iterations: usize,
}

pub fn principal_eigen(op: &TiltedOperator, cfg: &EigenConfig) -> Result<PrincipalEigen> {
    if !cfg.allow_reducible {
        if let Some(state) = op.reducible_witness() {
            return Err(Error::Reducible { state, entry: 0.0 });
        }
    }
    let n = op.dim();
    let diag = op.diagonal();
    let dense = (n > 1 && n <= DENSE_LIMIT).then(|| {
        let rows = op.dense();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    });

    let right = dominant(n, &diag, |v, out| op.apply(v, out), dense.as_ref(), cfg)?;
    let left = dominant(n, &diag, |v, out| op.apply_transpose(v, out), dense.as_ref().map(|m| m.transpose()).as_ref(), cfg)?;

    let mut w = left.vector;
    let dot: f64 = w.iter().zip(&right.vector).map(|(a, b)| a * b).sum();
    if !(dot > 0.0) {
        return Err(Error::NonConvergence { what: "left/right eigenvector pairing", iterations: left.iterations, residual: dot });
    }
    w.iter_mut().for_each(|v| *v /= dot);
    Ok(PrincipalEigen {
        value: right.value,
        residual: right.residual,
        right: right.vector,
        left: w,
        iterations: right.iterations + left.iterations,
    })
}

struct Dominant {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
    iterations: usize,
}

fn dominant(
    n: usize,
    diag: &[f64],
    apply: impl Fn(&[f64], &mut [f64]),
    dense: Option<&DMatrix<f64>>,
    cfg: &EigenConfig,
) -> Result<Dominant> {
    if n == 1 {
        return Ok(Dominant { value: diag[0], vector: vec![1.0], residual: 0.0, iterations: 0 });
    }
    let shift = 1.0 + diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    // switch to inverse iteration once the residual is this small
    let polish_at = 1e-3;
    let mut polishing = false;
    // inverse-iteration shift; only lowered from strictly positive iterates,
    // where the Collatz-Wielandt bound is a certified upper bound
    let mut mu = f64::INFINITY;
    let mut last = f64::INFINITY;

    for it in 0..cfg.max_iter {
        apply(&x, &mut y);
        let (value, residual, upper) = estimates(&x, &y);
        last = residual;
        if !value.is_finite() {
            break;
        }
        if residual <= cfg.tol * (1.0 + value.abs()) {
            return Ok(Dominant { value, vector: x, residual, iterations: it + 1 });
        }
        if x.iter().all(|&v| v > 0.0) {
            mu = mu.min(upper + (upper - value).max(0.0) + 1e-10 * (1.0 + upper.abs()));
        }
        if let Some(m) = dense {
            if mu.is_finite() && (polishing || residual <= polish_at * (1.0 + value.abs()) || it >= 200) {
                polishing = true;
                let a = DMatrix::from_diagonal_element(n, n, mu) - m;
                if let Some(z) = a.lu().solve(&DVector::from_column_slice(&x)) {
                    if z.iter().all(|v| v.is_finite()) && normalize_into(z.as_slice(), &mut x) {
                        continue;
                    }
                }
                // fall back to plain power steps if the solve degenerates
                polishing = false;
                mu = f64::INFINITY;
            }
        }
        for i in 0..n {
            y[i] += shift * x[i];
        }
        if !normalize_into(&y, &mut x) {
            break;
        }
    }
    Err(Error::NonConvergence { what: "principal eigenvector", iterations: cfg.max_iter, residual: last })
}

/// `(value, residual, collatz_wielandt_upper)` for the current iterate `x`
/// (max entry 1) and `y = Q x`.
fn estimates(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let k = x
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > x[best] { i } else { best });
    let value = y[k] / x[k];
    let residual = x.iter().zip(y).fold(0.0f64, |m, (&xi, &yi)| m.max((yi - value * xi).abs()));
    let upper = x
        .iter()
        .zip(y)
        .filter(|(&xi, _)| xi > 0.0)
        .fold(f64::NEG_INFINITY, |m, (&xi, &yi)| m.max(yi / xi));
    (value, residual, upper)
}

/// Writes `v / max(v)` into `x` after sign-fixing; false if degenerate.
fn normalize_into(v: &[f64], x: &mut [f64]) -> bool {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    let scale = if hi.abs() >= lo.abs() { hi } else { lo };
    if scale == 0.0 || !scale.is_finite() {
        return false;
    }
    for (xi, &vi) in x.iter_mut().zip(v) {
        // clip roundoff-level negatives of a nonnegative vector
        *xi = (vi / scale).max(0.0);
    }
    true
}
