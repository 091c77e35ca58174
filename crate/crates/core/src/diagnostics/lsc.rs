use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{CrnHamiltonian, ThetaMeasure};

/// One point `(x, p, theta)` of a sequence in the cost's domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostPoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub theta: ThetaMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LscReport {
    /// `(I - Lambda)` along the sequence; `None` where evaluation failed.
    pub values: Vec<Option<f64>>,
    pub limit_value: Option<f64>,
    /// Minimum over the second half of the sequence.
    pub tail_liminf: Option<f64>,
    pub tol: f64,
    /// The last step of the sequence is below `1e-6`.
    pub converged: bool,
    pub inconclusive: bool,
    pub pass: bool,
    pub errors: Vec<String>,
}

fn gap(a: &CostPoint, b: &CostPoint) -> f64 {
    a.x.iter()
        .zip(&b.x)
        .chain(a.p.iter().zip(&b.p))
        .chain(a.theta.weights().iter().zip(b.theta.weights()))
        .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()))
}

fn penalized_cost(h: &CrnHamiltonian, q: &CostPoint) -> Result<f64> {
    Ok(h.cost(&q.x, &q.p, &q.theta)? - h.lambda(&q.x, &q.p, &q.theta)?)
}

/// Checks `liminf (I - Lambda)(x_n, p_n, theta_n) >= (I - Lambda)(x, p, theta) - tol`
/// along the tail of a user-supplied sequence.
pub fn lsc_spot_check(h: &CrnHamiltonian, sequence: &[CostPoint], limit: &CostPoint, tol: f64) -> Result<LscReport> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let mut errors = Vec::new();
    let mut eval = |q: &CostPoint, label: String| match penalized_cost(h, q) {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(format!("{label}: {e}"));
            None
        }
    };
    let values: Vec<Option<f64>> = sequence.iter().enumerate().map(|(i, q)| eval(q, format!("term {i}"))).collect();
    let limit_value = eval(limit, "limit".to_string());
    let converged = match sequence {
        [.., a, b] => gap(a, b) < 1e-6,
        [only] => gap(only, limit) < 1e-6,
        [] => unreachable!(),
    };
    let tail = &values[values.len() / 2..];
    let tail_liminf = if tail.iter().all(Option::is_some) {
        Some(tail.iter().flatten().fold(f64::INFINITY, |m, &v| m.min(v)))
    } else {
        None
    };
    let inconclusive = !converged || tail_liminf.is_none() || limit_value.is_none();
    let pass = !inconclusive && tail_liminf.unwrap() >= limit_value.unwrap() - tol;
    Ok(LscReport { values, limit_value, tail_liminf, tol, converged, inconclusive, pass, errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_michaelis_menten;

    fn mm() -> CrnHamiltonian {
        CrnHamiltonian::new(builtin_michaelis_menten([1.0; 4], 2).unwrap()).unwrap()
    }

    fn point(t: f64) -> CostPoint {
        CostPoint { x: vec![1.0, 0.5], p: vec![0.3, -0.2], theta: ThetaMeasure::new(vec![0.2 + t, 0.3, 0.5 - t]).unwrap() }
    }

    #[test]
    fn constant_sequence_passes() {
        let r = lsc_spot_check(&mm(), &vec![point(0.0); 4], &point(0.0), 0.0).unwrap();
        assert!(r.pass && r.values.iter().all(|v| *v == r.limit_value));
    }

    #[test]
    fn line_of_full_support_measures() {
        let seq: Vec<CostPoint> = (1..=30).map(|k| point(0.1 * 0.5f64.powi(k))).collect();
        let r = lsc_spot_check(&mm(), &seq, &point(0.0), 1e-4).unwrap();
        assert!(r.converged && r.pass, "{r:?}");
    }

    #[test]
    fn point_mass_limit_is_inconclusive() {
        let lim = CostPoint { x: vec![1.0, 0.5], p: vec![0.3, -0.2], theta: ThetaMeasure::point_mass(3, 0) };
        let seq: Vec<CostPoint> = (1..=30)
            .map(|k| {
                let t = 0.5f64.powi(k);
                CostPoint { theta: ThetaMeasure::new(vec![1.0 - 2.0 * t, t, t]).unwrap(), ..lim.clone() }
            })
            .collect();
        let r = lsc_spot_check(&mm(), &seq, &lim, 1e-4).unwrap();
        assert!(r.inconclusive && !r.pass && !r.errors.is_empty());
    }
}
