use serde::{Deserialize, Serialize};

use super::rate::{Monomial, Polynomial, RateFunction};
use crate::error::{Error, Result};

/// One admissible control: a drift field and a nonnegative running cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Control {
    pub label: String,
    pub drift: Vec<Polynomial>,
    pub cost: RateFunction,
}

/// Hamiltonian `H(x, p) = max_a { -f(x, a) . p - l(x, a) }` over a finite
/// control list.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlHamiltonian {
    slow_dim: usize,
    controls: Vec<Control>,
}

impl ControlHamiltonian {
    pub fn new(controls: Vec<Control>) -> Result<Self> {
        let first = controls.first().ok_or_else(|| Error::Schema("at least one control is required".into()))?;
        let slow_dim = first.drift.len();
        if slow_dim == 0 {
            return Err(Error::Schema("drift must have at least one component".into()));
        }
        for (i, c) in controls.iter().enumerate() {
            if c.drift.len() != slow_dim {
                return Err(Error::DimensionMismatch { reaction: i, what: "drift", expected: slow_dim, found: c.drift.len() });
            }
            for poly in c.drift.iter().chain(std::iter::once(c.cost.polynomial())) {
                poly.check_dims(slow_dim, 0)
                    .map_err(|(what, expected, found)| Error::DimensionMismatch { reaction: i, what, expected, found })?;
            }
        }
        Ok(Self { slow_dim, controls })
    }

    pub fn slow_dim(&self) -> usize {
        self.slow_dim
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    /// Eikonal family: unit drifts `f(x, a) = -a` along `+-e_i`, unit cost.
    /// `H(x, p) = |p|_inf - 1`.
    pub fn eikonal(slow_dim: usize) -> Self {
        let mut controls = Vec::new();
        for i in 0..slow_dim {
            for sign in [1.0, -1.0] {
                let drift = (0..slow_dim)
                    .map(|j| Polynomial::constant(if i == j { -sign } else { 0.0 }, slow_dim))
                    .collect();
                controls.push(Control {
                    label: format!("{}e{}", if sign > 0.0 { "+" } else { "-" }, i + 1),
                    drift,
                    cost: RateFunction::new(Polynomial::constant(1.0, slow_dim)).expect("positive"),
                });
            }
        }
        Self::new(controls).expect("valid eikonal family")
    }

    /// One-dimensional family `f(x, a) = -a`, `l(x, a) = a^2 / 2` for `a` on a
    /// uniform grid of `[-a_max, a_max]`; approximates `H(p) = p^2 / 2` for
    /// `|p| <= a_max`.
    pub fn quadratic_1d(a_max: f64, n_controls: usize) -> Self {
        assert!(n_controls >= 2);
        let controls = (0..n_controls)
            .map(|j| {
                let a = -a_max + 2.0 * a_max * j as f64 / (n_controls - 1) as f64;
                Control {
                    label: format!("a{j}"),
                    drift: vec![Polynomial::constant(-a, 1)],
                    cost: RateFunction::new(Polynomial::constant(0.5 * a * a, 1)).expect("nonnegative"),
                }
            })
            .collect();
        Self::new(controls).expect("valid quadratic family")
    }

    /// Controls with drift `f(x, a) = a * x_i^degree` along each axis and zero
    /// cost, `a = +-1`.
    pub fn power_drift(slow_dim: usize, degree: u32) -> Self {
        let mut controls = Vec::new();
        for i in 0..slow_dim {
            for sign in [1.0, -1.0] {
                let drift = (0..slow_dim)
                    .map(|j| {
                        let mut exp = vec![0; slow_dim];
                        exp[j] = degree;
                        Polynomial::new(vec![Monomial::new(if i == j { sign } else { 0.0 }, exp, vec![])])
                    })
                    .collect();
                controls.push(Control {
                    label: format!("{}x{}^{degree}", if sign > 0.0 { "+" } else { "-" }, i + 1),
                    drift,
                    cost: RateFunction::default(),
                });
            }
        }
        Self::new(controls).expect("valid power-drift family")
    }

    pub fn to_document(&self) -> ControlDocument {
        ControlDocument {
            controls: self
                .controls
                .iter()
                .map(|c| ControlEntry { label: c.label.clone(), drift: c.drift.clone(), cost: c.cost.polynomial().clone() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("control document serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDocument {
    pub controls: Vec<ControlEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlEntry {
    pub label: String,
    pub drift: Vec<Polynomial>,
    pub cost: Polynomial,
}

pub fn parse_control(text: &str) -> Result<ControlHamiltonian> {
    let doc: ControlDocument = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let controls = doc
        .controls
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let cost = RateFunction::new(c.cost).map_err(|k| Error::NegativeCoefficient { reaction: i, k })?;
            Ok(Control { label: c.label, drift: c.drift, cost })
        })
        .collect::<Result<Vec<_>>>()?;
    ControlHamiltonian::new(controls)
}
