//! Polynomial rate laws.
//!
//! A rate is a finite sum of monomials `k * prod x_i^a_i * prod y_j^b_j`.
//! Slow coordinates `x` are nonnegative reals, fast coordinates `y` are
//! molecule counts.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub k: f64,
    pub x_exp: Vec<u32>,
    #[serde(default)]
    pub y_exp: Vec<u32>,
}

impl Monomial {
    pub fn new(k: f64, x_exp: Vec<u32>, y_exp: Vec<u32>) -> Self {
        Self { k, x_exp, y_exp }
    }

    pub fn eval(&self, x: &[f64], y: &[u32]) -> f64 {
        let mut v = self.k;
        for (xi, &e) in x.iter().zip(&self.x_exp) {
            if e > 0 {
                v *= xi.powi(e as i32);
            }
        }
        for (&yj, &e) in y.iter().zip(&self.y_exp) {
            if e > 0 {
                v *= (yj as f64).powi(e as i32);
            }
        }
        v
    }
}

/// Signed polynomial in `(x, y)`. Used directly for control drifts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    pub monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(monomials: Vec<Monomial>) -> Self {
        Self { monomials }
    }

    pub fn constant(k: f64, slow_dim: usize) -> Self {
        Self::new(vec![Monomial::new(k, vec![0; slow_dim], Vec::new())])
    }

    pub fn eval(&self, x: &[f64], y: &[u32]) -> f64 {
        self.monomials.iter().map(|m| m.eval(x, y)).sum()
    }

    /// Checks exponent vector lengths. Empty `y_exp` is accepted as all zeros.
    pub(crate) fn check_dims(&self, slow_dim: usize, fast_dim: usize) -> Result<(), (&'static str, usize, usize)> {
        for m in &self.monomials {
            if m.x_exp.len() != slow_dim {
                return Err(("x_exp", slow_dim, m.x_exp.len()));
            }
            if !m.y_exp.is_empty() && m.y_exp.len() != fast_dim {
                return Err(("y_exp", fast_dim, m.y_exp.len()));
            }
        }
        Ok(())
    }
}

/// Nonnegative rate: a polynomial whose coefficients are all `>= 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateFunction(Polynomial);

impl RateFunction {
    /// Returns the first negative (or NaN) coefficient on failure.
    pub fn new(poly: Polynomial) -> Result<Self, f64> {
        match poly.monomials.iter().find(|m| !(m.k >= 0.0)) {
            Some(m) => Err(m.k),
            None => Ok(Self(poly)),
        }
    }

    pub fn monomial(k: f64, x_exp: Vec<u32>, y_exp: Vec<u32>) -> Result<Self, f64> {
        Self::new(Polynomial::new(vec![Monomial::new(k, x_exp, y_exp)]))
    }

    pub fn eval(&self, x: &[f64], y: &[u32]) -> f64 {
        self.0.eval(x, y)
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.0.monomials
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.0
    }

    /// Multiplies every coefficient by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut p = self.0.clone();
        for m in &mut p.monomials {
            m.k *= factor;
        }
        Self(p)
    }

    /// True when `x_i = 0` forces the rate to vanish, i.e. every monomial
    /// with a nonzero coefficient carries `x_i`.
    pub fn vanishes_at_zero(&self, i: usize) -> bool {
        self.0
            .monomials
            .iter()
            .all(|m| m.k == 0.0 || m.x_exp.get(i).copied().unwrap_or(0) >= 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_eval() {
        let m = Monomial::new(2.0, vec![1, 0], vec![0, 2]);
        assert_eq!(m.eval(&[3.0, 5.0], &[7, 2]), 2.0 * 3.0 * 4.0);
        // zero exponent at a zero coordinate contributes 1
        assert_eq!(m.eval(&[3.0, 0.0], &[0, 1]), 6.0);
    }

    #[test]
    fn rejects_negative_coefficients() {
        let p = Polynomial::new(vec![Monomial::new(-1.0, vec![0], vec![])]);
        assert_eq!(RateFunction::new(p), Err(-1.0));
        let p = Polynomial::new(vec![Monomial::new(f64::NAN, vec![0], vec![])]);
        assert!(RateFunction::new(p).is_err());
    }

    #[test]
    fn vanishing_at_boundary() {
        let r = RateFunction::monomial(1.0, vec![1, 0], vec![1, 0]).unwrap();
        assert!(r.vanishes_at_zero(0));
        assert!(!r.vanishes_at_zero(1));
        let zero = RateFunction::monomial(0.0, vec![0, 0], vec![]).unwrap();
        assert!(zero.vanishes_at_zero(0));
    }
}
