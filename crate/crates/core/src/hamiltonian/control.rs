use super::Hamiltonian;
use crate::error::{Error, Result};
use crate::model::ControlHamiltonian;

#[derive(Debug, Clone, PartialEq)]
pub struct ControlValue {
    pub value: f64,
    pub control: usize,
    pub label: String,
    /// `-f(x, a*)`: the gradient wherever the argmax is unique.
    pub grad_p: Vec<f64>,
}

impl ControlHamiltonian {
    /// Exact maximum of `-f(x, a) . p - l(x, a)` over the control list; ties go
    /// to the lowest control index.
    pub fn eval(&self, x: &[f64], p: &[f64]) -> Result<ControlValue> {
        let l = self.slow_dim();
        if x.len() != l || p.len() != l {
            return Err(Error::InvalidArgument(format!("x and p must have length {l}")));
        }
        let mut best: Option<(f64, usize)> = None;
        for (i, c) in self.controls().iter().enumerate() {
            let drift_dot: f64 = c.drift.iter().zip(p).map(|(f, &pi)| f.eval(x, &[]) * pi).sum();
            let v = -drift_dot - c.cost.eval(x, &[]);
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, i));
            }
        }
        let (value, idx) = best.expect("at least one control");
        let c = &self.controls()[idx];
        Ok(ControlValue {
            value,
            control: idx,
            label: c.label.clone(),
            grad_p: c.drift.iter().map(|f| -f.eval(x, &[])).collect(),
        })
    }
}

impl Hamiltonian for ControlHamiltonian {
    fn slow_dim(&self) -> usize {
        ControlHamiltonian::slow_dim(self)
    }

    fn value(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        Ok(self.eval(x, p)?.value)
    }

    fn value_and_grad(&self, x: &[f64], p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let v = self.eval(x, p)?;
        Ok((v.value, v.grad_p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Control, Polynomial, RateFunction};

    #[test]
    fn eikonal_value_and_argmax() {
        let ch = ControlHamiltonian::eikonal(2);
        let v = ch.eval(&[0.3, 0.4], &[2.0, 0.0]).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.label, "+e1");
        assert_eq!(v.grad_p, vec![1.0, 0.0]);
        // all four controls tie at p = 0; lowest index wins
        let v = ch.eval(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!((v.value, v.control), (-1.0, 0));
    }

    #[test]
    fn zero_momentum_is_minus_min_cost() {
        let controls = vec![
            Control { label: "a".into(), drift: vec![Polynomial::constant(1.0, 1)], cost: RateFunction::new(Polynomial::constant(2.0, 1)).unwrap() },
            Control { label: "b".into(), drift: vec![Polynomial::constant(-3.0, 1)], cost: RateFunction::new(Polynomial::constant(0.5, 1)).unwrap() },
        ];
        let ch = ControlHamiltonian::new(controls).unwrap();
        assert_eq!(ch.eval(&[1.0], &[0.0]).unwrap().value, -0.5);
    }

    #[test]
    fn trivial_control() {
        let ch = ControlHamiltonian::new(vec![Control {
            label: "rest".into(),
            drift: vec![Polynomial::constant(0.0, 2); 2],
            cost: RateFunction::default(),
        }])
        .unwrap();
        for (x, p) in [([0.0, 1.0], [5.0, -3.0]), ([2.0, 2.0], [0.1, 0.2])] {
            assert_eq!(ch.eval(&x, &p).unwrap().value, 0.0);
        }
    }

    #[test]
    fn cost_shift_lowers_value_exactly() {
        let base = ControlHamiltonian::quadratic_1d(2.0, 9);
        let c = 0.75;
        let shifted = ControlHamiltonian::new(
            base.controls()
                .iter()
                .map(|ctl| {
                    let mut cost = ctl.cost.polynomial().clone();
                    cost.monomials.push(crate::model::Monomial::new(c, vec![0], vec![]));
                    Control { cost: RateFunction::new(cost).unwrap(), ..ctl.clone() }
                })
                .collect(),
        )
        .unwrap();
        for p in [-3.0, -0.4, 0.0, 0.25, 1.7] {
            let a = base.eval(&[0.5], &[p]).unwrap().value;
            let b = shifted.eval(&[0.5], &[p]).unwrap().value;
            assert!((a - c - b).abs() <= 1e-15, "{a} {b}");
        }
    }
}
