//! Hamiltonians `H(x, p)`: the reaction-network family (principal
//! eigenvalue of a tilted fast generator) and the finite control family.

mod control;
mod crn;
mod eigen;
mod tilted;

pub use control::ControlValue;
pub use crn::{CostConfig, CrnHamiltonian, HamiltonianValue, SupThetaGap, ThetaMeasure};
pub use eigen::{principal_eigen, EigenConfig, PrincipalEigen, DENSE_LIMIT};
pub use tilted::{TiltTerm, TiltedOperator, MAX_EXPONENT};

use crate::error::Result;

/// A Hamiltonian that can be evaluated pointwise, with its momentum
/// gradient. Everything downstream (Legendre duals, grid solvers,
/// diagnostics) works through this trait.
pub trait Hamiltonian: Sync {
    fn slow_dim(&self) -> usize;

    fn value(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        Ok(self.value_and_grad(x, p)?.0)
    }

    fn value_and_grad(&self, x: &[f64], p: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl<H: Hamiltonian + ?Sized> Hamiltonian for &H {
    fn slow_dim(&self) -> usize {
        (**self).slow_dim()
    }

    fn value(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        (**self).value(x, p)
    }

    fn value_and_grad(&self, x: &[f64], p: &[f64]) -> Result<(f64, Vec<f64>)> {
        (**self).value_and_grad(x, p)
    }
}
