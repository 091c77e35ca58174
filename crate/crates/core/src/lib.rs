//! Variational Hamiltonians of two-time-scale reaction networks.
//!
//! The crate evaluates `H(x, p) = sup_theta [Lambda(x, p, theta) - I(x, p, theta)]`
//! for reaction networks whose fast species relax on a faster time scale,
//! where `H` is the principal eigenvalue of a tilted fast generator, and for
//! classical finite-control Hamiltonians. On top of the evaluator it
//! provides the Legendre dual and path actions, grid solvers for the
//! stationary equation `f - lambda H(x, grad f) = h` and the evolution
//! equation `d_t u = H(x, grad u)`, and numerical certificates for the
//! structural assumptions behind the comparison principle.
//!
//! ```
//! use varham::hamiltonian::CrnHamiltonian;
//! use varham::model::builtin_michaelis_menten;
//!
//! let net = builtin_michaelis_menten([1.0; 4], 1).unwrap();
//! let h = CrnHamiltonian::new(net).unwrap();
//! let v = h.eval(&[1.0, 1.0], &[std::f64::consts::LN_2, 0.0]).unwrap();
//! assert!((v.value - (7f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
//! ```

pub mod diagnostics;
pub mod error;
pub mod hamiltonian;
pub mod hjb;
pub mod lagrangian;
pub mod model;

pub use error::{Error, Result};
pub use hamiltonian::Hamiltonian;
