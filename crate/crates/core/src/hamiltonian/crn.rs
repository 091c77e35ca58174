//! The reaction-network Hamiltonian: principal eigenvalue of the tilted
//! fast generator, together with its Donsker-Varadhan decomposition
//! `H = sup_theta [Lambda(theta) - I(theta)]`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use super::eigen::{principal_eigen, EigenConfig, PrincipalEigen};
use super::tilted::TiltedOperator;
use super::Hamiltonian;
use crate::error::{Error, Result};
use crate::model::{FastStateSpace, MultiScaleNetwork};

/// Probability vector over the fast state space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaMeasure(Vec<f64>);

impl ThetaMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("theta weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("theta weights sum to {total}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("theta weights must have positive mass".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(weights)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut w = vec![0.0; n];
        w[at] = 1.0;
        Self(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianValue {
    pub value: f64,
    /// Positive right eigenvector, max entry 1.
    pub right: Vec<f64>,
    /// Positive left eigenvector, `left . right = 1`.
    pub left: Vec<f64>,
    /// `left * right` entrywise.
    pub theta_star: Vec<f64>,
    pub grad_p: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostConfig {
    /// Gradient tolerance of the convex minimization defining `I`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupThetaGap {
    /// Best `Lambda - I` over all evaluated measures, `theta*` included.
    pub best: f64,
    /// Best `Lambda - I` over the random measures only.
    pub best_sampled: f64,
    /// `H - best`.
    pub gap: f64,
    pub hamiltonian: f64,
    pub samples: usize,
}

/// Reaction-network Hamiltonian with its fast state space.
#[derive(Debug, Clone)]
pub struct CrnHamiltonian {
    net: MultiScaleNetwork,
    fss: FastStateSpace,
    pub eigen: EigenConfig,
    pub cost: CostConfig,
}

impl CrnHamiltonian {
    pub fn new(net: MultiScaleNetwork) -> Result<Self> {
        if let Some(&i) = net.conservation_violations().first() {
            return Err(Error::ConservationViolated { reaction: i, sum: net.reactions()[i].fast_jump_sum() });
        }
        let fss = FastStateSpace::enumerate(net.fast_dim(), net.conservation())?;
        Ok(Self { net, fss, eigen: EigenConfig::default(), cost: CostConfig::default() })
    }

    /// Accepts reducible fast dynamics, as happens on faces `x_i = 0` where a
    /// consuming rate vanishes. Needed by the grid solvers.
    pub fn allowing_boundary(mut self) -> Self {
        self.eigen.allow_reducible = true;
        self
    }

    pub fn network(&self) -> &MultiScaleNetwork {
        &self.net
    }

    pub fn fast_states(&self) -> &FastStateSpace {
        &self.fss
    }

    pub fn assemble(&self, x: &[f64], p: &[f64]) -> Result<TiltedOperator> {
        TiltedOperator::assemble(&self.net, &self.fss, x, p)
    }

    pub fn principal(&self, x: &[f64], p: &[f64]) -> Result<(TiltedOperator, PrincipalEigen)> {
        let op = self.assemble(x, p)?;
        let eig = principal_eigen(&op, &self.eigen)?;
        Ok((op, eig))
    }

    /// `H(x, p)` with eigenvectors, optimizing measure and `grad_p H`.
    pub fn eval(&self, x: &[f64], p: &[f64]) -> Result<HamiltonianValue> {
        let (op, eig) = self.principal(x, p)?;
        let grad_p = self.gradient(&op, &eig);
        let theta_star = eig.left.iter().zip(&eig.right).map(|(a, b)| a * b).collect();
        Ok(HamiltonianValue {
            value: eig.value,
            right: eig.right,
            left: eig.left,
            theta_star,
            grad_p,
            residual: eig.residual,
        })
    }

    /// `d_{p_i} H = left^T (d_{p_i} Q) right` with `left . right = 1`. Only
    /// the tilted rates depend on `p`; on slow-only reactions the potential
    /// carries the derivative, on coupled reactions the potential and the
    /// diagonal cancel and the off-diagonal entry remains.
    fn gradient(&self, op: &TiltedOperator, eig: &PrincipalEigen) -> Vec<f64> {
        let mut grad = vec![0.0; self.net.slow_dim()];
        for t in &op.terms {
            let gamma_x = &self.net.reactions()[t.reaction].gamma_x;
            let c = eig.left[t.row] * t.weight * eig.right[t.col];
            for (g, &gi) in grad.iter_mut().zip(gamma_x) {
                *g += gi as f64 * c;
            }
        }
        grad
    }

    /// `Lambda(x, p, theta) = sum_y theta(y) V(y; x, p)`
    pub fn lambda(&self, x: &[f64], p: &[f64], theta: &ThetaMeasure) -> Result<f64> {
        let op = self.assemble(x, p)?;
        check_len(theta, op.dim())?;
        Ok(theta.weights().iter().zip(&op.potential).map(|(t, v)| t * v).sum())
    }

    /// Donsker-Varadhan cost `I(x, p, theta) = -inf_phi sum_y theta(y) (e^{-phi} L e^{phi})(y)`.
    pub fn cost(&self, x: &[f64], p: &[f64], theta: &ThetaMeasure) -> Result<f64> {
        let op = self.assemble(x, p)?;
        check_len(theta, op.dim())?;
        if let Some((state, &weight)) = theta.weights().iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
            return Err(Error::DegenerateSupport { state, weight });
        }
        let start = match principal_eigen(&op, &self.eigen) {
            Ok(e) if e.right.iter().all(|&r| r > 0.0) => e.right.iter().map(|r| r.ln()).collect(),
            _ => vec![0.0; op.dim()],
        };
        let (min, _) = minimize_dv(&op, theta.weights(), start, &self.cost)?;
        Ok(-min)
    }

    /// Samples full-support measures (normalized exponentials, i.e.
    /// symmetric Dirichlet(1)), always adds `theta*`, and reports the best
    /// `Lambda - I` and its gap to `H`.
    pub fn sup_theta_gap(&self, x: &[f64], p: &[f64], n_samples: usize, seed: u64) -> Result<SupThetaGap> {
        let hv = self.eval(x, p)?;
        let n = self.fss.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best_sampled = f64::NEG_INFINITY;
        for _ in 0..n_samples {
            let w: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).map(|v: f64| v.max(1e-300)).collect();
            let theta = ThetaMeasure::normalized(w)?;
            let v = self.lambda(x, p, &theta)? - self.cost(x, p, &theta)?;
            best_sampled = best_sampled.max(v);
        }
        let star = ThetaMeasure::normalized(hv.theta_star.clone())?;
        let at_star = self.lambda(x, p, &star)? - self.cost(x, p, &star)?;
        let best = best_sampled.max(at_star);
        Ok(SupThetaGap { best, best_sampled, gap: hv.value - best, hamiltonian: hv.value, samples: n_samples })
    }
}

fn check_len(theta: &ThetaMeasure, n: usize) -> Result<()> {
    if theta.len() != n {
        return Err(Error::InvalidArgument(format!("theta has {} entries, fast state space has {n}", theta.len())));
    }
    Ok(())
}

/// Minimizes the convex function
/// `g(phi) = sum_y theta_y [sum_{y' != y} L[y,y'] e^{phi_y' - phi_y} + L[y,y]]`
/// with gauge `phi_0 = 0` by damped Newton. Returns `(min g, phi)`.
///
/// The Hessian is the weighted graph Laplacian with symmetric edge weights
/// `w_{yy'} + w_{y'y}`, `w_{yy'} = theta_y L[y,y'] e^{phi_y' - phi_y}`.
pub(crate) fn minimize_dv(op: &TiltedOperator, theta: &[f64], mut phi: Vec<f64>, cfg: &CostConfig) -> Result<(f64, Vec<f64>)> {
    let n = op.dim();
    let base: f64 = theta.iter().zip(&op.generator_diag).map(|(t, d)| t * d).sum();
    let objective = |phi: &[f64]| -> f64 {
        base + op
            .generator_off
            .iter()
            .map(|&(r, c, w)| theta[r] * w * (phi[c] - phi[r]).exp())
            .sum::<f64>()
    };
    let shift = phi[0];
    phi.iter_mut().for_each(|v| *v -= shift);
    if n == 1 {
        return Ok((objective(&phi), phi));
    }
    // gradient tolerance relative to the theta-weighted exit rate
    let scale = 1.0 + theta.iter().zip(&op.generator_diag).map(|(t, d)| t * d.abs()).sum::<f64>();
    let mut value = objective(&phi);
    let mut last_grad = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let mut grad = vec![0.0; n];
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for &(r, c, w) in &op.generator_off {
            let t = theta[r] * w * (phi[c] - phi[r]).exp();
            grad[c] += t;
            grad[r] -= t;
            hess[(c, c)] += t;
            hess[(r, r)] += t;
            hess[(r, c)] -= t;
            hess[(c, r)] -= t;
        }
        let gnorm = grad[1..].iter().fold(0.0f64, |m, g| m.max(g.abs()));
        last_grad = gnorm;
        if gnorm <= cfg.tol * scale {
            return Ok((value, phi));
        }
        let reduced = hess.view((1, 1), (n - 1, n - 1)).into_owned();
        let rhs = DVector::from_iterator(n - 1, grad[1..].iter().map(|g| -g));
        let step = match reduced.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => reduced
                .lu()
                .solve(&rhs)
                .ok_or(Error::NonConvergence { what: "cost minimization (singular Hessian)", iterations: 0, residual: gnorm })?,
        };
        let slope: f64 = step.iter().zip(&grad[1..]).map(|(s, g)| s * g).sum();
        let mut t = 1.0;
        let mut moved = false;
        if -slope <= 1e-12 * (1.0 + value.abs()) {
            // the predicted decrease is below what the objective can resolve;
            // take the pure Newton step and judge it by the gradient
            let trial: Vec<f64> = std::iter::once(0.0).chain(phi[1..].iter().zip(step.iter()).map(|(p, s)| p + s)).collect();
            if trial != phi {
                value = objective(&trial);
                phi = trial;
                continue;
            }
        }
        for _ in 0..60 {
            let trial: Vec<f64> = std::iter::once(0.0)
                .chain(phi[1..].iter().zip(step.iter()).map(|(p, s)| p + t * s))
                .collect();
            let v = objective(&trial);
            if v <= value + 1e-4 * t * slope {
                moved = trial != phi;
                phi = trial;
                value = v;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            // roundoff floor: no representable decrease is left
            if gnorm <= cfg.tol.sqrt() * scale {
                return Ok((value, phi));
            }
            break;
        }
    }
    Err(Error::NonConvergence { what: "cost minimization", iterations: cfg.max_iter, residual: last_grad })
}

impl Hamiltonian for CrnHamiltonian {
    fn slow_dim(&self) -> usize {
        self.net.slow_dim()
    }

    fn value(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        let (_, eig) = self.principal(x, p)?;
        Ok(eig.value)
    }

    fn value_and_grad(&self, x: &[f64], p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (op, eig) = self.principal(x, p)?;
        let g = self.gradient(&op, &eig);
        Ok((eig.value, g))
    }
}
