use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::hamiltonian::Hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityConfig {
    /// Random momentum pairs per state.
    pub triples: usize,
    pub p_radius: f64,
    pub seed: u64,
    pub zero_tol: f64,
    pub convexity_tol: f64,
}

impl Default for ConvexityConfig {
    fn default() -> Self {
        Self { triples: 200, p_radius: 2.0, seed: 0, zero_tol: 1e-10, convexity_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub worst_zero: f64,
    pub worst_zero_at: Vec<f64>,
    /// Largest `H((p+q)/2) - (H(p) + H(q))/2`, positive when convexity fails.
    pub worst_convexity: f64,
    pub worst_convexity_at: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    pub zero_pass: bool,
    pub convexity_pass: bool,
    pub pass: bool,
}

pub fn check_convexity_and_zero<H: Hamiltonian + ?Sized>(h: &H, xs: &[Vec<f64>], cfg: &ConvexityConfig) -> Result<ConvexityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let l = h.slow_dim();
    let mut worst_zero = 0.0f64;
    let mut worst_zero_at = Vec::new();
    let mut worst_convexity = f64::NEG_INFINITY;
    let mut worst_convexity_at = None;
    for x in xs {
        let z = h.value(x, &vec![0.0; l])?.abs();
        if z > worst_zero || worst_zero_at.is_empty() {
            worst_zero = worst_zero.max(z);
            worst_zero_at = x.clone();
        }
        for _ in 0..cfg.triples {
            let p: Vec<f64> = (0..l).map(|_| rng.random_range(-cfg.p_radius..=cfg.p_radius)).collect();
            let q: Vec<f64> = (0..l).map(|_| rng.random_range(-cfg.p_radius..=cfg.p_radius)).collect();
            let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
            let gap = h.value(x, &mid)? - 0.5 * (h.value(x, &p)? + h.value(x, &q)?);
            if gap > worst_convexity {
                worst_convexity = gap;
                worst_convexity_at = Some((x.clone(), p, q));
            }
        }
    }
    let zero_pass = worst_zero <= cfg.zero_tol;
    let convexity_pass = !(worst_convexity > cfg.convexity_tol);
    Ok(ConvexityReport {
        worst_zero,
        worst_zero_at,
        worst_convexity,
        worst_convexity_at,
        zero_pass,
        convexity_pass,
        pass: zero_pass && convexity_pass,
    })
}
