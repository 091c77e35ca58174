//! Legendre dual `L(x, v) = sup_p [<p, v> - H(x, p)]`, path actions and
//! reachable-velocity boxes.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendreConfig {
    /// Momenta are restricted to the box `|p_i| <= p_radius`.
    pub p_radius: f64,
    /// Tolerance on the projected gradient `v - grad_p H`.
    pub tol: f64,
    pub max_iter: usize,
    /// Points per axis of the seeding scan.
    pub seed_points: usize,
    /// A boundary-active maximizer whose outward slope exceeds this is
    /// reported as unbounded (`L = +inf` as far as the box can tell).
    pub slope_tol: f64,
}

impl Default for LegendreConfig {
    fn default() -> Self {
        Self { p_radius: 10.0, tol: 1e-8, max_iter: 5000, seed_points: 5, slope_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendreResult {
    pub value: f64,
    pub argmax_p: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The maximizer sits on the momentum box; the true value may be larger.
    pub radius_limited: bool,
    /// Radius-limited and still increasing outward faster than `slope_tol`.
    pub unbounded: bool,
}

impl LegendreResult {
    pub fn flags(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if self.radius_limited {
            f.push("radius-limited");
        }
        if self.unbounded {
            f.push("unbounded");
        }
        if !self.converged {
            f.push("not-converged");
        }
        f
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(psi, grad psi)` with `psi(p) = <p, v> - H(x, p)`; `None` when `H`
/// cannot be evaluated (exponent overflow far out in the box).
fn objective<H: Hamiltonian + ?Sized>(h: &H, x: &[f64], v: &[f64], p: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
    match h.value_and_grad(x, p) {
        Ok((hv, g)) => Ok(Some((dot(p, v) - hv, v.iter().zip(&g).map(|(vi, gi)| vi - gi).collect()))),
        Err(Error::Overflow(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Seed points: a tensor scan for `l <= 3`, otherwise the coordinate axes.
fn seeds(l: usize, radius: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let k = per_axis.max(2);
    let ticks: Vec<f64> = (0..k).map(|i| -radius + 2.0 * radius * i as f64 / (k - 1) as f64).collect();
    let mut out = vec![vec![0.0; l]];
    if l <= 3 {
        let total = k.pow(l as u32);
        for code in 0..total {
            let mut c = code;
            let mut p = vec![0.0; l];
            for slot in p.iter_mut() {
                *slot = ticks[c % k];
                c /= k;
            }
            out.push(p);
        }
    } else {
        for i in 0..l {
            for &t in &ticks {
                let mut p = vec![0.0; l];
                p[i] = t;
                out.push(p);
            }
        }
    }
    out
}

/// Maximizes the concave map `p -> <p, v> - H(x, p)` over the momentum box
/// by projected gradient ascent (Barzilai-Borwein steps with Armijo
/// backtracking), seeded by a coarse scan.
pub fn legendre<H: Hamiltonian + ?Sized>(h: &H, x: &[f64], v: &[f64], cfg: &LegendreConfig) -> Result<LegendreResult> {
    let l = h.slow_dim();
    if v.len() != l || x.len() != l {
        return Err(Error::InvalidArgument(format!("x and v must have length {l}")));
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument("velocity must be finite".into()));
    }
    let r = cfg.p_radius.max(0.0);
    let clip = |p: &mut Vec<f64>| p.iter_mut().for_each(|a| *a = a.clamp(-r, r));

    let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    for s in seeds(l, r, cfg.seed_points) {
        if let Some((f, g)) = objective(h, x, v, &s)? {
            if best.as_ref().is_none_or(|b| f > b.1) {
                best = Some((s, f, g));
            }
        }
    }
    let (mut p, mut f, mut g) = best.ok_or_else(|| Error::InvalidArgument("H could not be evaluated on the momentum box".into()))?;

    // components of the gradient that point out of the box at active bounds
    let projected = |p: &[f64], g: &[f64]| -> (f64, f64) {
        let mut inner = 0.0f64;
        let mut outward = 0.0f64;
        for (&pi, &gi) in p.iter().zip(g) {
            let at_hi = pi >= r && gi > 0.0;
            let at_lo = pi <= -r && gi < 0.0;
            if at_hi || at_lo {
                outward = outward.max(gi.abs());
            } else {
                inner = inner.max(gi.abs());
            }
        }
        (inner, outward)
    };

    let mut step = 1.0 / (1.0 + g.iter().fold(0.0f64, |m, a| m.max(a.abs())));
    let mut flat = 0;
    for it in 0..cfg.max_iter {
        let (inner, outward) = projected(&p, &g);
        if inner <= cfg.tol {
            let radius_limited = outward > 0.0;
            return Ok(LegendreResult {
                value: f,
                argmax_p: p,
                iterations: it,
                converged: true,
                radius_limited,
                unbounded: radius_limited && outward > cfg.slope_tol,
            });
        }
        let mut t = step;
        let mut accepted = None;
        let gmax = g.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let pmax = p.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        // stop backtracking once the step is below roundoff in p; a kink of
        // a nonsmooth H ends here
        while t * gmax > 1e-14 * (1.0 + pmax) {
            let mut trial: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi + t * gi).collect();
            clip(&mut trial);
            let d: Vec<f64> = trial.iter().zip(&p).map(|(a, b)| a - b).collect();
            if let Some((ft, gt)) = objective(h, x, v, &trial)? {
                if ft >= f + 1e-4 * dot(&g, &d) {
                    accepted = Some((trial, ft, gt, d));
                    break;
                }
            }
            t *= 0.5;
        }
        // accepted steps that no longer raise the value: the gradient is at
        // its noise floor
        flat = match &accepted {
            Some((_, ft, _, _)) if *ft <= f => flat + 1,
            _ => 0,
        };
        let accepted = accepted.filter(|_| flat < 20);
        let Some((trial, ft, gt, d)) = accepted else {
            // no ascent left at roundoff level
            let (inner, outward) = projected(&p, &g);
            let radius_limited = outward > 0.0;
            return Ok(LegendreResult {
                value: f,
                argmax_p: p,
                iterations: it,
                converged: inner <= cfg.tol.sqrt(),
                radius_limited,
                unbounded: radius_limited && outward > cfg.slope_tol,
            });
        };
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&d, &y);
        let ss = dot(&d, &d);
        // concave objective: s.y < 0 along a true ascent step
        step = if sy < 0.0 && ss > 0.0 { ss / -sy } else { (2.0 * t).min(1e6) };
        p = trial;
        f = ft;
        g = gt;
    }
    Err(Error::NonConvergence { what: "Legendre transform", iterations: cfg.max_iter, residual: projected(&p, &g).0 })
}

/// Piecewise-linear path `t_0 = 0 < ... < t_K` through slow states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl PathSample {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != points.len() || times.len() < 2 {
            return Err(Error::InvalidArgument("a path needs matching times and points, at least two".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("path times must be strictly increasing".into()));
        }
        let l = points[0].len();
        if l == 0 || points.iter().any(|q| q.len() != l) {
            return Err(Error::InvalidArgument("path points must share a positive dimension".into()));
        }
        if points.iter().flatten().any(|&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidArgument("path points must lie in [0, inf)^l".into()));
        }
        Ok(Self { times, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(&self, other: &PathSample) -> Result<PathSample> {
        let (t_end, x_end) = (*self.times.last().unwrap(), self.points.last().unwrap());
        if other.times[0] != t_end || &other.points[0] != x_end {
            return Err(Error::InvalidArgument("paths do not join".into()));
        }
        let mut times = self.times.clone();
        let mut points = self.points.clone();
        times.extend_from_slice(&other.times[1..]);
        points.extend_from_slice(&other.points[1..]);
        PathSample::new(times, points)
    }

    /// Reads the CSV layout `t,x_1,..,x_l`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("t") || headers.len() < 2 {
            return Err(Error::Schema("path CSV header must be t,x_1,..,x_l".into()));
        }
        let mut times = Vec::new();
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Schema(format!("path CSV: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            times.push(vals[0]);
            points.push(vals[1..].to_vec());
        }
        Self::new(times, points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim()).map(|i| format!("x_{i}")));
        w.write_record(&header)?;
        for (t, q) in self.times.iter().zip(&self.points) {
            let mut row = vec![t.to_string()];
            row.extend(q.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionResult {
    /// `+inf` when a segment velocity is out of reach.
    pub value: f64,
    pub flags: Vec<String>,
    pub segments: Vec<f64>,
}

/// Midpoint-rule action `sum_k dt_k L(midpoint, (x_{k+1} - x_k) / dt_k)`.
/// Segments are evaluated in parallel and summed in index order.
pub fn path_action<H: Hamiltonian + ?Sized>(h: &H, path: &PathSample, cfg: &LegendreConfig) -> Result<ActionResult> {
    if path.dim() != h.slow_dim() {
        return Err(Error::InvalidArgument("path dimension does not match the Hamiltonian".into()));
    }
    let segs: Vec<Result<(f64, LegendreResult)>> = (0..path.times.len() - 1)
        .into_par_iter()
        .map(|k| {
            let dt = path.times[k + 1] - path.times[k];
            let (a, b) = (&path.points[k], &path.points[k + 1]);
            let mid: Vec<f64> = a.iter().zip(b).map(|(u, w)| 0.5 * (u + w)).collect();
            let vel: Vec<f64> = a.iter().zip(b).map(|(u, w)| (w - u) / dt).collect();
            Ok((dt, legendre(h, &mid, &vel, cfg)?))
        })
        .collect();
    let mut value = 0.0;
    let mut flags = Vec::new();
    let mut segments = Vec::with_capacity(segs.len());
    for (k, s) in segs.into_iter().enumerate() {
        let (dt, lr) = s?;
        if lr.unbounded {
            flags.push(format!("segment {k}: unbounded"));
            value = f64::INFINITY;
        } else if lr.radius_limited {
            flags.push(format!("segment {k}: radius-limited"));
        }
        if !lr.converged {
            flags.push(format!("segment {k}: not-converged"));
        }
        segments.push(dt * lr.value);
        value += dt * lr.value;
    }
    Ok(ActionResult { value, flags, segments })
}

/// Componentwise box of velocities `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl VelocityBox {
    pub fn contains(&self, v: &[f64]) -> bool {
        v.iter().zip(self.lower.iter().zip(&self.upper)).all(|(a, (lo, hi))| *lo <= *a && *a <= *hi)
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Low-discrepancy sample of the momentum box: centre, the `2^l` corners
/// (for `l <= 8`) and `n` Halton points.
pub fn momentum_sample(radius: &[f64], n: usize) -> Vec<Vec<f64>> {
    let l = radius.len();
    let mut out = vec![vec![0.0; l]];
    if l <= 8 {
        for mask in 0..(1u32 << l) {
            out.push((0..l).map(|i| if mask & (1 << i) != 0 { radius[i] } else { -radius[i] }).collect());
        }
    }
    for k in 1..=n as u64 {
        out.push(
            (0..l)
                .map(|i| {
                    let u = radical_inverse(k, PRIMES[i % PRIMES.len()]);
                    (2.0 * u - 1.0) * radius[i]
                })
                .collect(),
        );
    }
    out
}

pub const VELOCITY_SAMPLES: usize = 64;

/// Componentwise range of `grad_p H(x, p)` over the momentum box, widened
/// by 10%. Widening never moves a bound across zero, so a velocity box that
/// is one-signed on a boundary face stays one-signed.
pub fn velocity_bounds<H: Hamiltonian + ?Sized>(h: &H, x: &[f64], p_radius: f64) -> Result<VelocityBox> {
    let l = h.slow_dim();
    let mut lower = vec![f64::INFINITY; l];
    let mut upper = vec![f64::NEG_INFINITY; l];
    for p in momentum_sample(&vec![p_radius.max(0.0); l], VELOCITY_SAMPLES) {
        let g = match h.value_and_grad(x, &p) {
            Ok((_, g)) => g,
            Err(Error::Overflow(_)) => continue,
            Err(e) => return Err(e),
        };
        for i in 0..l {
            lower[i] = lower[i].min(g[i]);
            upper[i] = upper[i].max(g[i]);
        }
    }
    for i in 0..l {
        let pad = 0.05 * (upper[i] - lower[i]);
        let lo = lower[i] - pad;
        let hi = upper[i] + pad;
        lower[i] = if lower[i] >= 0.0 { lo.max(0.0) } else { lo };
        upper[i] = if upper[i] <= 0.0 { hi.min(0.0) } else { hi };
    }
    Ok(VelocityBox { lower, upper })
}
