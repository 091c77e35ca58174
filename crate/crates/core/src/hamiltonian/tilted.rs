use crate::error::{Error, Result};
use crate::model::{FastStateSpace, MultiScaleNetwork, ReactionClass};

/// Largest admissible `|<p, gamma_x>|` before `exp` leaves the f64 range.
pub const MAX_EXPONENT: f64 = 700.0;

/// One exponentially tilted rate `r(x, y, gamma) e^{<p, gamma_x>}` attached
/// to matrix entry `(row, col)`. For slow-only reactions `col == row`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltTerm {
    pub row: usize,
    pub col: usize,
    pub weight: f64,
    pub reaction: usize,
}

/// `diag(V) + L` over the fast state space at a fixed `(x, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedOperator {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `V(y; x, p)`
    pub potential: Vec<f64>,
    /// Diagonal of the tilted fast generator (minus the total exit rate).
    pub generator_diag: Vec<f64>,
    /// Off-diagonal generator entries `(row, col, rate)`, aggregated and
    /// sorted by `(row, col)`; all rates are positive.
    pub generator_off: Vec<(usize, usize, f64)>,
    pub(crate) terms: Vec<TiltTerm>,
}

impl TiltedOperator {
    pub fn assemble(net: &MultiScaleNetwork, fss: &FastStateSpace, x: &[f64], p: &[f64]) -> Result<Self> {
        let l = net.slow_dim();
        if x.len() != l || p.len() != l {
            return Err(Error::InvalidArgument(format!("x and p must have length {l}")));
        }
        if x.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("slow state must lie in [0, inf)^l, got {x:?}")));
        }
        let n = fss.len();
        let mut potential = vec![0.0; n];
        let mut generator_diag = vec![0.0; n];
        let mut off = Vec::new();
        let mut terms = Vec::new();

        let tilts = net
            .reactions()
            .iter()
            .map(|r| {
                let e = r.slow_dot(p);
                if e.abs() > MAX_EXPONENT {
                    Err(Error::Overflow(e.abs()))
                } else {
                    Ok(e.exp())
                }
            })
            .collect::<Result<Vec<f64>>>()?;

        for row in 0..n {
            let y = fss.state(row);
            for (idx, r) in net.reactions().iter().enumerate() {
                let col = match r.class() {
                    ReactionClass::SlowOnly => row,
                    _ => match fss.shifted(row, &r.gamma_y) {
                        Some(c) => c,
                        // the jump would leave the fast state space; it cannot fire
                        None => continue,
                    },
                };
                let rate = r.rate.eval(x, y);
                if rate == 0.0 {
                    continue;
                }
                match r.class() {
                    ReactionClass::SlowOnly => {
                        potential[row] += rate * (tilts[idx] - 1.0);
                        terms.push(TiltTerm { row, col, weight: rate * tilts[idx], reaction: idx });
                    }
                    ReactionClass::Coupled => {
                        potential[row] += rate * (tilts[idx] - 1.0);
                        let w = rate * tilts[idx];
                        off.push((row, col, w));
                        generator_diag[row] -= w;
                        terms.push(TiltTerm { row, col, weight: w, reaction: idx });
                    }
                    ReactionClass::FastOnly => {
                        off.push((row, col, rate));
                        generator_diag[row] -= rate;
                    }
                }
            }
        }
        off.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut generator_off: Vec<(usize, usize, f64)> = Vec::with_capacity(off.len());
        for (r, c, w) in off {
            match generator_off.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += w,
                _ => generator_off.push((r, c, w)),
            }
        }
        Ok(Self { x: x.to_vec(), p: p.to_vec(), potential, generator_diag, generator_off, terms })
    }

    pub fn dim(&self) -> usize {
        self.potential.len()
    }

    /// Diagonal of `diag(V) + L`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.potential.iter().zip(&self.generator_diag).map(|(v, d)| v + d).collect()
    }

    /// Dense `L` (row-major), for small state spaces and tests.
    pub fn generator_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = self.generator_diag[i];
        }
        for &(r, c, w) in &self.generator_off {
            m[r][c] += w;
        }
        m
    }

    /// Dense `diag(V) + L` (row-major).
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut m = self.generator_dense();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += self.potential[i];
        }
        m
    }

    /// `out = (diag(V) + L) v`
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim() {
            out[i] = (self.potential[i] + self.generator_diag[i]) * v[i];
        }
        for &(r, c, w) in &self.generator_off {
            out[r] += w * v[c];
        }
    }

    /// `out = (diag(V) + L)^T v`
    pub fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim() {
            out[i] = (self.potential[i] + self.generator_diag[i]) * v[i];
        }
        for &(r, c, w) in &self.generator_off {
            out[c] += w * v[r];
        }
    }

    /// First state not mutually reachable with state 0 in the positivity
    /// graph of `L`, if any.
    pub fn reducible_witness(&self) -> Option<usize> {
        let n = self.dim();
        if n <= 1 {
            return None;
        }
        let reach = |forward: bool| {
            let mut adj = vec![Vec::new(); n];
            for &(r, c, _) in &self.generator_off {
                if forward {
                    adj[r].push(c);
                } else {
                    adj[c].push(r);
                }
            }
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        };
        let fwd = reach(true);
        let bwd = reach(false);
        (0..n).find(|&i| !(fwd[i] && bwd[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_michaelis_menten;

    fn mm_op(x: [f64; 2], p: [f64; 2]) -> TiltedOperator {
        let net = builtin_michaelis_menten([1.0; 4], 1).unwrap();
        let fss = FastStateSpace::enumerate(2, 1).unwrap();
        TiltedOperator::assemble(&net, &fss, &x, &p).unwrap()
    }

    #[test]
    fn hand_assembled_michaelis_menten() {
        // states: 0 = (0,1), 1 = (1,0)
        let op = mm_op([1.0, 1.0], [2f64.ln(), 0.0]);
        let eps = 1e-15;
        assert!((op.potential[1] - 0.5).abs() < eps);
        assert!((op.potential[0] - 2.0).abs() < eps);
        let l = op.generator_dense();
        assert!((l[1][0] - 0.5).abs() < eps);
        assert!((l[0][1] - 3.0).abs() < eps);
        for row in &l {
            assert!(row.iter().sum::<f64>().abs() < eps);
        }
    }

    #[test]
    fn zero_momentum_is_untilted() {
        let op = mm_op([0.7, 2.0], [0.0, 0.0]);
        assert!(op.potential.iter().all(|&v| v == 0.0));
        let l = op.generator_dense();
        // binding 0.7 * 1 from (1,0); unbinding + product 2 from (0,1)
        assert_eq!(l[1][0], 0.7);
        assert_eq!(l[0][1], 2.0);
    }

    #[test]
    fn binding_vanishes_on_boundary() {
        let op = mm_op([0.0, 1.0], [0.4, -1.3]);
        let l = op.generator_dense();
        assert_eq!(l[1][0], 0.0);
        assert_eq!(l[1][1], 0.0);
        assert_eq!(op.reducible_witness(), Some(1));
        assert_eq!(mm_op([1.0, 1.0], [0.0, 0.0]).reducible_witness(), None);
    }

    #[test]
    fn overflow_guard() {
        let net = builtin_michaelis_menten([1.0; 4], 1).unwrap();
        let fss = FastStateSpace::enumerate(2, 1).unwrap();
        let err = TiltedOperator::assemble(&net, &fss, &[1.0, 1.0], &[701.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
        assert!(TiltedOperator::assemble(&net, &fss, &[-1.0, 1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn off_diagonals_nonnegative_rows_sum_to_zero() {
        let net = builtin_michaelis_menten([0.4, 1.3, 2.2, 0.9], 4).unwrap();
        let fss = FastStateSpace::enumerate(2, 4).unwrap();
        let op = TiltedOperator::assemble(&net, &fss, &[1.5, 0.2], &[-0.7, 1.1]).unwrap();
        let l = op.generator_dense();
        for (i, row) in l.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    assert!(v >= 0.0);
                }
            }
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }
}
