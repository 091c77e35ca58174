use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform tensor grid on the truncated orthant `[0, upper_1] x ... x [0, upper_l]`.
/// Nodes are numbered row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    cells: Vec<usize>,
}

impl Grid {
    pub fn new(upper: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        if upper.is_empty() || upper.len() != cells.len() {
            return Err(Error::InvalidArgument("grid needs one upper bound and one cell count per axis".into()));
        }
        if upper.iter().any(|&u| !(u > 0.0) || !u.is_finite()) {
            return Err(Error::InvalidArgument("grid upper bounds must be positive and finite".into()));
        }
        if cells.iter().any(|&n| n < 3) {
            return Err(Error::InvalidArgument("a grid needs at least 3 cells per axis".into()));
        }
        Ok(Self { lower: vec![0.0; upper.len()], upper, cells })
    }

    /// Same bound and cell count on every axis.
    pub fn uniform(dim: usize, upper: f64, cells: usize) -> Result<Self> {
        Self::new(vec![upper; dim], vec![cells; dim])
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.cells[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim()).map(|i| self.spacing(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(|n| n + 1).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distance in the flat index between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.cells[axis + 1..].iter().map(|n| n + 1).product()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let n = self.cells[axis] + 1;
            out[axis] = idx % n;
            idx /= n;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.cells).fold(0, |acc, (&i, &n)| acc * (n + 1) + i)
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if i == self.cells[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.spacing(axis)
        }
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx).iter().enumerate().map(|(a, &i)| self.coordinate(a, i)).collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.multi_index(idx).iter().zip(&self.cells).any(|(&i, &n)| i == 0 || i == n)
    }

    /// Projection onto the grid box.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(a, &v)| v.clamp(self.lower[a], self.upper[a])).collect()
    }

    /// Multilinear interpolation stencil `(node, weight)` at `x` (projected
    /// onto the box first). Weights are nonnegative; zero weights are dropped.
    pub fn stencil(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let l = self.dim();
        let mut base = vec![0usize; l];
        let mut frac = vec![0.0; l];
        for a in 0..l {
            let q = x[a].clamp(self.lower[a], self.upper[a]);
            let s = (q - self.lower[a]) / self.spacing(a);
            let i0 = (s.floor() as usize).min(self.cells[a] - 1);
            base[a] = i0;
            frac[a] = (s - i0 as f64).clamp(0.0, 1.0);
        }
        let mut out = Vec::with_capacity(1 << l);
        for corner in 0..(1usize << l) {
            let mut w = 1.0;
            let mut idx = 0;
            for a in 0..l {
                let up = corner >> (l - 1 - a) & 1 == 1;
                w *= if up { frac[a] } else { 1.0 - frac[a] };
                idx = idx * (self.cells[a] + 1) + base[a] + up as usize;
            }
            if w > 0.0 {
                out.push((idx, w));
            }
        }
        out
    }
}

/// Values on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = grid.nodes().map(|x| f(&x)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.len()])
    }

    pub fn interpolate(&self, x: &[f64]) -> f64 {
        self.grid.stencil(x).iter().map(|&(i, w)| w * self.values[i]).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sup-norm of `self - other`.
    pub fn distance(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("grid functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.grid.dim()).map(|i| format!("x_{i}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.grid.node(i).iter().map(|c| c.to_string()).collect();
            row.push(v.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `x_1,..,x_l,value` rows in node order; the grid is recovered
    /// from the distinct coordinates.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let l = headers.len().saturating_sub(1);
        if l == 0 || headers.get(l) != Some("value") || (0..l).any(|i| headers.get(i) != Some(format!("x_{}", i + 1).as_str())) {
            return Err(Error::Schema("grid CSV header must be x_1,..,x_l,value".into()));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Schema(format!("grid CSV: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(vals);
        }
        let mut upper = Vec::with_capacity(l);
        let mut cells = Vec::with_capacity(l);
        for a in 0..l {
            let distinct: BTreeSet<u64> = rows.iter().map(|r| r[a].to_bits()).collect();
            let max = rows.iter().map(|r| r[a]).fold(f64::NEG_INFINITY, f64::max);
            upper.push(max);
            cells.push(distinct.len().saturating_sub(1));
        }
        let grid = Grid::new(upper, cells)?;
        if rows.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} rows for {} nodes", rows.len(), grid.len())));
        }
        for (i, r) in rows.iter().enumerate() {
            let node = grid.node(i);
            if node.iter().zip(r).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs())) {
                return Err(Error::GridMismatch(format!("row {i} is not node {node:?} of a uniform grid")));
            }
        }
        Self::new(grid, rows.into_iter().map(|r| r[l]).collect())
    }
}
