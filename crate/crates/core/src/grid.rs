use crate::error::{domain, Error, Result};

pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x0: f64, h: f64, n: usize) -> Result<Self> {
        if !x0.is_finite() || !h.is_finite() || h <= 0.0 {
            return domain(format!("grid needs finite x0 and h > 0 (got x0={x0}, h={h})"));
        }
        if n < MIN_NODES {
            return domain(format!("grid needs at least {MIN_NODES} nodes (got {n})"));
        }
        Ok(Grid { x0, h, n })
    }

    /// Grid covering [left, right] with spacing h; the right end is rounded
    /// to the nearest whole number of cells.
    pub fn from_bounds(left: f64, right: f64, h: f64) -> Result<Self> {
        if !(right > left) {
            return domain(format!("grid bounds need left < right (got {left}, {right})"));
        }
        if !(h > 0.0) {
            return domain(format!("grid spacing must be positive (got {h})"));
        }
        let cells = ((right - left) / h).round();
        if cells > 5e7 {
            return domain(format!("grid too large ({cells} cells)"));
        }
        Grid::new(left, h, cells as usize + 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn right(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the node closest to x, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.x0) / self.h).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n - 1)
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
            && (self.h - other.h).abs() <= 1e-12 * self.h
            && (self.x0 - other.x0).abs() <= 1e-9 * self.h
    }

    /// Sub-grid of nodes lo..=hi.
    pub fn slice(&self, lo: usize, hi: usize) -> Result<Grid> {
        Grid::new(self.x(lo), self.h, hi + 1 - lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return domain(format!("field has {} values for {} nodes", values.len(), grid.n));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("non-finite value at node {i} (x = {})", grid.x(i)));
        }
        Ok(Field { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Field { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_diff(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        match self.values.iter().position(|&v| v < 0.0) {
            Some(i) => domain(format!("density negative at x = {}", self.grid.x(i))),
            None => Ok(()),
        }
    }

    pub(crate) fn require_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Domain("fields live on different grids".into()))
        }
    }

    /// Linear interpolation, constant extension outside the grid.
    pub fn interp_linear(&self, x: f64) -> f64 {
        let g = &self.grid;
        let s = (x - g.x0) / g.h;
        if s <= 0.0 {
            return self.values[0];
        }
        let i = s.floor() as usize;
        if i >= g.n - 1 {
            return self.values[g.n - 1];
        }
        let t = s - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}
