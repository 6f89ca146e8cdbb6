//! Vector-valued paths on uniform time grids, fractional Brownian motion, and the
//! discrete path norms (Hölder, p-variation).
//!
//! Discrete norms are suprema over grid points only and therefore lower bounds
//! of their continuum counterparts.

mod csv;
mod fbm;
mod norms;

pub use self::csv::{read_path_csv, write_path_csv};
pub use self::fbm::{fbm_covariance, fbm_generate};
pub use self::norms::{holder_norm, p_variation, HolderProfile};
pub(crate) use self::csv::fmt_f64 as csv_fmt;
pub(crate) use self::norms::{holder_sup, p_variation_by};

use crate::error::{Error, Result};

/// Half-open range of grid indices `start..=end` describing the window `[t_start, t_end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridWindow {
    pub start: usize,
    pub end: usize,
}

impl GridWindow {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn cells(&self) -> usize {
        self.end.saturating_sub(self.start)
    }
}

/// `n + 1` samples of a path in `ℝ^d` at times `t_j = j T / n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    horizon: f64,
    dim: usize,
    values: Vec<f64>,
}

impl SampledPath {
    /// `values` is row-major: `n + 1` rows of `dim` coordinates.
    pub fn new(horizon: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::arg(format!("path horizon must be positive, got {horizon}")));
        }
        if dim == 0 {
            return Err(Error::arg("path dimension must be at least 1"));
        }
        if !values.len().is_multiple_of(dim) || values.len() / dim < 2 {
            return Err(Error::arg(format!(
                "path needs at least two grid points of dimension {dim}, got {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("path values must be finite"));
        }
        Ok(Self {
            horizon,
            dim,
            values,
        })
    }

    pub fn from_rows(horizon: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::arg("all path rows must share one dimension"));
        }
        Self::new(horizon, dim, rows.concat())
    }

    /// Samples `f` at the `n + 1` grid times of `[0, horizon]`.
    pub fn from_fn(horizon: f64, n: usize, dim: usize, mut f: impl FnMut(f64) -> Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("grid needs at least one cell"));
        }
        let dt = horizon / n as f64;
        let mut values = Vec::with_capacity((n + 1) * dim);
        for j in 0..=n {
            let v = f(j as f64 * dt);
            if v.len() != dim {
                return Err(Error::arg("sampling function returned the wrong dimension"));
            }
            values.extend(v);
        }
        Self::new(horizon, dim, values)
    }

    pub fn zeros(horizon: f64, n: usize, dim: usize) -> Result<Self> {
        Self::new(horizon, dim, vec![0.0; (n + 1) * dim])
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid cells `n`.
    pub fn n_cells(&self) -> usize {
        self.values.len() / self.dim - 1
    }

    pub fn n_points(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_cells() as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.n_cells() {
            self.horizon
        } else {
            j as f64 * self.dt()
        }
    }

    pub fn value(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> &[f64] {
        self.value(self.n_cells())
    }

    pub fn full_window(&self) -> GridWindow {
        GridWindow::new(0, self.n_cells())
    }

    /// Grid index of time `t`; fails unless `t` lies on the grid.
    pub fn grid_index(&self, t: f64) -> Result<usize> {
        let dt = self.dt();
        let x = t / dt;
        let j = x.round();
        if !(t >= -1e-12 * dt) || (x - j).abs() > 1e-7 || j as usize > self.n_cells() {
            return Err(Error::arg(format!("time {t} is not a grid point of this path")));
        }
        Ok(j as usize)
    }

    /// Window `[s, t]` as grid indices.
    pub fn window(&self, s: f64, t: f64) -> Result<GridWindow> {
        let w = GridWindow::new(self.grid_index(s)?, self.grid_index(t)?);
        if w.start > w.end {
            return Err(Error::arg(format!("window [{s}, {t}] is reversed")));
        }
        Ok(w)
    }

    pub(crate) fn check_window(&self, w: GridWindow) -> Result<()> {
        if w.end > self.n_cells() || w.start > w.end {
            return Err(Error::arg(format!(
                "window {}..={} outside grid of {} cells",
                w.start,
                w.end,
                self.n_cells()
            )));
        }
        Ok(())
    }

    /// The path on `window`, re-based to start at time zero.
    pub fn restrict(&self, window: GridWindow) -> Result<SampledPath> {
        self.check_window(window)?;
        if window.cells() == 0 {
            return Err(Error::arg("cannot restrict to an empty window"));
        }
        let dt = self.dt();
        Ok(SampledPath {
            horizon: window.cells() as f64 * dt,
            dim: self.dim,
            values: self.values[window.start * self.dim..(window.end + 1) * self.dim].to_vec(),
        })
    }

    /// Every `stride`-th grid point; `stride` must divide the cell count.
    pub fn subsample(&self, stride: usize) -> Result<SampledPath> {
        if stride == 0 || !self.n_cells().is_multiple_of(stride) {
            return Err(Error::arg(format!(
                "stride {stride} does not divide {} cells",
                self.n_cells()
            )));
        }
        let mut values = Vec::with_capacity((self.n_cells() / stride + 1) * self.dim);
        for j in (0..=self.n_cells()).step_by(stride) {
            values.extend_from_slice(self.value(j));
        }
        Ok(SampledPath {
            horizon: self.horizon,
            dim: self.dim,
            values,
        })
    }

    pub fn scaled(&self, c: f64) -> SampledPath {
        SampledPath {
            horizon: self.horizon,
            dim: self.dim,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    fn check_same_grid(&self, other: &SampledPath) -> Result<()> {
        if self.dim != other.dim
            || self.n_cells() != other.n_cells()
            || (self.horizon - other.horizon).abs() > 1e-12 * self.horizon
        {
            return Err(Error::arg("paths do not share grid and dimension"));
        }
        Ok(())
    }

    pub fn sub(&self, other: &SampledPath) -> Result<SampledPath> {
        self.check_same_grid(other)?;
        Ok(SampledPath {
            horizon: self.horizon,
            dim: self.dim,
            values: crate::linalg::sub(&self.values, &other.values),
        })
    }

    pub fn add(&self, other: &SampledPath) -> Result<SampledPath> {
        self.check_same_grid(other)?;
        Ok(SampledPath {
            horizon: self.horizon,
            dim: self.dim,
            values: crate::linalg::add(&self.values, &other.values),
        })
    }

    /// Appends `other` (which must start where `self` ends) on the same step size.
    pub fn concat(&self, other: &SampledPath) -> Result<SampledPath> {
        if self.dim != other.dim || (self.dt() - other.dt()).abs() > 1e-12 * self.dt() {
            return Err(Error::arg("concatenated paths must share dimension and step"));
        }
        if self.last() != other.value(0) {
            return Err(Error::arg("concatenated paths must meet at the joint"));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values[self.dim..]);
        let n = self.n_cells() + other.n_cells();
        Ok(SampledPath {
            horizon: n as f64 * self.dt(),
            dim: self.dim,
            values,
        })
    }
}
