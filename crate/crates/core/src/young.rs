//! Young integration `∫ f dw` of operator-valued integrands against vector-valued
//! integrators, as left-point Riemann sums on the shared grid.
//!
//! When `f` is δ-Hölder and `w` is α-Hölder with `α + δ > 1`, the sewing bound
//!
//! ```text
//! ‖∫_s^t f dw − f_s (w_t − w_s)‖ ≤ C(α+δ) [f]_δ [w]_α (t − s)^{α+δ},
//! C(θ) = 1 / (1 − 2^{1−θ})
//! ```
//!
//! holds for the discrete sums with the discrete Hölder seminorms.

use crate::error::{Error, Result};
use crate::linalg::{dist, norm, OperatorValue};
use crate::paths::{holder_sup, p_variation_by, GridWindow, SampledPath};

/// Operator values `ℝ^M → ℝ^N` sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPath {
    horizon: f64,
    rows: usize,
    cols: usize,
    values: Vec<OperatorValue>,
}

impl OperatorPath {
    pub fn new(horizon: f64, values: Vec<OperatorValue>) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::arg("operator path horizon must be positive"));
        }
        if values.len() < 2 {
            return Err(Error::arg("operator path needs at least two grid points"));
        }
        let (rows, cols) = (values[0].rows(), values[0].cols());
        if values.iter().any(|v| v.rows() != rows || v.cols() != cols) {
            return Err(Error::arg("operator path values must share one shape"));
        }
        Ok(Self {
            horizon,
            rows,
            cols,
            values,
        })
    }

    pub fn from_fn(
        horizon: f64,
        n: usize,
        mut f: impl FnMut(f64) -> OperatorValue,
    ) -> Result<Self> {
        let dt = horizon / n as f64;
        Self::new(horizon, (0..=n).map(|j| f(j as f64 * dt)).collect())
    }

    /// Views a path in `ℝ^N` as `N × 1` operators, for scalar integrators.
    pub fn from_column_path(path: &SampledPath) -> Self {
        let values = (0..=path.n_cells())
            .map(|j| OperatorValue::from_row_major(path.dim(), 1, path.value(j).to_vec()).unwrap())
            .collect();
        Self {
            horizon: path.horizon(),
            rows: path.dim(),
            cols: 1,
            values,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_cells() as f64
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn value(&self, j: usize) -> &OperatorValue {
        &self.values[j]
    }

    /// Discrete Hölder seminorm in the Hilbert–Schmidt norm.
    pub fn holder_norm(&self, alpha: f64, window: GridWindow) -> f64 {
        holder_sup(window, self.dt(), alpha, |j, k| {
            dist(self.values[j].as_slice(), self.values[k].as_slice())
        })
        .0
    }

    /// Discrete p-variation in the Hilbert–Schmidt norm.
    pub fn p_variation(&self, p: f64, window: GridWindow) -> f64 {
        p_variation_by(window, p, |j, k| {
            dist(self.values[j].as_slice(), self.values[k].as_slice())
        })
    }
}

fn check_pair(f: &OperatorPath, w: &SampledPath, window: GridWindow) -> Result<()> {
    if f.n_cells() != w.n_cells() || (f.horizon() - w.horizon()).abs() > 1e-12 * w.horizon() {
        return Err(Error::arg("integrand and integrator must share grid and horizon"));
    }
    if f.cols() != w.dim() {
        return Err(Error::arg(format!(
            "integrand maps R^{} but integrator lives in R^{}",
            f.cols(),
            w.dim()
        )));
    }
    w.check_window(window)
}

fn riemann_sum(f: &OperatorPath, w: &SampledPath, window: GridWindow, stride: usize) -> Vec<f64> {
    let mut acc = vec![0.0; f.rows()];
    let mut dw = vec![0.0; w.dim()];
    let mut j = window.start;
    while j < window.end {
        let next = j + stride;
        for ((d, a), b) in dw.iter_mut().zip(w.value(next)).zip(w.value(j)) {
            *d = a - b;
        }
        f.value(j).apply_add(&dw, &mut acc);
        j = next;
    }
    acc
}

/// Left-point Riemann sum `Σ_k f_{t_k} (w_{t_{k+1}} − w_{t_k})` over the cells of `window`.
pub fn young_integral(f: &OperatorPath, w: &SampledPath, window: GridWindow) -> Result<Vec<f64>> {
    check_pair(f, w, window)?;
    Ok(riemann_sum(f, w, window, 1))
}

/// The running integral `r ↦ ∫_{t_start}^r f dw` on the grid points of `window`.
pub fn young_integral_path(
    f: &OperatorPath,
    w: &SampledPath,
    window: GridWindow,
) -> Result<SampledPath> {
    check_pair(f, w, window)?;
    if window.cells() == 0 {
        return Err(Error::arg("running integral needs a non-empty window"));
    }
    let mut values = vec![0.0; (window.cells() + 1) * f.rows()];
    let mut acc = vec![0.0; f.rows()];
    let mut dw = vec![0.0; w.dim()];
    for (i, j) in (window.start..window.end).enumerate() {
        for ((d, a), b) in dw.iter_mut().zip(w.value(j + 1)).zip(w.value(j)) {
            *d = a - b;
        }
        f.value(j).apply_add(&dw, &mut acc);
        values[(i + 1) * f.rows()..(i + 2) * f.rows()].copy_from_slice(&acc);
    }
    SampledPath::new(window.cells() as f64 * w.dt(), f.rows(), values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct YoungEstimate {
    /// Riemann sum on the finest grid.
    pub value: Vec<f64>,
    /// `‖S_0 − S_1‖` between the finest grid and its first dyadic coarsening.
    pub error_estimate: f64,
    /// `‖S_l − S_{l+1}‖` for `l = 0 .. levels − 2`.
    pub level_differences: Vec<f64>,
}

/// Riemann sums on the grid and on `levels − 1` dyadic coarsenings of it.
pub fn young_integral_with_error(
    f: &OperatorPath,
    w: &SampledPath,
    window: GridWindow,
    levels: usize,
) -> Result<YoungEstimate> {
    check_pair(f, w, window)?;
    if levels < 2 {
        return Err(Error::arg("error estimation needs at least two levels"));
    }
    let coarsest = 1usize << (levels - 1);
    if window.cells() == 0 || !window.cells().is_multiple_of(coarsest) {
        return Err(Error::arg(format!(
            "window of {} cells is not divisible into {coarsest} dyadic blocks",
            window.cells()
        )));
    }
    let sums: Vec<Vec<f64>> = (0..levels)
        .map(|l| riemann_sum(f, w, window, 1 << l))
        .collect();
    let level_differences: Vec<f64> = sums.windows(2).map(|p| dist(&p[0], &p[1])).collect();
    Ok(YoungEstimate {
        error_estimate: level_differences[0],
        value: sums.into_iter().next().unwrap_or_default(),
        level_differences,
    })
}

/// Sewing constant `1 / (1 − 2^{1−θ})` for `θ > 1`.
pub fn sewing_constant(theta: f64) -> Result<f64> {
    if !(theta > 1.0) {
        return Err(Error::domain(format!(
            "Young integration needs exponent sum > 1, got {theta}"
        )));
    }
    Ok(1.0 / (1.0 - 2f64.powf(1.0 - theta)))
}

/// Bound on `‖∫_s^t f dw − f_s (w_t − w_s)‖` from the Hölder seminorms of `f` (exponent δ)
/// and `w` (exponent α).
pub fn young_loeve_bound(
    f_holder: f64,
    delta: f64,
    w_holder: f64,
    alpha: f64,
    s: f64,
    t: f64,
) -> Result<f64> {
    let c = sewing_constant(alpha + delta)?;
    Ok(c * f_holder * w_holder * (t - s).abs().powf(alpha + delta))
}

/// `‖∫_s^t f dw − f_s (w_t − w_s)‖` on the grid, the quantity bounded by [`young_loeve_bound`].
pub fn young_remainder(f: &OperatorPath, w: &SampledPath, window: GridWindow) -> Result<f64> {
    let integral = young_integral(f, w, window)?;
    let mut dw = vec![0.0; w.dim()];
    for ((d, a), b) in dw.iter_mut().zip(w.value(window.end)).zip(w.value(window.start)) {
        *d = a - b;
    }
    let germ = f.value(window.start).apply(&dw);
    Ok(norm(&crate::linalg::sub(&integral, &germ)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_op(v: f64) -> OperatorValue {
        OperatorValue::from_row_major(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn constant_integrand_telescopes() {
        let w = crate::paths::fbm_generate(0.7, 64, 1.0, 2, 3).unwrap();
        let f0 = OperatorValue::from_row_major(3, 2, vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.0]).unwrap();
        let f = OperatorPath::from_fn(1.0, 64, |_| f0.clone()).unwrap();
        let win = GridWindow::new(5, 40);
        let got = young_integral(&f, &w, win).unwrap();
        let dw = crate::linalg::sub(w.value(40), w.value(5));
        let want = f0.apply(&dw);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-13);
        }
        let est = young_integral_with_error(&f, &w, GridWindow::new(0, 64), 3).unwrap();
        assert!(est.error_estimate < 1e-14);
    }

    #[test]
    fn identity_integrand() {
        let n = 1000;
        let w = SampledPath::from_fn(1.0, n, 1, |t| vec![t]).unwrap();
        let f = OperatorPath::from_fn(1.0, n, scalar_op).unwrap();
        let v = young_integral(&f, &w, w.full_window()).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn rejects_mismatched_grids() {
        let w = SampledPath::from_fn(1.0, 10, 1, |t| vec![t]).unwrap();
        let f = OperatorPath::from_fn(1.0, 12, scalar_op).unwrap();
        assert!(young_integral(&f, &w, w.full_window()).is_err());
        let f = OperatorPath::from_fn(1.0, 10, scalar_op).unwrap();
        assert!(young_integral_with_error(&f, &w, w.full_window(), 3).is_err());
        assert!(young_integral_with_error(&f, &w, w.full_window(), 1).is_err());
    }

    #[test]
    fn smooth_error_estimate_shrinks_linearly() {
        let n = 1 << 12;
        let w = SampledPath::from_fn(1.0, n, 1, |t| vec![t.exp()]).unwrap();
        let f = OperatorPath::from_fn(1.0, n, |t| scalar_op(t.sin())).unwrap();
        let est = young_integral_with_error(&f, &w, w.full_window(), 6).unwrap();
        for pair in est.level_differences.windows(2) {
            assert!(pair[1] / pair[0] >= 1.8, "{:?}", est.level_differences);
        }
    }

    #[test]
    fn loeve_bound_examples() {
        assert_eq!(young_loeve_bound(0.0, 0.75, 2.0, 0.75, 0.0, 1.0).unwrap(), 0.0);
        let b = young_loeve_bound(1.0, 0.75, 1.0, 0.75, 0.0, 1.0).unwrap();
        assert!((b - 1.0 / (1.0 - 2f64.powf(-0.5))).abs() < 1e-12);
        assert!((b - 3.4142).abs() < 1e-4);
        let half = young_loeve_bound(1.0, 0.75, 1.0, 0.75, 0.0, 0.5).unwrap();
        assert!((half - 2f64.powf(-1.5) * b).abs() < 1e-12);
        assert!(young_loeve_bound(1.0, 0.5, 1.0, 0.5, 0.0, 1.0).is_err());
    }
}
