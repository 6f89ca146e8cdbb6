//! The solution space ℍ_T, the mild map
//!
//! ```text
//! (𝕃u)_t = P_t u₀ − ∫₀ᵗ A^τ P_{t−s} Q(u_s) ds + ∫₀ᵗ P_{t−s} F(u_s) dw_s
//! ```
//!
//! and its Picard iteration.
//!
//! `‖u‖_{ℍ_T} = sup_t ‖A^δ u_t‖ + [u]_{α-Höl}`, both parts taken on the grid.

mod horizon;
mod report;
mod solver;

use std::fmt;
use std::sync::Arc;

pub use self::horizon::{horizon_bounds, select_horizon, HorizonBounds, HorizonChoice};
pub use self::report::SolverReport;
pub use self::solver::{
    apply_l, continue_solution, lipschitz_probe, picard_solve, picard_solve_from, solve_with_halving,
    MildMap,
};

use crate::error::{Error, Result};
use crate::linalg::OperatorValue;
use crate::paths::{holder_sup, SampledPath};
use crate::spectral::{SpectralOperator, SpectralVector};

/// The (Kato-smoothed) nonlinearity `Q: X → X` with its Gateaux derivative.
pub trait Nonlinearity: Send + Sync {
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    /// `DQ(x) ξ`.
    fn derivative(&self, x: &[f64], xi: &[f64]) -> Vec<f64>;
    /// When true the solver skips the Bochner term entirely.
    fn is_zero(&self) -> bool {
        false
    }
}

/// The noise coefficient `F: X → L₂(ℝ^M, X)` with its Gateaux derivative.
pub trait NoiseCoefficient: Send + Sync {
    fn noise_dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> OperatorValue;
    /// `DF(x) y`, an `N × M` matrix.
    fn derivative(&self, x: &[f64], y: &[f64]) -> OperatorValue;
    /// `F(x) ξ`; override when it is cheaper than building the matrix.
    fn apply(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        self.eval(x).apply(xi)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroNonlinearity;

impl Nonlinearity for ZeroNonlinearity {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }

    fn derivative(&self, x: &[f64], _xi: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// `F ≡ F₀`.
#[derive(Clone, Debug)]
pub struct ConstantNoise(pub OperatorValue);

impl ConstantNoise {
    pub fn zero(dim: usize, noise_dim: usize) -> Self {
        Self(OperatorValue::zeros(dim, noise_dim))
    }
}

impl NoiseCoefficient for ConstantNoise {
    fn noise_dim(&self) -> usize {
        self.0.cols()
    }

    fn eval(&self, _x: &[f64]) -> OperatorValue {
        self.0.clone()
    }

    fn derivative(&self, _x: &[f64], _y: &[f64]) -> OperatorValue {
        OperatorValue::zeros(self.0.rows(), self.0.cols())
    }

    fn apply(&self, _x: &[f64], xi: &[f64]) -> Vec<f64> {
        self.0.apply(xi)
    }
}

/// `r ↦ coeff · r^power`, increasing for nonnegative coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthBound {
    pub coeff: f64,
    pub power: f64,
}

impl GrowthBound {
    pub const ZERO: GrowthBound = GrowthBound {
        coeff: 0.0,
        power: 1.0,
    };

    pub fn linear(coeff: f64) -> Self {
        Self { coeff, power: 1.0 }
    }

    pub fn quadratic(coeff: f64) -> Self {
        Self { coeff, power: 2.0 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.coeff == 0.0 {
            0.0
        } else {
            self.coeff * r.max(0.0).powf(self.power)
        }
    }
}

/// Declared constants for `F`, with `ε = ε_F`:
///
/// * `l1`: `‖A^ε [F(x) − F(y)]‖_HS ≤ l1 ‖x − y‖`
/// * `l2`: `‖A^{δ+ε} [F(x) − F(y)]‖_HS ≤ l2 ‖A^δ (x − y)‖`
/// * `b0`: `‖A^{δ+ε} F(0)‖_HS`
/// * `d1`: `sup_x ‖D A^ε F(x)‖`
/// * `d2`: Lipschitz constant of `x ↦ D A^ε F(x)`
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoiseConstants {
    pub l1: f64,
    pub l2: f64,
    pub b0: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConstants {
    /// Lipschitz growth of `Q` in `‖A^δ x‖ + ‖A^δ y‖`, also bounding `DQ`.
    pub k1: GrowthBound,
    /// `‖Q(x)‖ ≤ K₂(‖A^δ x‖)`.
    pub k2: GrowthBound,
    pub noise: NoiseConstants,
    /// Measured constant of `‖A^{−1/4} B(w, u)‖ ≤ C ‖A^{1/2} w‖ ‖A^{1/2} u‖`, for flow models.
    pub sobolevski: Option<f64>,
}

impl ModelConstants {
    pub fn zero() -> Self {
        Self {
            k1: GrowthBound::ZERO,
            k2: GrowthBound::ZERO,
            noise: NoiseConstants::default(),
            sobolevski: None,
        }
    }
}

/// Exponents `(τ, δ, α)`; `ε_F = max(α + δ, 2α)` is derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    pub tau: f64,
    pub delta: f64,
    pub alpha: f64,
}

impl Exponents {
    pub fn new(tau: f64, delta: f64, alpha: f64) -> Result<Self> {
        let e = Self { tau, delta, alpha };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        let Exponents { tau, delta, alpha } = *self;
        let mut bad = Vec::new();
        if !(0.0..1.0).contains(&tau) {
            bad.push(format!("tau = {tau} must lie in [0,1)"));
        }
        if !(0.0..1.0).contains(&delta) {
            bad.push(format!("delta = {delta} must lie in [0,1)"));
        }
        if !(alpha > 0.5 && alpha <= 1.0) {
            bad.push(format!("alpha = {alpha} must lie in (1/2, 1]"));
        }
        if !(delta + tau < 1.0) {
            bad.push("delta + tau < 1 fails".into());
        }
        if !(alpha + tau < 1.0) {
            bad.push("alpha + tau < 1 fails".into());
        }
        if !(alpha + delta > 1.0) {
            bad.push("alpha + delta > 1 fails".into());
        }
        if !(delta <= alpha) {
            bad.push("delta <= alpha fails".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::config(bad.join("; ")))
        }
    }

    pub fn eps_f(&self) -> f64 {
        (self.alpha + self.delta).max(2.0 * self.alpha)
    }
}

/// One evolution problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub op: SpectralOperator,
    pub exponents: Exponents,
    pub q: Arc<dyn Nonlinearity>,
    pub f: Arc<dyn NoiseCoefficient>,
    pub constants: ModelConstants,
    pub u0: SpectralVector,
    pub w: SampledPath,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dim", &self.op.dim())
            .field("noise_dim", &self.w.dim())
            .field("exponents", &self.exponents)
            .field("constants", &self.constants)
            .field("horizon", &self.w.horizon())
            .field("n_cells", &self.w.n_cells())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(
        op: SpectralOperator,
        exponents: Exponents,
        q: Arc<dyn Nonlinearity>,
        f: Arc<dyn NoiseCoefficient>,
        constants: ModelConstants,
        u0: SpectralVector,
        w: SampledPath,
    ) -> Result<Self> {
        let spec = Self {
            op,
            exponents,
            q,
            f,
            constants,
            u0,
            w,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.exponents.validate()?;
        if self.u0.len() != self.op.dim() {
            return Err(Error::config(format!(
                "initial value has dimension {}, operator has {}",
                self.u0.len(),
                self.op.dim()
            )));
        }
        if self.f.noise_dim() != self.w.dim() {
            return Err(Error::config(format!(
                "noise coefficient expects R^{} but the driving path lives in R^{}",
                self.f.noise_dim(),
                self.w.dim()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn eps_f(&self) -> f64 {
        self.exponents.eps_f()
    }

    pub fn with_initial(mut self, u0: SpectralVector) -> Result<Self> {
        self.u0 = u0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_path(mut self, w: SampledPath) -> Result<Self> {
        self.w = w;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nonlinearity(mut self, q: Arc<dyn Nonlinearity>, k1: GrowthBound, k2: GrowthBound) -> Self {
        self.q = q;
        self.constants.k1 = k1;
        self.constants.k2 = k2;
        self
    }

    pub fn with_noise(mut self, f: Arc<dyn NoiseCoefficient>, constants: NoiseConstants) -> Result<Self> {
        self.f = f;
        self.constants.noise = constants;
        self.validate()?;
        Ok(self)
    }

    /// `‖A^α u₀‖`, the regularity of the initial datum the existence theorem asks for.
    pub fn initial_regularity(&self) -> f64 {
        self.op.frac_norm(self.exponents.alpha, &self.u0)
    }
}

/// The two parts of `‖u‖_{ℍ_T}` and their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HtNorm {
    pub sup_part: f64,
    pub holder_part: f64,
    pub total: f64,
}

pub fn ht_norm(u: &SampledPath, delta: f64, alpha: f64, op: &SpectralOperator) -> Result<HtNorm> {
    if u.dim() != op.dim() {
        return Err(Error::arg(format!(
            "path has dimension {}, operator has {}",
            u.dim(),
            op.dim()
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(0.0..1.0).contains(&delta) {
        return Err(Error::arg(format!(
            "norm exponents out of range: delta = {delta}, alpha = {alpha}"
        )));
    }
    Ok(ht_norm_unchecked(u, delta, alpha, op))
}

pub(crate) fn ht_norm_unchecked(u: &SampledPath, delta: f64, alpha: f64, op: &SpectralOperator) -> HtNorm {
    let sup_part = (0..u.n_points())
        .map(|j| op.frac_norm(delta, u.value(j)))
        .fold(0.0, f64::max);
    let (holder_part, _) = holder_sup(u.full_window(), u.dt(), alpha, |j, k| {
        crate::linalg::dist(u.value(j), u.value(k))
    });
    HtNorm {
        sup_part,
        holder_part,
        total: sup_part + holder_part,
    }
}

/// A path in `X` together with its ℍ_T norm.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionPath {
    pub path: SampledPath,
    pub norm: HtNorm,
}

impl SolutionPath {
    pub fn new(path: SampledPath, delta: f64, alpha: f64, op: &SpectralOperator) -> Result<Self> {
        let norm = ht_norm(&path, delta, alpha, op)?;
        Ok(Self { path, norm })
    }
}
