//! Explicit invariance and contraction bounds on ℍ_T and the dyadic horizon search.
//!
//! With `c(ε) = (ε/e)^ε / (1 − ε)`, `C_Y(θ) = 1 / (1 − 2^{1−θ})`, `λ₁` the spectral
//! gap, `W` the α-Hölder norm of `w` on `[0, T]` and `Φ₀ = ‖A^α F(u₀)‖_op`:
//!
//! ```text
//! inv(T) = (λ₁^{δ−α} + 1) ‖A^α u₀‖
//!        + [c(δ+τ) T^{1−δ−τ} + (c(τ) + c(α+τ)) T^{1−τ−α}] K₂(β)
//!        + W [ C_Y(α+δ) H(δ) T^{α+δ} + λ₁^{δ−α} Φ₀ T^α + C_Y(α+δ) H(0) T^δ
//!            + λ₁^{−ε_F} L₁ β T^α + λ₁^{−α} Φ₀ + C_Y(α+δ) H(α) T^{α+δ} + Φ₀ T^α ]
//! H(ε) = λ₁^{ε−ε_F} (L₁ β T^{α−δ} + L₂ β + B₀)
//!
//! κ(T) = [c(δ+τ) T^{1−δ−τ} + (c(τ) + c(α+τ)) T^{1−τ−α}] K₁(2β)
//!      + W [ C_Y(2α) G(δ) T^{2α} + C_Y(2α) G(0) T^α + λ₁^{−ε_F} L₁ T^α + C_Y(2α) G(α) T^{2α} ]
//! G(ε) = λ₁^{ε−ε_F} (D₁ + D₂ β (T^α / 2 + λ₁^{−δ})) + λ₁^{ε+α−δ−ε_F} L₂
//! ```

use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::paths::holder_norm;
use crate::spectral::integrated_smoothing_constant;
use crate::young::sewing_constant;

/// Both sides of the horizon test at one `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizonBounds {
    pub horizon: f64,
    /// Bound on `‖𝕃u‖_{ℍ_T}` for `‖u‖_{ℍ_T} ≤ β`.
    pub invariance: f64,
    /// Bound on the Lipschitz constant of `𝕃` on the β-ball.
    pub contraction: f64,
    /// `(λ₁^{δ−α} + 1) ‖A^α u₀‖ + W λ₁^{−α} Φ₀`, the part that does not vanish as `T → 0`.
    pub initial_terms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HorizonChoice {
    pub horizon: f64,
    pub beta: f64,
    pub bounds: HorizonBounds,
    /// Number of halvings of the driving path's horizon.
    pub level: usize,
}

fn c_int(eps: f64) -> f64 {
    integrated_smoothing_constant(eps, 1.0)
}

pub fn horizon_bounds(spec: &ProblemSpec, horizon: f64, beta: f64) -> Result<HorizonBounds> {
    let window = spec.w.window(0.0, horizon)?;
    if window.cells() == 0 {
        return Err(Error::arg("horizon must cover at least one grid cell"));
    }
    let super::Exponents { tau, delta, alpha } = spec.exponents;
    let ef = spec.eps_f();
    let t = horizon;
    let lam1 = spec.op.gap();
    let nc = spec.constants.noise;
    let w_holder = holder_norm(&spec.w, alpha, window)?.value;

    let mut af = spec.f.eval(&spec.u0);
    let lifts: Vec<f64> = spec.op.eigenvalues().iter().map(|l| l.powf(alpha)).collect();
    af.scale_rows(&lifts);
    let phi0 = af.operator_norm();

    let cy_ad = sewing_constant(alpha + delta)?;
    let cy_2a = sewing_constant(2.0 * alpha)?;
    let kernel = c_int(delta + tau) * t.powf(1.0 - delta - tau)
        + (c_int(tau) + c_int(alpha + tau)) * t.powf(1.0 - tau - alpha);

    let p_term = (lam1.powf(delta - alpha) + 1.0) * spec.initial_regularity();
    let j_term = kernel * spec.constants.k2.eval(beta);
    let h = |e: f64| lam1.powf(e - ef) * (nc.l1 * beta * t.powf(alpha - delta) + nc.l2 * beta + nc.b0);
    let u_term = w_holder
        * (cy_ad * h(delta) * t.powf(alpha + delta)
            + lam1.powf(delta - alpha) * phi0 * t.powf(alpha)
            + cy_ad * h(0.0) * t.powf(delta)
            + lam1.powf(-ef) * nc.l1 * beta * t.powf(alpha)
            + lam1.powf(-alpha) * phi0
            + cy_ad * h(alpha) * t.powf(alpha + delta)
            + phi0 * t.powf(alpha));

    let g_mid = nc.d1 + nc.d2 * beta * (0.5 * t.powf(alpha) + lam1.powf(-delta));
    let g = |e: f64| lam1.powf(e - ef) * g_mid + lam1.powf(e + alpha - delta - ef) * nc.l2;
    let contraction = kernel * spec.constants.k1.eval(2.0 * beta)
        + w_holder
            * (cy_2a * g(delta) * t.powf(2.0 * alpha)
                + cy_2a * g(0.0) * t.powf(alpha)
                + lam1.powf(-ef) * nc.l1 * t.powf(alpha)
                + cy_2a * g(alpha) * t.powf(2.0 * alpha));

    Ok(HorizonBounds {
        horizon,
        invariance: p_term + j_term + u_term,
        contraction,
        initial_terms: p_term + w_holder * lam1.powf(-alpha) * phi0,
    })
}

/// Largest `T = T_max / 2^k` on the grid with `inv(T) ≤ β` and `κ(T) ≤ 1/2`,
/// where `T_max` is the horizon of the driving path.
pub fn select_horizon(spec: &ProblemSpec, beta: f64) -> Result<HorizonChoice> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::arg(format!("ball radius must be positive, got {beta}")));
    }
    let n = spec.w.n_cells();
    let mut last = None;
    let mut level = 0;
    while n.is_multiple_of(1 << level) && (n >> level) >= 1 {
        let t = spec.w.horizon() / (1u64 << level) as f64;
        let b = horizon_bounds(spec, t, beta)?;
        if b.invariance <= beta && b.contraction <= 0.5 {
            return Ok(HorizonChoice {
                horizon: t,
                beta,
                bounds: b,
                level,
            });
        }
        last = Some(b);
        level += 1;
        if level >= usize::BITS as usize - 1 {
            break;
        }
    }
    let b = last.expect("at least one level is tried");
    Err(Error::Infeasible {
        invariance: b.invariance,
        contraction: b.contraction,
        beta,
    })
}
