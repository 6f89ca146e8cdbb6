//! Heat/reaction equation on `(0, π)` with Dirichlet conditions in the orthonormal sine
//! basis `e_k = √(2/π) sin(kx)`, `λ_k = k²`, and `Q(u) = r A^{−τ} Π_N(u²)`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::noise::TanhNoise;
use crate::error::{Error, Result};
use crate::mild::{
    ConstantNoise, Exponents, GrowthBound, ModelConstants, Nonlinearity, NoiseConstants, ProblemSpec,
    ZeroNonlinearity,
};
use crate::paths::fbm_generate;
use crate::spectral::SpectralOperator;

/// Offset between the path seed and the seed of the noise mixing matrix.
pub(crate) const MIXING_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq)]
pub struct HeatParams {
    pub modes: usize,
    pub delta: f64,
    pub tau: f64,
    pub alpha: f64,
    pub noise_dim: usize,
    pub noise_amp: f64,
    /// Coefficient `r` of the reaction term.
    pub reaction: f64,
    pub hurst: f64,
    pub n_cells: usize,
    pub horizon: f64,
    /// `u₀ = u0_amp · (1/λ_1, …, 1/λ_N)`.
    pub u0_amp: f64,
    pub seed: u64,
    pub disable_q: bool,
    /// Weakens the smoothing of `F` to `λ^{−(ε_F/2 + δ)}` while keeping the declared constants.
    pub broken_f: bool,
}

impl Default for HeatParams {
    fn default() -> Self {
        Self {
            modes: 16,
            delta: 0.5,
            tau: 0.25,
            alpha: 0.6,
            noise_dim: 2,
            noise_amp: 1.0,
            reaction: 1.0,
            hurst: 0.75,
            n_cells: 1024,
            horizon: 1.0,
            u0_amp: 1.0,
            seed: 1,
            disable_q: false,
            broken_f: false,
        }
    }
}

impl HeatParams {
    /// Small initial data and noise on a finer grid: the regime in which the explicit
    /// invariance and contraction bounds of the horizon search admit a ball.
    pub fn small_data() -> Self {
        Self {
            u0_amp: 0.005,
            noise_amp: 0.05,
            n_cells: 4096,
            ..Self::default()
        }
    }
}

/// `Π_N(u v)` in sine coordinates, by `sin a sin b = ½[cos(a−b) − cos(a+b)]` and the exact
/// sine–cosine integrals `∫₀^π cos(qx) sin(mx) dx`.
#[derive(Clone, Debug)]
pub struct SineProduct {
    n: usize,
    /// `table[q * n + (m − 1)] = √(2/π)/π ∫₀^π cos(qx) sin(mx) dx` for `q = 0..=2n`.
    table: Vec<f64>,
}

impl SineProduct {
    pub fn new(n: usize) -> Self {
        let scale = (2.0 / PI).sqrt() / PI;
        let mut table = vec![0.0; (2 * n + 1) * n];
        for q in 0..=2 * n {
            for m in 1..=n {
                if (m + q) % 2 == 1 {
                    let (mf, qf) = (m as f64, q as f64);
                    table[q * n + m - 1] = scale * 2.0 * mf / (mf * mf - qf * qf);
                }
            }
        }
        Self { n, table }
    }

    pub fn apply(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        // cosine coefficients c_q of Σ_{j,k} u_j v_k [cos((j−k)x) − cos((j+k)x)]
        let mut c = vec![0.0; 2 * n + 1];
        for j in 0..n {
            if u[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                let p = u[j] * v[k];
                c[j.abs_diff(k)] += p;
                c[j + k + 2] -= p;
            }
        }
        let mut out = vec![0.0; n];
        for (q, cq) in c.iter().enumerate() {
            if *cq == 0.0 {
                continue;
            }
            let row = &self.table[q * n..(q + 1) * n];
            for m in 0..n {
                out[m] += cq * row[m];
            }
        }
        out
    }
}

/// `Q(u)_k = r λ_k^{−τ} Π_N(u²)_k`.
#[derive(Clone, Debug)]
pub struct HeatNonlinearity {
    product: SineProduct,
    weights: Vec<f64>,
}

impl HeatNonlinearity {
    pub fn new(op: &SpectralOperator, tau: f64, reaction: f64) -> Self {
        Self {
            product: SineProduct::new(op.dim()),
            weights: op.eigenvalues().iter().map(|l| reaction * l.powf(-tau)).collect(),
        }
    }
}

impl Nonlinearity for HeatNonlinearity {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.product.apply(x, x);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o *= w;
        }
        out
    }

    fn derivative(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let mut out = self.product.apply(x, xi);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o *= 2.0 * w;
        }
        out
    }
}

/// With one mode, `Π_1(u²) = κ u²` with `κ = (2/π)^{3/2} · 4/3`.
pub fn single_mode_square_coefficient() -> f64 {
    (2.0 / PI).powf(1.5) * 4.0 / 3.0
}

/// `sup ‖u‖_∞ / ‖A^δ u‖ = √(2/π) (Σ_{k≤N} k^{−4δ})^{1/2}` on the first `N` sine modes.
pub fn sup_norm_constant(modes: usize, delta: f64) -> f64 {
    let s: f64 = (1..=modes).map(|k| (k as f64).powf(-4.0 * delta)).sum();
    (2.0 / PI).sqrt() * s.sqrt()
}

pub fn make_heat_model(p: &HeatParams) -> Result<ProblemSpec> {
    if p.modes == 0 {
        return Err(Error::config("heat model needs at least one mode"));
    }
    let lo = (0.5f64).max(1.0 - p.delta + 0.01);
    let hi = 1.0 - p.tau - 0.01;
    if !(p.alpha > lo && p.alpha <= hi) {
        return Err(Error::config(format!(
            "alpha = {} must lie in ({lo:.4}, {hi:.4}] for delta = {}, tau = {}",
            p.alpha, p.delta, p.tau
        )));
    }
    let exponents = Exponents::new(p.tau, p.delta, p.alpha)?;
    if !(p.hurst > 0.5 && p.hurst < 1.0) {
        return Err(Error::config(format!("hurst = {} must lie in (1/2, 1)", p.hurst)));
    }
    if p.noise_dim == 0 {
        return Err(Error::config("noise dimension must be at least 1"));
    }
    if !p.noise_amp.is_finite() || !p.reaction.is_finite() || !p.u0_amp.is_finite() {
        return Err(Error::config("model amplitudes must be finite"));
    }
    let op = SpectralOperator::dirichlet_laplacian(p.modes)?;
    let ef = exponents.eps_f();

    let (q, k1, k2): (Arc<dyn Nonlinearity>, _, _) = if p.disable_q || p.reaction == 0.0 {
        (Arc::new(ZeroNonlinearity), GrowthBound::ZERO, GrowthBound::ZERO)
    } else {
        let c = p.reaction.abs() * sup_norm_constant(p.modes, p.delta);
        (
            Arc::new(HeatNonlinearity::new(&op, p.tau, p.reaction)),
            GrowthBound::linear(2.0 * c),
            GrowthBound::quadratic(c),
        )
    };

    let (f, noise): (Arc<dyn crate::mild::NoiseCoefficient>, NoiseConstants) = if p.noise_amp == 0.0 {
        (Arc::new(ConstantNoise::zero(p.modes, p.noise_dim)), NoiseConstants::default())
    } else {
        let smoothing = if p.broken_f { ef / 2.0 + p.delta } else { ef + p.delta };
        let f = TanhNoise::new(&op, p.noise_amp, smoothing, p.noise_dim, p.seed.wrapping_add(MIXING_SEED_OFFSET));
        let c = TanhNoise::nominal_constants(&op, p.noise_amp, p.delta, f.mixing());
        (Arc::new(f), c)
    };

    let w = fbm_generate(p.hurst, p.n_cells, p.horizon, p.noise_dim, p.seed)
        .map_err(|e| Error::config(e.to_string()))?;
    let u0 = op.eigenvalues().iter().map(|l| p.u0_amp / l).collect::<Vec<_>>().into();
    let constants = ModelConstants {
        k1,
        k2,
        noise,
        sobolevski: None,
    };
    ProblemSpec::new(op, exponents, q, f, constants, u0, w)
}
