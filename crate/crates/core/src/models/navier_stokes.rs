//! Fourier–Galerkin Navier–Stokes on the periodic torus in real divergence-free coordinates.
//!
//! For `k` in the half set (first nonzero component positive) and an orthonormal pair of
//! real polarizations `e_{k,a} ⊥ k` (one in 2D),
//! `û(k) = Σ_a (x_{k,a,re} + i x_{k,a,im}) e_{k,a} / √2` and `û(−k) = conj(û(k))`, so the
//! coordinate norm equals the mean-square norm of the field. Coordinates are ordered by
//! `|k|²`, the Stokes eigenvalue.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::fourier::{ns_bilinear, ns_bilinear_adjoint, FourierField, WaveSet};
use super::heat::MIXING_SEED_OFFSET;
use super::noise::TanhNoise;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::mild::{
    ConstantNoise, Exponents, GrowthBound, ModelConstants, NoiseCoefficient, NoiseConstants, Nonlinearity,
    ProblemSpec, ZeroNonlinearity,
};
use crate::paths::fbm_generate;
use crate::spectral::SpectralOperator;

/// Seed of the internal Sobolevski estimate behind the declared `K₁`, `K₂`.
const CONSTANT_FIT_SEED: u64 = 0x50B0_1E75_C0DE;
const CONSTANT_FIT_SAMPLES: usize = 256;
/// Safety factor applied to the sampled Sobolevski constant.
pub const SOBOLEVSKI_SAFETY: f64 = 1.25;

#[derive(Clone, Copy, Debug)]
struct Coord {
    wave: usize,
    pol: usize,
    imag: bool,
}

#[derive(Debug)]
pub struct StokesBasis {
    waves: Arc<WaveSet>,
    /// Polarization vectors per wave index (empty for the lower half).
    pols: Vec<Vec<[f64; 3]>>,
    coords: Vec<Coord>,
    eigenvalues: Vec<f64>,
}

fn in_upper_half(k: &[i64]) -> bool {
    k.iter().find(|c| **c != 0).is_some_and(|c| *c > 0)
}

fn polarizations(k: &[i64]) -> Vec<[f64; 3]> {
    let kn = k.iter().map(|c| (c * c) as f64).sum::<f64>().sqrt();
    if k.len() == 2 {
        return vec![[-k[1] as f64 / kn, k[0] as f64 / kn, 0.0]];
    }
    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    // reference axis: the coordinate axis least aligned with k
    let axis = (0..3)
        .min_by(|a, b| kf[*a].abs().partial_cmp(&kf[*b].abs()).unwrap().then(a.cmp(b)))
        .unwrap();
    let mut r = [0.0; 3];
    r[axis] = 1.0;
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let e1 = cross(kf, r);
    let n1 = norm(&e1);
    let e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
    let e2 = cross(kf, e1);
    let e2 = [e2[0] / kn, e2[1] / kn, e2[2] / kn];
    vec![e1, e2]
}

impl StokesBasis {
    pub fn new(dim: usize, k_max: usize) -> Result<Arc<Self>> {
        let waves = WaveSet::new(dim, k_max)?;
        let mut pols = vec![Vec::new(); waves.len()];
        let mut coords = Vec::new();
        for i in 0..waves.len() {
            if !in_upper_half(waves.vector(i)) {
                continue;
            }
            pols[i] = polarizations(waves.vector(i));
            for pol in 0..pols[i].len() {
                for imag in [false, true] {
                    coords.push(Coord { wave: i, pol, imag });
                }
            }
        }
        coords.sort_by(|a, b| waves.norm_sq(a.wave).partial_cmp(&waves.norm_sq(b.wave)).unwrap());
        let eigenvalues = coords.iter().map(|c| waves.norm_sq(c.wave)).collect();
        Ok(Arc::new(Self {
            waves,
            pols,
            coords,
            eigenvalues,
        }))
    }

    pub fn waves(&self) -> &Arc<WaveSet> {
        &self.waves
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn operator(&self) -> SpectralOperator {
        SpectralOperator::new(self.eigenvalues.clone()).expect("Stokes spectrum is positive and sorted")
    }

    pub fn to_field(&self, x: &[f64]) -> FourierField {
        let d = self.waves.dim();
        let mut f = FourierField::zeros(&self.waves);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (c, xv) in self.coords.iter().zip(x) {
            let e = self.pols[c.wave][c.pol];
            let z = if c.imag {
                Complex64::new(0.0, xv * s)
            } else {
                Complex64::new(xv * s, 0.0)
            };
            let j = self.waves.negation(c.wave);
            for a in 0..d {
                f.coeff_mut(c.wave)[a] += z * e[a];
                f.coeff_mut(j)[a] += z.conj() * e[a];
            }
        }
        f
    }

    /// Coordinates of the divergence-free, real part of `f`.
    pub fn from_field(&self, f: &FourierField) -> Vec<f64> {
        let d = self.waves.dim();
        let s = std::f64::consts::SQRT_2;
        self.coords
            .iter()
            .map(|c| {
                let e = self.pols[c.wave][c.pol];
                let proj: Complex64 = (0..d).map(|a| f.coeff(c.wave)[a] * e[a]).sum();
                s * if c.imag { proj.im } else { proj.re }
            })
            .collect()
    }

    /// `B(w, u) = P(w · ∇u)` in coordinates.
    pub fn bilinear(&self, w: &[f64], u: &[f64]) -> Vec<f64> {
        let b = ns_bilinear(&self.to_field(w), &self.to_field(u)).expect("shared wave set");
        self.from_field(&b)
    }

    fn scaled(&self, x: &[f64], s: f64) -> Vec<f64> {
        x.iter().zip(&self.eigenvalues).map(|(v, l)| v * l.powf(s)).collect()
    }

    /// `‖A^{−1/4} B(w, u)‖ / (‖A^{1/2} w‖ ‖A^{1/2} u‖)`, `None` when the denominator vanishes.
    pub fn sobolevski_ratio(&self, w: &[f64], u: &[f64]) -> Option<f64> {
        let den = norm(&self.scaled(w, 0.5)) * norm(&self.scaled(u, 0.5));
        if den == 0.0 {
            return None;
        }
        Some(norm(&self.scaled(&self.bilinear(w, u), -0.25)) / den)
    }

    fn random_coords(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|l| {
                let g: f64 = StandardNormal.sample(rng);
                g / l.sqrt()
            })
            .collect()
    }
}

/// `Q(u) = A^{−τ} B(u, u)`.
#[derive(Debug)]
pub struct NsNonlinearity {
    basis: Arc<StokesBasis>,
    weights: Vec<f64>,
}

impl NsNonlinearity {
    pub fn new(basis: Arc<StokesBasis>, tau: f64) -> Self {
        let weights = basis.eigenvalues.iter().map(|l| l.powf(-tau)).collect();
        Self { basis, weights }
    }
}

impl Nonlinearity for NsNonlinearity {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut b = self.basis.bilinear(x, x);
        for (v, w) in b.iter_mut().zip(&self.weights) {
            *v *= w;
        }
        b
    }

    fn derivative(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let a = self.basis.bilinear(x, xi);
        let b = self.basis.bilinear(xi, x);
        a.iter().zip(&b).zip(&self.weights).map(|((p, q), w)| w * (p + q)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SobolevskiEstimate {
    /// Largest ratio found after refinement.
    pub estimate: f64,
    /// Largest ratio among the raw random samples.
    pub raw_max: f64,
    pub witness_w: Vec<f64>,
    pub witness_u: Vec<f64>,
    /// Samples dropped because a factor vanished.
    pub skipped: usize,
}

/// Number of best raw samples refined by alternating power iteration.
const REFINE_TOP: usize = 8;
const REFINE_ROUNDS: usize = 4;
const POWER_STEPS: usize = 6;

impl StokesBasis {
    /// `P((∇u)ᵀ z)` in coordinates, the adjoint of `w ↦ B(w, u)`.
    pub fn bilinear_adjoint(&self, u: &[f64], z: &[f64]) -> Vec<f64> {
        let b = ns_bilinear_adjoint(&self.to_field(u), &self.to_field(z)).expect("shared wave set");
        self.from_field(&b)
    }

    /// Power iteration for the top singular vector of a linear map given with its adjoint.
    fn top_singular(&self, start: Vec<f64>, op: impl Fn(&[f64]) -> Vec<f64>, adj: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
        let mut v = start;
        for _ in 0..POWER_STEPS {
            let nv = norm(&v);
            if nv == 0.0 {
                break;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            v = adj(&op(&v));
        }
        let nv = norm(&v);
        if nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
        }
        v
    }
}

/// Largest `‖A^{−1/4} B(w, u)‖ / (‖A^{1/2} w‖ ‖A^{1/2} u‖)` over random divergence-free pairs.
///
/// The best raw pairs are refined by alternating power iteration: in `u` on
/// `v ↦ A^{−1/4} B(w, A^{−1/2} v)`, whose adjoint is `z ↦ −A^{−1/2} B(w, A^{−1/4} z)` by
/// skew-symmetry of `B(w, ·)`, then in `w` on `v ↦ A^{−1/4} B(A^{−1/2} v, u)`, whose adjoint
/// is `z ↦ A^{−1/2} P((∇u)ᵀ A^{−1/4} z)`. Each step can only increase the ratio, so the
/// estimate approaches the supremum from below.
pub fn sobolevski_check(basis: &StokesBasis, samples: usize, seed: u64) -> Result<SobolevskiEstimate> {
    if samples == 0 {
        return Err(Error::arg("need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scored = Vec::with_capacity(samples);
    let mut skipped = 0;
    for _ in 0..samples {
        let w = basis.random_coords(&mut rng);
        let u = basis.random_coords(&mut rng);
        match basis.sobolevski_ratio(&w, &u) {
            Some(r) => scored.push((r, w, u)),
            None => skipped += 1,
        }
    }
    if scored.is_empty() {
        return Err(Error::arg("every sample was degenerate"));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let raw_max = scored[0].0;
    let mut best = (raw_max, scored[0].1.clone(), scored[0].2.clone());
    for (_, w0, u0) in scored.iter().take(REFINE_TOP) {
        let (mut w, mut u) = (w0.clone(), u0.clone());
        for _ in 0..REFINE_ROUNDS {
            let v = basis.top_singular(
                basis.scaled(&u, 0.5),
                |v| basis.scaled(&basis.bilinear(&w, &basis.scaled(v, -0.5)), -0.25),
                |z| basis.scaled(&basis.bilinear(&w, &basis.scaled(z, -0.25)), -0.5).iter().map(|x| -x).collect(),
            );
            u = basis.scaled(&v, -0.5);
            let v = basis.top_singular(
                basis.scaled(&w, 0.5),
                |v| basis.scaled(&basis.bilinear(&basis.scaled(v, -0.5), &u), -0.25),
                |z| basis.scaled(&basis.bilinear_adjoint(&u, &basis.scaled(z, -0.25)), -0.5),
            );
            w = basis.scaled(&v, -0.5);
        }
        if let Some(r) = basis.sobolevski_ratio(&w, &u) {
            if r > best.0 {
                best = (r, w, u);
            }
        }
    }
    Ok(SobolevskiEstimate {
        estimate: best.0,
        raw_max,
        witness_w: best.1,
        witness_u: best.2,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NsParams {
    pub dim: usize,
    pub k_max: usize,
    pub delta: f64,
    pub tau: f64,
    pub alpha: f64,
    pub noise_dim: usize,
    pub noise_amp: f64,
    pub hurst: f64,
    pub n_cells: usize,
    pub horizon: f64,
    pub u0_amp: f64,
    pub seed: u64,
    pub disable_q: bool,
}

impl Default for NsParams {
    fn default() -> Self {
        Self {
            dim: 2,
            k_max: 4,
            delta: 0.5,
            tau: 0.25,
            alpha: 0.6,
            noise_dim: 2,
            noise_amp: 1.0,
            hurst: 0.75,
            n_cells: 512,
            horizon: 0.5,
            u0_amp: 1.0,
            seed: 1,
            disable_q: false,
        }
    }
}

/// Declared constants for `Q = A^{−τ} B(u, u)` from a Sobolevski constant `c`:
/// `K₂(r) = c r²` and `K₁(r) = 2 c r`.
pub fn ns_growth_bounds(c: f64) -> (GrowthBound, GrowthBound) {
    (GrowthBound::linear(2.0 * c), GrowthBound::quadratic(c))
}

/// The Navier–Stokes problem together with its coordinate basis.
pub fn make_ns_model_with_basis(p: &NsParams) -> Result<(ProblemSpec, Arc<StokesBasis>)> {
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
    let basis = StokesBasis::new(p.dim, p.k_max).map_err(|e| Error::config(e.to_string()))?;
    let op = basis.operator();
    let n = basis.dim();

    let (q, k1, k2, sob): (Arc<dyn Nonlinearity>, _, _, _) = if p.disable_q {
        (Arc::new(ZeroNonlinearity), GrowthBound::ZERO, GrowthBound::ZERO, None)
    } else {
        let est = sobolevski_check(&basis, CONSTANT_FIT_SAMPLES, CONSTANT_FIT_SEED)?.estimate;
        // ‖A^{−τ} y‖ ≤ λ_max^{(1/4−τ)⁺} ‖A^{−1/4} y‖ and ‖A^{1/2} x‖ ≤ λ_max^{(1/2−δ)⁺} ‖A^δ x‖
        // on a spectrum with gap 1
        let lmax = op.max_eigenvalue();
        let lift = lmax.powf((0.5 - p.delta).max(0.0));
        let c = SOBOLEVSKI_SAFETY * est * lmax.powf((0.25 - p.tau).max(0.0)) * lift * lift;
        let (k1, k2) = ns_growth_bounds(c);
        (Arc::new(NsNonlinearity::new(Arc::clone(&basis), p.tau)), k1, k2, Some(est))
    };

    let (f, noise): (Arc<dyn NoiseCoefficient>, NoiseConstants) = if p.noise_amp == 0.0 {
        (Arc::new(ConstantNoise::zero(n, p.noise_dim)), NoiseConstants::default())
    } else {
        let smoothing = exponents.eps_f() + p.delta;
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
        sobolevski: sob,
    };
    let spec = ProblemSpec::new(op, exponents, q, f, constants, u0, w)?;
    Ok((spec, basis))
}

pub fn make_ns_model(p: &NsParams) -> Result<ProblemSpec> {
    make_ns_model_with_basis(p).map(|(s, _)| s)
}

/// Coordinates of the 2D Taylor–Green field `amp (sin x cos y, −cos x sin y)`.
pub fn taylor_green(basis: &StokesBasis, amp: f64) -> Result<Vec<f64>> {
    if basis.waves().dim() != 2 || basis.waves().k_max() < 2 {
        return Err(Error::arg("Taylor–Green needs a 2D basis with K_max >= 2"));
    }
    let mut f = FourierField::zeros(basis.waves());
    f.add_sine(&[1, 1], &[0.5 * amp, -0.5 * amp], 1.0)?;
    f.add_sine(&[1, -1], &[0.5 * amp, 0.5 * amp], 1.0)?;
    Ok(basis.from_field(&f))
}

/// `⟨B(u, u), u⟩ / ‖u‖³` in coordinates.
pub fn energy_defect(basis: &StokesBasis, u: &[f64]) -> f64 {
    let n = norm(u);
    if n == 0.0 {
        return 0.0;
    }
    dot(&basis.bilinear(u, u), u).abs() / (n * n * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn coordinate_counts_and_round_trip() {
        let b2 = StokesBasis::new(2, 4).unwrap();
        assert_eq!(b2.dim(), 48);
        assert_eq!(b2.eigenvalues()[0], 1.0);
        let b3 = StokesBasis::new(3, 4).unwrap();
        assert_eq!(b3.dim(), 512);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..b3.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = b3.to_field(&x);
        assert!(f.max_divergence() < 1e-14);
        assert!(f.reality_defect() == 0.0);
        assert!((f.norm() - norm(&x)).abs() < 1e-12);
        let back = b3.from_field(&f);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_is_symmetrized_bilinear() {
        let basis = StokesBasis::new(2, 3).unwrap();
        let q = NsNonlinearity::new(Arc::clone(&basis), 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..basis.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xi: Vec<f64> = (0..basis.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        // Q is quadratic, so Q(x + ξ) − Q(x − ξ) = 2 DQ(x) ξ exactly
        let plus: Vec<f64> = x.iter().zip(&xi).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = x.iter().zip(&xi).map(|(a, b)| a - b).collect();
        let (qp, qm) = (q.eval(&plus), q.eval(&minus));
        let dq = q.derivative(&x, &xi);
        for k in 0..basis.dim() {
            assert!(((qp[k] - qm[k]) / 2.0 - dq[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn sobolevski_ratio_guards_zero() {
        let basis = StokesBasis::new(2, 3).unwrap();
        let z = vec![0.0; basis.dim()];
        let mut e = z.clone();
        e[0] = 1.0;
        assert!(basis.sobolevski_ratio(&z, &e).is_none());
        assert!(basis.sobolevski_ratio(&e, &e).unwrap().is_finite());
        let est = sobolevski_check(&basis, 50, 3).unwrap();
        assert!(est.estimate >= est.raw_max);
        assert!(basis.sobolevski_ratio(&e, &e).unwrap() <= est.estimate * 10.0);
    }

    #[test]
    fn taylor_green_is_steady_for_advection() {
        let basis = StokesBasis::new(2, 4).unwrap();
        let tg = taylor_green(&basis, 1.0).unwrap();
        // mean square of (sin x cos y, −cos x sin y) is 1/2
        assert!((norm(&tg) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(norm(&basis.bilinear(&tg, &tg)) < 1e-14);
    }
}
