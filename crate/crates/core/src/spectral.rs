//! Spectral calculus for a positive self-adjoint operator `A` given by its
//! eigenvalues. The state space is the coordinate space of the eigenbasis, so
//! fractional powers `A^ε`, the semigroup `P_t = e^{-tA}` and their products are
//! diagonal maps.
//!
//! Bounds use the sharp constants over all positive spectra:
//!
//! * `‖A^ε P_t‖ ≤ (ε/(e t))^ε` for `ε ∈ [0, 1]`, `t > 0`;
//! * `‖x − P_t x‖ ≤ t^ε ‖A^ε x‖` for `ε ∈ (0, 1]`, from `1 − e^{-z} ≤ z^ε`.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Coordinates of a state in the eigenbasis of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVector(pub Vec<f64>);

impl SpectralVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for SpectralVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SpectralVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for SpectralVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralOperator {
    eigenvalues: Vec<f64>,
    log_eigenvalues: Vec<f64>,
}

impl SpectralOperator {
    /// Builds `A` from ascending, finite, strictly positive eigenvalues.
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::arg("spectral operator needs at least one eigenvalue"));
        }
        if eigenvalues.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(Error::arg("eigenvalues must be finite and strictly positive"));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::arg("eigenvalues must be sorted ascending"));
        }
        let log_eigenvalues = eigenvalues.iter().map(|l| l.ln()).collect();
        Ok(Self {
            eigenvalues,
            log_eigenvalues,
        })
    }

    /// Dirichlet Laplacian on `(0, π)`: `λ_k = k²`, `k = 1..=n`.
    pub fn dirichlet_laplacian(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|k| (k * k) as f64).collect())
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The spectral gap `λ_1`.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::arg(format!(
                "vector has dimension {}, operator has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Per-mode factor `λ_k^ε e^{-λ_k t}`, evaluated as `exp(ε ln λ_k − λ_k t)`.
    pub fn multiplier(&self, k: usize, eps: f64, t: f64) -> f64 {
        (eps * self.log_eigenvalues[k] - self.eigenvalues[k] * t).exp()
    }

    /// `A^ε x`.
    pub fn frac_power_apply(&self, eps: f64, x: &[f64]) -> Result<SpectralVector> {
        self.check_dim(x)?;
        if !eps.is_finite() {
            return Err(Error::arg("exponent must be finite"));
        }
        Ok(self.frac_power_unchecked(eps, x))
    }

    pub(crate) fn frac_power_unchecked(&self, eps: f64, x: &[f64]) -> SpectralVector {
        if eps == 0.0 {
            return SpectralVector(x.to_vec());
        }
        x.iter()
            .zip(&self.log_eigenvalues)
            .map(|(xi, ll)| (eps * ll).exp() * xi)
            .collect::<Vec<_>>()
            .into()
    }

    /// `‖A^ε x‖`.
    pub fn frac_norm(&self, eps: f64, x: &[f64]) -> f64 {
        if eps == 0.0 {
            return crate::linalg::norm(x);
        }
        x.iter()
            .zip(&self.log_eigenvalues)
            .map(|(xi, ll)| {
                let v = (eps * ll).exp() * xi;
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `P_t x = e^{-tA} x`.
    pub fn semigroup_apply(&self, t: f64, x: &[f64]) -> Result<SpectralVector> {
        self.check_dim(x)?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::arg(format!("semigroup time must be >= 0, got {t}")));
        }
        Ok(self.semigroup_unchecked(t, x))
    }

    pub(crate) fn semigroup_unchecked(&self, t: f64, x: &[f64]) -> SpectralVector {
        if t == 0.0 {
            return SpectralVector(x.to_vec());
        }
        x.iter()
            .zip(&self.eigenvalues)
            .map(|(xi, l)| (-l * t).exp() * xi)
            .collect::<Vec<_>>()
            .into()
    }

    /// `A^ε P_t x`, fused so that it stays finite for stiff spectra.
    pub fn frac_semigroup_apply(&self, eps: f64, t: f64, x: &[f64]) -> Result<SpectralVector> {
        self.check_dim(x)?;
        if !eps.is_finite() || !t.is_finite() {
            return Err(Error::arg("exponent and time must be finite"));
        }
        if eps > 0.0 && t <= 0.0 {
            return Err(Error::domain(format!(
                "A^{eps} P_t requires t > 0 for positive exponents, got t = {t}"
            )));
        }
        if t < 0.0 {
            return Err(Error::domain(format!("semigroup time must be >= 0, got {t}")));
        }
        Ok(x.iter()
            .enumerate()
            .map(|(k, xi)| self.multiplier(k, eps, t) * xi)
            .collect::<Vec<_>>()
            .into())
    }

    /// `‖A^ε P_t‖ = max_k λ_k^ε e^{-λ_k t}`.
    pub fn operator_bound(&self, eps: f64, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::domain(format!("operator bound needs eps in [0,1], got {eps}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("operator bound needs t > 0, got {t}")));
        }
        Ok((0..self.dim())
            .map(|k| self.multiplier(k, eps, t))
            .fold(0.0, f64::max))
    }

    /// Largest per-mode excess `(1 − e^{-λ_k t}) − (λ_k t)^ε`; nonpositive whenever
    /// the regularity estimate with constant one holds.
    pub fn regularity_excess(&self, eps: f64, t: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| {
                let z = l * t;
                -(-z).exp_m1() - z.powf(eps)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sharp continuum constant `sup_{λ>0} λ^ε e^{-λt} = (ε/(e t))^ε` (one at `ε = 0`).
pub fn smoothing_constant(eps: f64, t: f64) -> f64 {
    if eps == 0.0 {
        return 1.0;
    }
    (eps * (eps.ln() - 1.0 - t.ln())).exp()
}

/// `∫_0^t (ε/(e r))^ε dr = (ε/e)^ε t^{1−ε} / (1 − ε)` for `ε ∈ [0, 1)`.
pub fn integrated_smoothing_constant(eps: f64, t: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&eps));
    let c = if eps == 0.0 {
        1.0
    } else {
        (eps * (eps.ln() - 1.0)).exp()
    };
    c * t.powf(1.0 - eps) / (1.0 - eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_operator(rng: &mut ChaCha8Rng, n: usize) -> SpectralOperator {
        let mut eig: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(0.0..4.0))).collect();
        eig.sort_by(f64::total_cmp);
        SpectralOperator::new(eig).unwrap()
    }

    #[test]
    fn rejects_bad_spectra() {
        assert!(SpectralOperator::new(vec![]).is_err());
        assert!(SpectralOperator::new(vec![0.0, 1.0]).is_err());
        assert!(SpectralOperator::new(vec![2.0, 1.0]).is_err());
        assert!(SpectralOperator::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn frac_power_examples() {
        let a = SpectralOperator::new(vec![4.0]).unwrap();
        assert_eq!(a.frac_power_apply(0.5, &[1.0]).unwrap().0, vec![2.0]);
        let b = SpectralOperator::new(vec![1.0, 3.0, 7.0]).unwrap();
        let x = [0.3, -1.0, 2.5];
        assert_eq!(b.frac_power_apply(0.0, &x).unwrap().0, x.to_vec());
        assert!(b.frac_power_apply(0.5, &[1.0]).is_err());
    }

    #[test]
    fn half_power_twice_is_full_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_operator(&mut rng, 8);
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let twice = a
            .frac_power_apply(0.5, &a.frac_power_apply(0.5, &x).unwrap())
            .unwrap();
        let once = a.frac_power_apply(1.0, &x).unwrap();
        for (p, q) in twice.iter().zip(once.iter()) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0));
        }
    }

    #[test]
    fn semigroup_examples() {
        let a = SpectralOperator::new(vec![1.0]).unwrap();
        let half = a.semigroup_apply(std::f64::consts::LN_2, &[1.0]).unwrap();
        assert!((half[0] - 0.5).abs() < 1e-15);
        assert_eq!(a.semigroup_apply(0.0, &[3.0]).unwrap().0, vec![3.0]);
        assert!(a.semigroup_apply(-1.0, &[1.0]).is_err());
    }

    #[test]
    fn semigroup_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_operator(&mut rng, 6);
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = rng.random_range(0.0..0.01);
            let t = rng.random_range(0.0..0.01);
            let lhs = a.semigroup_apply(s, &a.semigroup_apply(t, &x).unwrap()).unwrap();
            let rhs = a.semigroup_apply(s + t, &x).unwrap();
            for (p, q) in lhs.iter().zip(rhs.iter()) {
                assert!((p - q).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn frac_semigroup_examples() {
        let a = SpectralOperator::new(vec![1.0]).unwrap();
        let v = a.frac_semigroup_apply(0.5, 1.0, &[1.0]).unwrap();
        assert!((v[0] - (-1f64).exp()).abs() < 1e-15);
        let p = a.semigroup_apply(0.3, &[2.0]).unwrap();
        assert_eq!(a.frac_semigroup_apply(0.0, 0.3, &[2.0]).unwrap(), p);
        assert!(a.frac_semigroup_apply(0.5, 0.0, &[1.0]).is_err());

        let stiff = SpectralOperator::new(vec![1e6]).unwrap();
        let v = stiff.frac_semigroup_apply(0.75, 1.0, &[1.0]).unwrap();
        assert!(v[0].is_finite());
        assert!(v[0] <= smoothing_constant(0.75, 1.0));
    }

    #[test]
    fn operator_bound_examples() {
        let a = SpectralOperator::new(vec![1.0]).unwrap();
        assert!((a.operator_bound(1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        let b = SpectralOperator::new(vec![2.0, 5.0, 9.0]).unwrap();
        assert_eq!(b.operator_bound(0.0, 0.2).unwrap(), (-2.0f64 * 0.2).exp());
        let c = SpectralOperator::dirichlet_laplacian(64).unwrap();
        let bound = c.operator_bound(0.5, 0.01).unwrap();
        assert!(bound <= smoothing_constant(0.5, 0.01));
        assert!((smoothing_constant(0.5, 0.01) - 4.2888).abs() < 1e-3);
        assert!(c.operator_bound(1.5, 0.1).is_err());
        assert!(c.operator_bound(0.5, 0.0).is_err());
    }

    #[test]
    fn integrated_constant_matches_quadrature() {
        for &eps in &[0.0, 0.25, 0.5, 0.75] {
            let t: f64 = 0.3;
            let n = 200_000;
            // midpoint rule after r = u^k, which removes the singularity at 0
            let k = 2.0 / (1.0 - eps);
            let top = t.powf(1.0 / k);
            let h = top / n as f64;
            let q: f64 = (0..n)
                .map(|i| {
                    let u = (i as f64 + 0.5) * h;
                    smoothing_constant(eps, u.powf(k)) * k * u.powf(k - 1.0) * h
                })
                .sum();
            let exact = integrated_smoothing_constant(eps, t);
            assert!((q - exact).abs() < 5e-3 * exact, "eps {eps}: {q} vs {exact}");
        }
    }
}
