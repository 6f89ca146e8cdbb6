use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{norm, OperatorValue};
use crate::mild::{NoiseCoefficient, NoiseConstants};
use crate::spectral::SpectralOperator;

/// `(F(u)ξ)_k = amp · λ_k^{−s} · tanh(u_k) · (Mξ)_k` for a fixed Gaussian matrix `M`.
///
/// With `s = ε_F + δ` the operator `A^{δ+ε_F} F` is bounded and globally Lipschitz.
#[derive(Clone, Debug)]
pub struct TanhNoise {
    weights: Vec<f64>,
    mixing: OperatorValue,
}

impl TanhNoise {
    /// `M` has i.i.d. `N(0, 1/M)` entries drawn from ChaCha8 seeded with `seed`.
    pub fn new(op: &SpectralOperator, amp: f64, smoothing: f64, noise_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (noise_dim as f64).sqrt();
        let data: Vec<f64> = (0..op.dim() * noise_dim)
            .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let mixing = OperatorValue::from_row_major(op.dim(), noise_dim, data).expect("shape");
        let weights = op.eigenvalues().iter().map(|l| amp * l.powf(-smoothing)).collect();
        Self { weights, mixing }
    }

    pub fn mixing(&self) -> &OperatorValue {
        &self.mixing
    }

    /// Constants for a nominal smoothing exponent `ε_F + δ`:
    /// `L₁ = L₂ = D₁ = max_k amp λ_k^{−δ} ‖M_k‖`, `B₀ = 0`, `D₂ = D₁ · 4/(3√3)`.
    pub fn nominal_constants(op: &SpectralOperator, amp: f64, delta: f64, mixing: &OperatorValue) -> NoiseConstants {
        let l = op
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(k, lam)| amp.abs() * lam.powf(-delta) * norm(mixing.row(k)))
            .fold(0.0, f64::max);
        NoiseConstants {
            l1: l,
            l2: l,
            b0: 0.0,
            d1: l,
            // max |d/dx sech² x| = 4/(3√3)
            d2: l * 4.0 / (3.0 * 3f64.sqrt()),
        }
    }
}

impl NoiseCoefficient for TanhNoise {
    fn noise_dim(&self) -> usize {
        self.mixing.cols()
    }

    fn eval(&self, x: &[f64]) -> OperatorValue {
        let mut out = self.mixing.clone();
        let factors: Vec<f64> = x.iter().zip(&self.weights).map(|(xi, w)| w * xi.tanh()).collect();
        out.scale_rows(&factors);
        out
    }

    fn derivative(&self, x: &[f64], y: &[f64]) -> OperatorValue {
        let mut out = self.mixing.clone();
        let factors: Vec<f64> = x
            .iter()
            .zip(y)
            .zip(&self.weights)
            .map(|((xi, yi), w)| {
                let c = xi.cosh();
                w * yi / (c * c)
            })
            .collect();
        out.scale_rows(&factors);
        out
    }

    fn apply(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let mut m = self.mixing.apply(xi);
        for ((v, xk), w) in m.iter_mut().zip(x).zip(&self.weights) {
            *v *= w * xk.tanh();
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_matches_matrix() {
        let op = SpectralOperator::dirichlet_laplacian(5).unwrap();
        let f = TanhNoise::new(&op, 0.7, 1.7, 3, 4);
        let x = [0.3, -1.0, 2.0, 0.1, 0.0];
        let xi = [1.0, -0.5, 0.25];
        let a = f.apply(&x, &xi);
        let b = f.eval(&x).apply(&xi);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-15);
        }
        assert_eq!(f.eval(&[0.0; 5]).hilbert_schmidt(), 0.0);
    }
}
