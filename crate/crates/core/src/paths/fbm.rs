use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SampledPath;
use crate::error::{Error, Result};

/// Covariance `½(s^{2h} + t^{2h} − |t − s|^{2h})` of standard fractional Brownian motion.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let e = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Samples `d` independent fBM components on `n` uniform cells of `[0, T]`.
///
/// The increments form a stationary Gaussian sequence whose Toeplitz covariance
/// is factorized exactly by the Durbin–Levinson recursion (the sequential form
/// of its Cholesky factorization), `O(n²)` time and `O(n)` memory. The random
/// stream is ChaCha8 seeded from `seed`; standard normals are drawn in the order
/// (step, component).
pub fn fbm_generate(hurst: f64, n: usize, horizon: f64, d: usize, seed: u64) -> Result<SampledPath> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::arg(format!("hurst parameter must lie in (0,1), got {hurst}")));
    }
    if n == 0 || d == 0 {
        return Err(Error::arg("fbm needs n >= 1 and d >= 1"));
    }
    if !(horizon > 0.0) {
        return Err(Error::arg("fbm horizon must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(k, hurst)).collect();

    // increments[k * d + c]
    let mut increments = vec![0.0; n * d];
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut phi_next: Vec<f64> = Vec::with_capacity(n);
    let mut v = gamma[0];
    for c in 0..d {
        let z: f64 = StandardNormal.sample(&mut rng);
        increments[c] = v.sqrt() * z;
    }
    for k in 1..n {
        // phi holds φ_{k-1, 1..=k-1}
        let mut acc = gamma[k];
        for (j, p) in phi.iter().enumerate() {
            acc -= p * gamma[k - 1 - j];
        }
        let reflection = acc / v;
        phi_next.clear();
        for j in 0..phi.len() {
            phi_next.push(phi[j] - reflection * phi[phi.len() - 1 - j]);
        }
        phi_next.push(reflection);
        std::mem::swap(&mut phi, &mut phi_next);
        v *= 1.0 - reflection * reflection;
        if !(v > 0.0) {
            return Err(Error::Internal(format!(
                "fbm covariance factorization lost positivity at step {k}"
            )));
        }
        let sd = v.sqrt();
        for c in 0..d {
            let mut mean = 0.0;
            for (j, p) in phi.iter().enumerate() {
                mean += p * increments[(k - 1 - j) * d + c];
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            increments[k * d + c] = mean + sd * z;
        }
    }

    let step_scale = (horizon / n as f64).powf(hurst);
    let mut values = vec![0.0; (n + 1) * d];
    for k in 0..n {
        for c in 0..d {
            values[(k + 1) * d + c] = values[k * d + c] + step_scale * increments[k * d + c];
        }
    }
    SampledPath::new(horizon, d, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        assert!((fbm_covariance(1.0, 1.0, 0.3) - 1.0).abs() < 1e-15);
        assert!((fbm_covariance(0.7, 0.7, 0.8) - 0.7f64.powf(1.6)).abs() < 1e-15);
        assert!((fbm_covariance(1.0, 2.0, 0.75) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn starts_at_zero_and_is_deterministic() {
        let a = fbm_generate(0.7, 64, 1.0, 3, 11).unwrap();
        let b = fbm_generate(0.7, 64, 1.0, 3, 11).unwrap();
        let c = fbm_generate(0.7, 64, 1.0, 3, 12).unwrap();
        assert_eq!(a.value(0), &[0.0, 0.0, 0.0]);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_hurst() {
        assert!(fbm_generate(0.0, 8, 1.0, 1, 0).is_err());
        assert!(fbm_generate(1.0, 8, 1.0, 1, 0).is_err());
        assert!(fbm_generate(0.5, 0, 1.0, 1, 0).is_err());
    }

    #[test]
    fn brownian_case_has_independent_increments() {
        // h = 1/2: all reflection coefficients vanish
        let a = fbm_generate(0.5, 16, 1.0, 1, 5).unwrap();
        assert_eq!(a.n_cells(), 16);
        assert!((fgn_autocovariance(3, 0.5)).abs() < 1e-15);
    }
}
