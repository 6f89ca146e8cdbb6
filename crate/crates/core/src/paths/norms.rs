use super::{GridWindow, SampledPath};
use crate::error::{Error, Result};
use crate::linalg::dist;

/// Discrete α-Hölder norm of a path together with a pair of grid indices attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderProfile {
    pub alpha: f64,
    pub value: f64,
    /// `(j*, k*)` with `j* < k*`; `(start, start)` when the norm is zero.
    pub witness: (usize, usize),
}

/// `max_{start ≤ j < k ≤ end} d(j, k) / ((k − j) dt)^α` for any metric `d` on grid indices.
///
/// Lags are scanned in increasing order and the scan stops once the diameter
/// bound `2 max_j d(start, j)` divided by `(lag dt)^α` cannot beat the current
/// maximum, so the result is exact.
pub(crate) fn holder_sup(
    window: GridWindow,
    dt: f64,
    alpha: f64,
    d: impl Fn(usize, usize) -> f64,
) -> (f64, (usize, usize)) {
    let (s, e) = (window.start, window.end);
    let radius = (s..=e).map(|j| d(s, j)).fold(0.0, f64::max);
    let diameter = 2.0 * radius;
    let mut best = 0.0;
    let mut witness = (s, s);
    for lag in 1..=(e - s) {
        let denom = (lag as f64 * dt).powf(alpha);
        if diameter / denom <= best {
            break;
        }
        for j in s..=(e - lag) {
            let q = d(j, j + lag) / denom;
            if q > best {
                best = q;
                witness = (j, j + lag);
            }
        }
    }
    (best, witness)
}

/// Exact discrete p-variation by dynamic programming over grid indices:
/// `best[k] = max_{j<k} best[j] + d(j, k)^p`, result `best[end]^{1/p}`.
pub(crate) fn p_variation_by(window: GridWindow, p: f64, d: impl Fn(usize, usize) -> f64) -> f64 {
    let (s, e) = (window.start, window.end);
    if e == s {
        return 0.0;
    }
    let mut best = vec![0.0f64; e - s + 1];
    for k in 1..=(e - s) {
        let mut m = 0.0f64;
        for j in 0..k {
            let inc = d(s + j, s + k);
            let cand = best[j] + if p == 1.0 { inc } else { inc.powf(p) };
            if cand > m {
                m = cand;
            }
        }
        best[k] = m;
    }
    best[e - s].powf(1.0 / p)
}

/// Discrete α-Hölder norm of `path` over `window`, a lower bound of the continuum norm.
pub fn holder_norm(path: &SampledPath, alpha: f64, window: GridWindow) -> Result<HolderProfile> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::arg(format!("Hölder exponent must lie in (0,1], got {alpha}")));
    }
    path.check_window(window)?;
    if window.cells() == 0 {
        return Err(Error::arg("Hölder norm needs a non-empty window"));
    }
    let (value, witness) = holder_sup(window, path.dt(), alpha, |j, k| {
        dist(path.value(j), path.value(k))
    });
    Ok(HolderProfile {
        alpha,
        value,
        witness,
    })
}

/// Discrete p-variation of `path` over `window`: the maximum over all subsets of
/// grid points containing both window endpoints.
pub fn p_variation(path: &SampledPath, p: f64, window: GridWindow) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::arg(format!("p-variation exponent must be >= 1, got {p}")));
    }
    path.check_window(window)?;
    Ok(p_variation_by(window, p, |j, k| {
        dist(path.value(j), path.value(k))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(values: &[f64]) -> SampledPath {
        SampledPath::new(1.0, 1, values.to_vec()).unwrap()
    }

    /// Brute force over all subsets of interior points.
    fn p_var_enumerate(values: &[f64], p: f64) -> f64 {
        let m = values.len() - 1;
        let mut best = 0.0f64;
        for mask in 0u32..(1 << (m - 1)) {
            let mut idx = vec![0];
            for i in 1..m {
                if mask & (1 << (i - 1)) != 0 {
                    idx.push(i);
                }
            }
            idx.push(m);
            let s: f64 = idx
                .windows(2)
                .map(|w| (values[w[1]] - values[w[0]]).abs().powf(p))
                .sum();
            best = best.max(s);
        }
        best.powf(1.0 / p)
    }

    #[test]
    fn holder_examples() {
        let c = scalar(&[2.0; 9]);
        assert_eq!(holder_norm(&c, 0.5, c.full_window()).unwrap().value, 0.0);

        let lin = SampledPath::from_fn(1.0, 16, 1, |t| vec![t]).unwrap();
        let h = holder_norm(&lin, 1.0, lin.full_window()).unwrap();
        assert!((h.value - 1.0).abs() < 1e-14);

        let root = SampledPath::from_fn(1.0, 256, 1, |t| vec![t.sqrt()]).unwrap();
        let h = holder_norm(&root, 0.5, root.full_window()).unwrap();
        assert!((h.value - 1.0).abs() < 1e-12);
        assert_eq!(h.witness.0, 0);

        assert!(holder_norm(&lin, 0.5, GridWindow::new(3, 3)).is_err());
        assert!(holder_norm(&lin, 1.5, lin.full_window()).is_err());
    }

    #[test]
    fn holder_pruning_matches_full_scan() {
        let p = super::super::fbm_generate(0.6, 200, 1.0, 2, 4).unwrap();
        let w = p.full_window();
        let fast = holder_norm(&p, 0.55, w).unwrap().value;
        let mut slow = 0.0f64;
        for j in 0..=200 {
            for k in (j + 1)..=200 {
                slow = slow.max(dist(p.value(j), p.value(k)) / ((k - j) as f64 * p.dt()).powf(0.55));
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn p_variation_examples() {
        let mono = scalar(&[0.0, 0.5, 0.7, 2.0]);
        assert!((p_variation(&mono, 1.0, mono.full_window()).unwrap() - 2.0).abs() < 1e-15);
        let zig = scalar(&[0.0, 1.0, 0.0, 1.0]);
        assert!((p_variation(&zig, 1.0, zig.full_window()).unwrap() - 3.0).abs() < 1e-15);
        let tri = scalar(&[0.0, 1.0, 0.0]);
        let v = p_variation(&tri, 2.0, tri.full_window()).unwrap();
        assert!((v - p_var_enumerate(&[0.0, 1.0, 0.0], 2.0)).abs() < 1e-15);
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        assert!(p_variation(&tri, 0.5, tri.full_window()).is_err());
    }

    #[test]
    fn p_variation_matches_enumeration() {
        let p = super::super::fbm_generate(0.7, 12, 1.0, 1, 9).unwrap();
        for &q in &[1.0, 1.5, 2.0, 3.0] {
            let dp = p_variation(&p, q, p.full_window()).unwrap();
            let brute = p_var_enumerate(p.values(), q);
            assert!((dp - brute).abs() < 1e-12 * brute.max(1.0));
        }
    }
}
