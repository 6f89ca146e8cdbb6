//! Truncated Fourier fields on the torus `[0, 2π)^d` with `u = Σ_k û(k) e^{ik·x}`.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::paths::csv_fmt;

/// The wavevectors `0 < |k| ≤ K_max` of `ℤ^d`, with the convolution table of the bilinear term.
#[derive(Debug, PartialEq)]
pub struct WaveSet {
    dim: usize,
    k_max: usize,
    vectors: Vec<[i64; 3]>,
    /// `pairs[k]` lists `(p, q)` with `p + q = k`, all three in the set.
    pairs: Vec<Vec<(usize, usize)>>,
}

fn lookup_index(k_max: i64, dim: usize, k: &[i64; 3]) -> Option<usize> {
    let side = (2 * k_max + 1) as usize;
    let mut idx = 0usize;
    for c in 0..dim {
        if k[c].abs() > k_max {
            return None;
        }
        idx = idx * side + (k[c] + k_max) as usize;
    }
    Some(idx)
}

impl WaveSet {
    pub fn new(dim: usize, k_max: usize) -> Result<Arc<Self>> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::arg(format!("Fourier fields live in 2 or 3 dimensions, got {dim}")));
        }
        if k_max == 0 || k_max > 16 {
            return Err(Error::arg(format!("truncation K_max must lie in 1..=16, got {k_max}")));
        }
        let km = k_max as i64;
        let mut vectors = Vec::new();
        let range = -km..=km;
        for a in range.clone() {
            for b in range.clone() {
                let zs: Vec<i64> = if dim == 3 { range.clone().collect() } else { vec![0] };
                for c in zs {
                    let k = [a, b, c];
                    let n2 = a * a + b * b + c * c;
                    if n2 > 0 && n2 <= km * km {
                        vectors.push(k);
                    }
                }
            }
        }
        let side = (2 * k_max + 1).pow(dim as u32);
        let mut table = vec![usize::MAX; side];
        for (i, k) in vectors.iter().enumerate() {
            table[lookup_index(km, dim, k).unwrap()] = i;
        }
        let mut pairs = vec![Vec::new(); vectors.len()];
        for (ip, p) in vectors.iter().enumerate() {
            for (iq, q) in vectors.iter().enumerate() {
                let k = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
                if let Some(slot) = lookup_index(km, dim, &k) {
                    let ik = table[slot];
                    if ik != usize::MAX {
                        pairs[ik].push((ip, iq));
                    }
                }
            }
        }
        Ok(Arc::new(Self {
            dim,
            k_max,
            vectors,
            pairs,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[i64] {
        &self.vectors[i][..self.dim]
    }

    pub fn norm_sq(&self, i: usize) -> f64 {
        self.vector(i).iter().map(|c| (c * c) as f64).sum()
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        self.vectors.iter().position(|v| &v[..self.dim] == k)
    }

    /// Index of `−k`.
    pub fn negation(&self, i: usize) -> usize {
        let k = self.vectors[i];
        let neg = [-k[0], -k[1], -k[2]];
        self.vectors.iter().position(|v| *v == neg).expect("set is symmetric")
    }
}

/// Vector-valued coefficients `û(k) ∈ ℂ^d` on a [`WaveSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct FourierField {
    waves: Arc<WaveSet>,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(waves: &Arc<WaveSet>) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); waves.len() * waves.dim()],
            waves: Arc::clone(waves),
        }
    }

    pub fn waves(&self) -> &Arc<WaveSet> {
        &self.waves
    }

    pub fn coeff(&self, i: usize) -> &[Complex64] {
        let d = self.waves.dim();
        &self.coeffs[i * d..(i + 1) * d]
    }

    pub fn coeff_mut(&mut self, i: usize) -> &mut [Complex64] {
        let d = self.waves.dim();
        &mut self.coeffs[i * d..(i + 1) * d]
    }

    /// Sets `û(k) = c` and `û(−k) = conj(c)`.
    pub fn set_mode(&mut self, k: &[i64], c: &[Complex64]) -> Result<()> {
        let i = self
            .waves
            .index_of(k)
            .ok_or_else(|| Error::arg(format!("wavevector {k:?} is outside the truncation")))?;
        if c.len() != self.waves.dim() {
            return Err(Error::arg("mode coefficient has the wrong dimension"));
        }
        let j = self.waves.negation(i);
        self.coeff_mut(i).copy_from_slice(c);
        for (dst, src) in self.coeff_mut(j).iter_mut().zip(c) {
            *dst = src.conj();
        }
        Ok(())
    }

    /// Adds `amp · sin(k·x)` in direction `dir`.
    pub fn add_sine(&mut self, k: &[i64], dir: &[f64], amp: f64) -> Result<()> {
        self.add_trig(k, dir, Complex64::new(0.0, -0.5 * amp))
    }

    /// Adds `amp · cos(k·x)` in direction `dir`.
    pub fn add_cosine(&mut self, k: &[i64], dir: &[f64], amp: f64) -> Result<()> {
        self.add_trig(k, dir, Complex64::new(0.5 * amp, 0.0))
    }

    fn add_trig(&mut self, k: &[i64], dir: &[f64], c: Complex64) -> Result<()> {
        let i = self
            .waves
            .index_of(k)
            .ok_or_else(|| Error::arg(format!("wavevector {k:?} is outside the truncation")))?;
        let j = self.waves.negation(i);
        for a in 0..self.waves.dim() {
            self.coeffs[i * self.waves.dim() + a] += c * dir[a];
            self.coeffs[j * self.waves.dim() + a] += c.conj() * dir[a];
        }
        Ok(())
    }

    /// `Σ_k |û(k)|²`, the mean square of the field over the torus.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `Re Σ_k û(k) · conj(v̂(k))`.
    pub fn inner(&self, other: &FourierField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// `max_k |k · û(k)|`.
    pub fn max_divergence(&self) -> f64 {
        (0..self.waves.len())
            .map(|i| {
                self.waves
                    .vector(i)
                    .iter()
                    .zip(self.coeff(i))
                    .map(|(k, c)| c * *k as f64)
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |û(−k) − conj(û(k))|`.
    pub fn reality_defect(&self) -> f64 {
        (0..self.waves.len())
            .map(|i| {
                let j = self.waves.negation(i);
                self.coeff(i)
                    .iter()
                    .zip(self.coeff(j))
                    .map(|(a, b)| (a.conj() - b).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> FourierField {
        FourierField {
            waves: Arc::clone(&self.waves),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &FourierField) -> Result<FourierField> {
        check_same(self, other)?;
        Ok(FourierField {
            waves: Arc::clone(&self.waves),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &FourierField) -> Result<FourierField> {
        check_same(self, other)?;
        Ok(FourierField {
            waves: Arc::clone(&self.waves),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// Multiplies `û(k)` by `|k|^{2s}`, i.e. applies `A^s` for the Stokes operator.
    pub fn stokes_power(&self, s: f64) -> FourierField {
        let mut out = self.clone();
        for i in 0..self.waves.len() {
            let f = self.waves.norm_sq(i).powf(s);
            for c in out.coeff_mut(i) {
                *c *= f;
            }
        }
        out
    }

    /// CSV with columns `k1..kd, re_1..re_d, im_1..im_d`, one row per wavevector.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.waves.dim();
        let mut header: Vec<String> = (1..=d).map(|c| format!("k{c}")).collect();
        header.extend((1..=d).map(|c| format!("re_{c}")));
        header.extend((1..=d).map(|c| format!("im_{c}")));
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.waves.len() {
            let mut row: Vec<String> = self.waves.vector(i).iter().map(|k| k.to_string()).collect();
            row.extend(self.coeff(i).iter().map(|c| csv_fmt(c.re)));
            row.extend(self.coeff(i).iter().map(|c| csv_fmt(c.im)));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads rows written by [`FourierField::write_csv`]; wavevectors absent from the file are zero.
    pub fn read_csv<R: BufRead>(waves: &Arc<WaveSet>, input: R) -> Result<FourierField> {
        let d = waves.dim();
        let mut field = FourierField::zeros(waves);
        let mut seen_header = false;
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if !seen_header {
                if fields.len() != 3 * d || fields[0] != "k1" {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected a header with {} columns", 3 * d),
                    });
                }
                seen_header = true;
                continue;
            }
            if fields.len() != 3 * d {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {} fields, found {}", 3 * d, fields.len()),
                });
            }
            let bad = |f: &str| Error::Parse {
                line: lineno,
                message: format!("`{f}` is not a number"),
            };
            let k: Vec<i64> = fields[..d]
                .iter()
                .map(|f| f.parse().map_err(|_| bad(f)))
                .collect::<Result<_>>()?;
            let nums: Vec<f64> = fields[d..]
                .iter()
                .map(|f| f.parse().map_err(|_| bad(f)))
                .collect::<Result<_>>()?;
            let idx = waves.index_of(&k).ok_or(Error::Parse {
                line: lineno,
                message: format!("wavevector {k:?} is outside the truncation"),
            })?;
            for a in 0..d {
                field.coeff_mut(idx)[a] = Complex64::new(nums[a], nums[d + a]);
            }
        }
        Ok(field)
    }
}

fn check_same(a: &FourierField, b: &FourierField) -> Result<()> {
    if !Arc::ptr_eq(&a.waves, &b.waves) && a.waves != b.waves {
        return Err(Error::arg("fields live on different wavevector sets"));
    }
    Ok(())
}

/// `û(k) ← (I − k kᵀ / |k|²) û(k)`.
pub fn leray_project(f: &FourierField) -> FourierField {
    let mut out = f.clone();
    let d = f.waves.dim();
    for i in 0..f.waves.len() {
        let k = f.waves.vector(i);
        let k2 = f.waves.norm_sq(i);
        let c = out.coeff_mut(i);
        let dot: Complex64 = (0..d).map(|a| c[a] * k[a] as f64).sum();
        for a in 0..d {
            c[a] -= dot * (k[a] as f64 / k2);
        }
    }
    out
}

/// Galerkin truncation of `P(u · ∇v)`: `Σ_{p+q=k} (û(p) · i q) v̂(q)`, then Leray projection.
pub fn ns_bilinear(u: &FourierField, v: &FourierField) -> Result<FourierField> {
    check_same(u, v)?;
    let waves = &u.waves;
    let d = waves.dim();
    let mut out = FourierField::zeros(waves);
    let i_unit = Complex64::new(0.0, 1.0);
    for k in 0..waves.len() {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for &(p, q) in &waves.pairs[k] {
            let qv = waves.vector(q);
            let up = u.coeff(p);
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..d {
                s += up[a] * qv[a] as f64;
            }
            let s = s * i_unit;
            let vq = v.coeff(q);
            for a in 0..d {
                acc[a] += s * vq[a];
            }
        }
        out.coeff_mut(k).copy_from_slice(&acc[..d]);
    }
    Ok(leray_project(&out))
}

/// `P((∇u)ᵀ z)`, the adjoint of `w ↦ B(w, u)`: `⟨B(w, u), z⟩ = ⟨w, P((∇u)ᵀ z)⟩` for
/// divergence-free `w`.
pub fn ns_bilinear_adjoint(u: &FourierField, z: &FourierField) -> Result<FourierField> {
    check_same(u, z)?;
    let waves = &u.waves;
    let d = waves.dim();
    let mut out = FourierField::zeros(waves);
    let i_unit = Complex64::new(0.0, 1.0);
    for k in 0..waves.len() {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for &(p, q) in &waves.pairs[k] {
            let qv = waves.vector(q);
            let (zp, uq) = (z.coeff(p), u.coeff(q));
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..d {
                s += zp[b] * uq[b];
            }
            let s = s * i_unit;
            for a in 0..d {
                acc[a] += s * qv[a] as f64;
            }
        }
        out.coeff_mut(k).copy_from_slice(&acc[..d]);
    }
    Ok(leray_project(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(waves: &Arc<WaveSet>, rng: &mut ChaCha8Rng) -> FourierField {
        let mut f = FourierField::zeros(waves);
        for i in 0..waves.len() {
            let j = waves.negation(i);
            if j < i {
                continue;
            }
            let c: Vec<Complex64> = (0..waves.dim())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            f.set_mode(waves.vector(i), &c).unwrap();
        }
        leray_project(&f)
    }

    #[test]
    fn leray_examples() {
        let waves = WaveSet::new(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // gradient field: û(k) = i k p̂(k)
        let mut g = FourierField::zeros(&waves);
        for i in 0..waves.len() {
            let j = waves.negation(i);
            if j < i {
                continue;
            }
            let p = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let k = waves.vector(i).to_vec();
            let c: Vec<Complex64> = k.iter().map(|kc| Complex64::new(0.0, *kc as f64) * p).collect();
            g.set_mode(&k, &c).unwrap();
        }
        assert!(leray_project(&g).norm() < 1e-14 * g.norm());

        let u = random_field(&waves, &mut rng);
        assert!(u.max_divergence() < 1e-14);
        let once = leray_project(&u);
        assert!(once.sub(&u).unwrap().norm() <= 1e-15 * u.norm());
        let f = random_field(&waves, &mut rng).add(&g).unwrap();
        let p1 = leray_project(&f);
        assert!(leray_project(&p1).sub(&p1).unwrap().norm() <= 1e-15 * p1.norm());
    }

    #[test]
    fn adjoint_pairs_with_bilinear() {
        let waves = WaveSet::new(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (w, u, z) = (
            random_field(&waves, &mut rng),
            random_field(&waves, &mut rng),
            random_field(&waves, &mut rng),
        );
        let lhs = ns_bilinear(&w, &u).unwrap().inner(&z);
        let rhs = w.inner(&ns_bilinear_adjoint(&u, &z).unwrap());
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn bilinear_truncation_and_orthogonality() {
        let waves = WaveSet::new(2, 2).unwrap();
        let mut u = FourierField::zeros(&waves);
        u.add_sine(&[2, 0], &[0.0, 1.0], 1.0).unwrap();
        let mut v = FourierField::zeros(&waves);
        v.add_sine(&[0, 2], &[1.0, 0.0], 1.0).unwrap();
        // every output wavevector (±2, ±2) lies outside |k| ≤ 2
        assert_eq!(ns_bilinear(&u, &v).unwrap().norm(), 0.0);

        let waves = WaveSet::new(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let u = random_field(&waves, &mut rng);
            let b = ns_bilinear(&u, &u).unwrap();
            assert!(b.inner(&u).abs() <= 1e-10 * u.norm().powi(3));
            assert!(b.reality_defect() < 1e-12);
        }
    }

    #[test]
    fn hand_computed_products() {
        let waves = WaveSet::new(2, 2).unwrap();
        // Taylor–Green (sin x cos y, −cos x sin y): advection is a pure gradient
        let mut tg = FourierField::zeros(&waves);
        tg.add_sine(&[1, 1], &[0.5, -0.5], 1.0).unwrap();
        tg.add_sine(&[1, -1], &[0.5, 0.5], 1.0).unwrap();
        assert!(tg.max_divergence() < 1e-15);
        assert!(ns_bilinear(&tg, &tg).unwrap().norm() < 1e-15);

        // (0, sin x) · ∇ (sin y, 0) = (sin x cos y, 0), projected to ½ (sin x cos y, −cos x sin y)
        let mut u = FourierField::zeros(&waves);
        u.add_sine(&[1, 0], &[0.0, 1.0], 1.0).unwrap();
        let mut v = FourierField::zeros(&waves);
        v.add_sine(&[0, 1], &[1.0, 0.0], 1.0).unwrap();
        let b = ns_bilinear(&u, &v).unwrap();
        let want = tg.scaled(0.5);
        assert!(b.sub(&want).unwrap().norm() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let waves = WaveSet::new(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_field(&waves, &mut rng);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k1,k2,re_1,re_2,im_1,im_2\n"));
        assert_eq!(FourierField::read_csv(&waves, buf.as_slice()).unwrap(), u);
        let bad = "k1,k2,re_1,re_2,im_1,im_2\n1,0,0,0,0\n";
        assert!(matches!(
            FourierField::read_csv(&waves, bad.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
