//! Sampling audits of the structural inequalities on `Q` and `F` against a `ProblemSpec`'s declared
//! constants, and finite-difference checks of the declared derivatives.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub, OperatorValue};
use crate::mild::ProblemSpec;

/// Relative slack allowed for floating-point rounding in the audited inequalities.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct AuditCheck {
    pub name: &'static str,
    /// The inequality in words.
    pub statement: &'static str,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `1 − lhs/rhs` over samples with `rhs > 0`; `None` if every sample was trivial.
    pub worst_margin: Option<f64>,
    /// `(lhs, rhs)` at the worst sample.
    pub worst: (f64, f64),
    /// Sample vectors at the worst margin, labelled.
    pub witness: Vec<(&'static str, Vec<f64>)>,
}

impl AuditCheck {
    fn new(name: &'static str, statement: &'static str) -> Self {
        Self {
            name,
            statement,
            samples: 0,
            violations: 0,
            worst_margin: None,
            worst: (0.0, 0.0),
            witness: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, lhs: f64, rhs: f64, witness: impl FnOnce() -> Vec<(&'static str, Vec<f64>)>) {
        self.samples += 1;
        let ok = lhs.is_finite() && lhs <= rhs * (1.0 + ROUNDING_SLACK);
        if !ok {
            self.violations += 1;
        }
        let margin = if rhs > 0.0 {
            1.0 - lhs / rhs
        } else if lhs == 0.0 {
            return;
        } else {
            f64::NEG_INFINITY
        };
        if self.worst_margin.is_none_or(|m| margin < m) {
            self.worst_margin = Some(margin);
            self.worst = (lhs, rhs);
            self.witness = witness();
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(AuditCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let margin = c.worst_margin.map_or("trivial".to_string(), |m| format!("{m:.3e}"));
            writeln!(
                f,
                "{:<14} {} violations={}/{} worst_margin={} lhs={:.6e} rhs={:.6e}",
                c.name,
                if c.passed() { "PASS" } else { "FAIL" },
                c.violations,
                c.samples,
                margin,
                c.worst.0,
                c.worst.1
            )?;
        }
        Ok(())
    }
}

/// Random `x` with `‖A^δ x‖` log-uniform in `[1e-2, 10]` and a flat `A^δ` spectrum.
fn sample_state(spec: &ProblemSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let delta = spec.exponents.delta;
    let mut x: Vec<f64> = spec
        .op
        .eigenvalues()
        .iter()
        .map(|l| {
            let g: f64 = StandardNormal.sample(rng);
            g * l.powf(-delta)
        })
        .collect();
    let r = 10f64.powf(rng.random_range(-2.0..1.0));
    let n = spec.op.frac_norm(delta, &x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v *= r / n);
    }
    x
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)).collect()
}

fn powered(spec: &ProblemSpec, m: &OperatorValue, s: f64) -> OperatorValue {
    let mut out = m.clone();
    let f: Vec<f64> = spec.op.eigenvalues().iter().map(|l| l.powf(s)).collect();
    out.scale_rows(&f);
    out
}

/// Samples random states and checks every declared inequality of `spec`.
///
/// Checks, with `ε = ε_F` and the declared `K₁`, `K₂` and noise constants:
/// `lip-q` `‖Q(x) − Q(y)‖ ≤ K₁(‖A^δx‖ + ‖A^δy‖) ‖A^δ(x − y)‖`, `bound-q` `‖Q(x)‖ ≤ K₂(‖A^δx‖)`,
/// `bound-dq` `‖DQ(x)ξ‖ ≤ K₁(‖A^δx‖) ‖A^δξ‖`, `cond1`, `cond2`, `consequence1`,
/// `consequence2` `‖A^{δ+ε}F(x)ξ‖ ≤ (l2 ‖A^δx‖ + b0) ‖ξ‖`, `bound-df`, `lip-df`.
pub fn condition_audit(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<AuditReport> {
    if samples == 0 {
        return Err(Error::arg("audit needs at least one sample"));
    }
    let delta = spec.exponents.delta;
    let eps = spec.eps_f();
    let n = spec.dim();
    let m = spec.f.noise_dim();
    let c = &spec.constants;
    let nc = &c.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut lip_q = AuditCheck::new("lip-q", "|Q(x)-Q(y)| <= K1(|A^d x|+|A^d y|) |A^d (x-y)|");
    let mut bound_q = AuditCheck::new("bound-q", "|Q(x)| <= K2(|A^d x|)");
    let mut bound_dq = AuditCheck::new("bound-dq", "|DQ(x)xi| <= K1(|A^d x|) |A^d xi|");
    let mut cond1 = AuditCheck::new("cond1", "|A^e [F(x)-F(y)]|_HS <= l1 |x-y|");
    let mut cond2 = AuditCheck::new("cond2", "|A^(d+e) [F(x)-F(y)]|_HS <= l2 |A^d (x-y)|");
    let mut cons1 = AuditCheck::new("consequence1", "|A^e [F(x)-F(y)] z| <= l1 |x-y| |z|");
    let mut cons2 = AuditCheck::new("consequence2", "|A^(d+e) F(x) z| <= (l2 |A^d x| + b0) |z|");
    let mut bound_df = AuditCheck::new("bound-df", "|D A^e F(x) y|_HS <= d1 |y|");
    let mut lip_df = AuditCheck::new("lip-df", "|D A^e F(x) y - D A^e F(x') y|_HS <= d2 |x-x'| |y|");

    for i in 0..samples {
        let x = sample_state(spec, &mut rng);
        // every third pair is a small perturbation to probe local constants
        let y = if i % 3 == 0 {
            let p = sample_state(spec, &mut rng);
            let s = 1e-3 * rng.random_range(0.1..1.0);
            x.iter().zip(&p).map(|(a, b)| a + s * b).collect()
        } else {
            sample_state(spec, &mut rng)
        };
        let xi = sample_state(spec, &mut rng);
        let z = gaussian(m, &mut rng);
        let d = sub(&x, &y);
        let (ax, ay, ad, axi) = (
            spec.op.frac_norm(delta, &x),
            spec.op.frac_norm(delta, &y),
            spec.op.frac_norm(delta, &d),
            spec.op.frac_norm(delta, &xi),
        );

        if !spec.q.is_zero() {
            let qx = spec.q.eval(&x);
            let qy = spec.q.eval(&y);
            lip_q.record(norm(&sub(&qx, &qy)), c.k1.eval(ax + ay) * ad, || {
                vec![("x", x.clone()), ("y", y.clone())]
            });
            bound_q.record(norm(&qx), c.k2.eval(ax), || vec![("x", x.clone())]);
            bound_dq.record(norm(&spec.q.derivative(&x, &xi)), c.k1.eval(ax) * axi, || {
                vec![("x", x.clone()), ("xi", xi.clone())]
            });
        }

        let fx = spec.f.eval(&x);
        let fy = spec.f.eval(&y);
        let diff = fx.sub(&fy);
        let de = powered(spec, &diff, eps);
        let dde = powered(spec, &diff, delta + eps);
        cond1.record(de.hilbert_schmidt(), nc.l1 * norm(&d), || {
            vec![("x", x.clone()), ("y", y.clone())]
        });
        cond2.record(dde.hilbert_schmidt(), nc.l2 * ad, || {
            vec![("x", x.clone()), ("y", y.clone())]
        });
        cons1.record(norm(&de.apply(&z)), nc.l1 * norm(&d) * norm(&z), || {
            vec![("x", x.clone()), ("y", y.clone()), ("z", z.clone())]
        });
        let fxe = powered(spec, &fx, delta + eps);
        cons2.record(norm(&fxe.apply(&z)), (nc.l2 * ax + nc.b0) * norm(&z), || {
            vec![("x", x.clone()), ("z", z.clone())]
        });

        let dir = gaussian(n, &mut rng);
        let dfx = powered(spec, &spec.f.derivative(&x, &dir), eps);
        bound_df.record(dfx.hilbert_schmidt(), nc.d1 * norm(&dir), || {
            vec![("x", x.clone()), ("y", dir.clone())]
        });
        let dfy = powered(spec, &spec.f.derivative(&y, &dir), eps);
        lip_df.record(dfx.sub(&dfy).hilbert_schmidt(), nc.d2 * norm(&d) * norm(&dir), || {
            vec![("x", x.clone()), ("x'", y.clone()), ("y", dir.clone())]
        });
    }

    Ok(AuditReport {
        checks: vec![lip_q, bound_q, bound_dq, cond1, cond2, cons1, cons2, bound_df, lip_df],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub steps: Vec<f64>,
    /// `|central difference − directional derivative|` per step.
    pub errors: Vec<f64>,
    /// Errors at or below this level are indistinguishable from rounding, per step.
    pub floors: Vec<f64>,
    /// Smallest observed order over consecutive steps whose errors both clear the floor;
    /// infinite when every error is at rounding level (the difference quotient is exact).
    pub order: f64,
}

pub const FD_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

fn order_from(steps: &[f64], errors: &[f64], floors: &[f64]) -> f64 {
    if errors.iter().zip(floors).all(|(e, f)| e <= f) {
        return f64::INFINITY;
    }
    let mut order = f64::NAN;
    for i in 0..steps.len() - 1 {
        if errors[i] > floors[i] && errors[i + 1] > floors[i + 1] {
            let o = (errors[i] / errors[i + 1]).ln() / (steps[i] / steps[i + 1]).ln();
            order = if order.is_nan() { o } else { order.min(o) };
        }
    }
    order
}

fn central_check(f: impl Fn(f64) -> f64, exact: f64) -> DerivativeCheck {
    let mut errors = Vec::new();
    let mut floors = Vec::new();
    for &h in &FD_STEPS {
        let (p, m) = (f(h), f(-h));
        errors.push(((p - m) / (2.0 * h) - exact).abs());
        floors.push(100.0 * f64::EPSILON * p.abs().max(m.abs()) / h);
    }
    let order = order_from(&FD_STEPS, &errors, &floors);
    DerivativeCheck {
        steps: FD_STEPS.to_vec(),
        errors,
        floors,
        order,
    }
}

/// Central differences of `h ↦ ⟨Q(x + hξ), z⟩` against `⟨DQ(x)ξ, z⟩`.
pub fn derivative_check_q(spec: &ProblemSpec, x: &[f64], xi: &[f64], z: &[f64]) -> Result<DerivativeCheck> {
    let n = spec.dim();
    if x.len() != n || xi.len() != n || z.len() != n {
        return Err(Error::arg("derivative check vectors must match the spec dimension"));
    }
    let exact = dot(&spec.q.derivative(x, xi), z);
    Ok(central_check(
        |h| {
            let p: Vec<f64> = x.iter().zip(xi).map(|(a, b)| a + h * b).collect();
            dot(&spec.q.eval(&p), z)
        },
        exact,
    ))
}

/// Central differences of `h ↦ ⟨⟨A^ε F(x + hy), Ξ⟩⟩` against `⟨⟨A^ε DF(x) y, Ξ⟩⟩`.
pub fn derivative_check_f(spec: &ProblemSpec, x: &[f64], y: &[f64], probe: &OperatorValue) -> Result<DerivativeCheck> {
    let n = spec.dim();
    if x.len() != n || y.len() != n || probe.rows() != n || probe.cols() != spec.f.noise_dim() {
        return Err(Error::arg("derivative check shapes must match the spec"));
    }
    let eps = spec.eps_f();
    let exact = powered(spec, &spec.f.derivative(x, y), eps).hs_inner(probe);
    Ok(central_check(
        |h| {
            let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + h * b).collect();
            powered(spec, &spec.f.eval(&p), eps).hs_inner(probe)
        },
        exact,
    ))
}

/// Random derivative checks for both `Q` and `F` at a moderate state; returns `(dq, df)`.
pub fn derivative_checks(spec: &ProblemSpec, seed: u64) -> Result<(DerivativeCheck, DerivativeCheck)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.dim();
    let m = spec.f.noise_dim();
    let mut x = sample_state(spec, &mut rng);
    let s = spec.op.frac_norm(spec.exponents.delta, &x);
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
    let xi = gaussian(n, &mut rng);
    let z = gaussian(n, &mut rng);
    let probe = OperatorValue::from_row_major(n, m, gaussian(n * m, &mut rng))?;
    Ok((derivative_check_q(spec, &x, &xi, &z)?, derivative_check_f(spec, &x, &xi, &probe)?))
}

/// Largest sampled `‖Q(x)‖ / ‖A^δ x‖²`, refined by a random local search from the best samples.
pub fn fit_quadratic_constant(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::arg("need at least one sample"));
    }
    let delta = spec.exponents.delta;
    let ratio = |x: &[f64]| {
        let r = spec.op.frac_norm(delta, x);
        if r == 0.0 {
            0.0
        } else {
            norm(&spec.q.eval(x)) / (r * r)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scored: Vec<(f64, Vec<f64>)> = (0..samples)
        .map(|_| {
            let x = sample_state(spec, &mut rng);
            (ratio(&x), x)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0].0;
    for (r0, x0) in scored.into_iter().take(5) {
        let (mut r, mut x) = (r0, x0);
        let mut step = 0.3;
        for _ in 0..300 {
            let scale = spec.op.frac_norm(delta, &x);
            let p = sample_state(spec, &mut rng);
            let ps = spec.op.frac_norm(delta, &p);
            if ps == 0.0 {
                continue;
            }
            let cand: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + step * scale / ps * b).collect();
            let rc = ratio(&cand);
            if rc > r {
                r = rc;
                x = cand;
            } else {
                step *= 0.98;
            }
        }
        best = best.max(r);
    }
    Ok(best)
}
