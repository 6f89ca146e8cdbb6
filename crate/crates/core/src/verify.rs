//! Invariant suites run by `rough-mild verify`. Every check is deterministic and sized to
//! finish in seconds.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::convolve::{bochner_bound_check, ConvolutionPlan};
use crate::error::{Error, Result};
use crate::linalg::{dist, norm, OperatorValue};
use crate::mild::{continue_solution, picard_solve, picard_solve_from, MildMap};
use crate::models::{
    condition_audit, derivative_checks, energy_defect, make_heat_model, single_mode_square_coefficient,
    sobolevski_check, HeatParams, StokesBasis,
};
use crate::paths::{fbm_generate, holder_norm, GridWindow, SampledPath};
use crate::spectral::{smoothing_constant, SpectralOperator};
use crate::young::{young_integral, young_loeve_bound, young_remainder, OperatorPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Spectral,
    Young,
    Convolve,
    Mild,
    Models,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "young" => Ok(Self::Young),
            "convolve" => Ok(Self::Convolve),
            "mild" => Ok(Self::Mild),
            "models" => Ok(Self::Models),
            "all" => Ok(Self::All),
            _ => Err(format!(
                "unknown suite `{s}` (expected spectral, young, convolve, mild, models or all)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.detail
        )
    }
}

struct Collector {
    suite: &'static str,
    out: Vec<CheckResult>,
}

impl Collector {
    fn new(suite: &'static str) -> Self {
        Self { suite, out: Vec::new() }
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.out.push(CheckResult {
            suite: self.suite,
            name,
            passed,
            detail,
        });
    }

    /// Records a check whose setup may fail; a setup error counts as a failure.
    fn run(&mut self, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) {
        match f() {
            Ok((ok, detail)) => self.push(name, ok, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

fn random_spectrum(rng: &mut ChaCha8Rng, n: usize) -> SpectralOperator {
    let mut l: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(0.0..4.0))).collect();
    l.sort_by(f64::total_cmp);
    SpectralOperator::new(l).expect("positive spectrum")
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Setup errors shared by several checks are reported by each of them.
fn shared(e: &Error) -> Error {
    Error::Internal(e.to_string())
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    dist(a, b) / norm(b).max(f64::MIN_POSITIVE)
}

pub fn spectral_suite() -> Vec<CheckResult> {
    let mut c = Collector::new("spectral");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ops: Vec<SpectralOperator> = (0..10).map(|_| random_spectrum(&mut rng, 32)).collect();
    let times: Vec<f64> = (0..12).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect();

    c.run("sharp-bound", || {
        let mut bad = 0;
        for op in &ops {
            for e in [0.0, 0.25, 0.5, 0.75, 1.0] {
                for &t in &times {
                    if op.operator_bound(e, t)? > smoothing_constant(e, t) * (1.0 + 1e-12) {
                        bad += 1;
                    }
                }
            }
        }
        Ok((bad == 0, format!("{bad} cases with |A^e P_t| above (e/(et))^e")))
    });

    c.run("regularity", || {
        let worst = ops
            .iter()
            .flat_map(|op| times.iter().flat_map(move |&t| [0.25, 0.5, 1.0].map(|e| op.regularity_excess(e, t))))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok((worst <= 1e-15, format!("largest (1 - e^(-lt)) - (lt)^e = {worst:.3e}")))
    });

    c.run("semigroup-law", || {
        let mut worst = 0.0f64;
        for op in &ops {
            let x = random_vec(&mut rng, op.dim());
            let (s, t) = (rng.random_range(0.0..0.1), rng.random_range(0.0..0.1));
            let two = op.semigroup_apply(s, &op.semigroup_apply(t, &x)?.0)?;
            let one = op.semigroup_apply(s + t, &x)?;
            worst = worst.max(rel(&two.0, &one.0));
        }
        Ok((worst <= 1e-12, format!("max |P_s P_t x - P_(s+t) x| / |P_(s+t) x| = {worst:.2e}")))
    });

    c.run("contraction", || {
        let mut bad = 0;
        for op in &ops {
            let x = random_vec(&mut rng, op.dim());
            for &t in &times {
                if norm(&op.semigroup_apply(t, &x)?.0) > norm(&x) {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, format!("{bad} cases with |P_t x| > |x|")))
    });
    c.out
}

pub fn young_suite() -> Vec<CheckResult> {
    let mut c = Collector::new("young");
    let n = 256;

    c.run("linearity", || {
        let w = fbm_generate(0.75, n, 1.0, 2, 21)?;
        let f = fbm_generate(0.75, n, 1.0, 1, 22)?;
        let g = fbm_generate(0.75, n, 1.0, 1, 23)?;
        let op = |p: &SampledPath| {
            OperatorPath::from_fn(1.0, n, |t| {
                let j = (t * n as f64).round() as usize;
                OperatorValue::from_row_major(1, 2, vec![p.value(j)[0], 2.0 * p.value(j)[0]]).expect("1x2")
            })
        };
        let (fo, go) = (op(&f)?, op(&g)?);
        let combo = op(&f.scaled(2.0).add(&g.scaled(-3.0))?)?;
        let win = w.full_window();
        let lhs = young_integral(&combo, &w, win)?;
        let a = young_integral(&fo, &w, win)?;
        let b = young_integral(&go, &w, win)?;
        let rhs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
        let err = rel(&lhs, &rhs);
        Ok((err <= 1e-12, format!("relative defect {err:.2e}")))
    });

    c.run("additivity", || {
        let w = fbm_generate(0.75, n, 1.0, 1, 24)?;
        let f = OperatorPath::from_column_path(&fbm_generate(0.75, n, 1.0, 1, 25)?);
        let whole = young_integral(&f, &w, GridWindow::new(10, 200))?[0];
        let parts = young_integral(&f, &w, GridWindow::new(10, 77))?[0] + young_integral(&f, &w, GridWindow::new(77, 200))?[0];
        let err = (whole - parts).abs();
        Ok((err <= 1e-12 * whole.abs().max(1.0), format!("|I(s,u) - I(s,t) - I(t,u)| = {err:.2e}")))
    });

    c.run("loeve-containment", || {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let (mut bad, mut worst) = (0, 0.0f64);
        for i in 0..30 {
            let f = fbm_generate(0.85, n, 1.0, 1, 2600 + 2 * i)?;
            let w = fbm_generate(0.85, n, 1.0, 1, 2601 + 2 * i)?;
            let a = rng.random_range(0..n - 1);
            let b = rng.random_range(a + 1..=n);
            let win = GridWindow::new(a, b);
            let fh = holder_norm(&f, 0.75, win)?.value;
            let wh = holder_norm(&w, 0.75, win)?.value;
            let lhs = young_remainder(&OperatorPath::from_column_path(&f), &w, win)?;
            let rhs = young_loeve_bound(fh, 0.75, wh, 0.75, f.time(a), f.time(b))?;
            if lhs > rhs {
                bad += 1;
            }
            if rhs > 0.0 {
                worst = worst.max(lhs / rhs);
            }
        }
        Ok((bad == 0, format!("{bad} violations in 30 pairs, worst remainder/bound {worst:.3}")))
    });

    c.run("chain-rule", || {
        let w = fbm_generate(0.75, 4096, 1.0, 1, 27)?;
        let i = young_integral(&OperatorPath::from_column_path(&w), &w, w.full_window())?[0];
        let err = (i - 0.5 * w.last()[0].powi(2)).abs();
        Ok((err < 1e-2, format!("|int w dw - w_1^2/2| = {err:.3e}")))
    });
    c.out
}

pub fn convolve_suite() -> Vec<CheckResult> {
    let mut c = Collector::new("convolve");
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let modes = 16;
    let n = 256;

    c.run("two-route", || {
        let plan = ConvolutionPlan::new(SpectralOperator::dirichlet_laplacian(modes)?, 0.25, n, 1.0)?;
        let g = SampledPath::from_fn(1.0, n, modes, |_| random_vec(&mut rng, modes))?;
        let rec = plan.convolution_path(&g)?;
        let mut worst = 0.0f64;
        for m in 0..=n {
            worst = worst.max(dist(rec.value(m), &plan.singular_convolution_at(&g, m)?.0));
        }
        Ok((worst < 1e-10, format!("recursion vs direct sum {worst:.2e}")))
    });

    c.run("constant-integrand", || {
        let tau = 0.5;
        let op = SpectralOperator::dirichlet_laplacian(modes)?;
        let plan = ConvolutionPlan::new(op.clone(), tau, n, 1.0)?;
        let g0 = random_vec(&mut rng, modes);
        let g = SampledPath::from_fn(1.0, n, modes, |_| g0.clone())?;
        let got = plan.convolution_path(&g)?;
        // ∫₀ᵗ A^τ e^{−(t−r)A} g dr = A^{τ−1}(1 − e^{−tA}) g
        let exact: Vec<f64> = op
            .eigenvalues()
            .iter()
            .zip(&g0)
            .map(|(l, v)| l.powf(tau - 1.0) * -(-l).exp_m1() * v)
            .collect();
        let err = rel(got.last(), &exact);
        Ok((err < 1e-12, format!("relative error at t = 1: {err:.2e}")))
    });

    c.run("bochner-shape", || {
        let plan = ConvolutionPlan::new(SpectralOperator::dirichlet_laplacian(8)?, 0.5, 2048, 1.0)?;
        let g = SampledPath::from_fn(1.0, 2048, 8, |_| random_vec(&mut rng, 8))?;
        let sup = (0..=2048).map(|j| norm(g.value(j))).fold(0.0, f64::max);
        let rep = bochner_bound_check(&plan, &g, sup)?;
        Ok((
            !rep.violation && rep.fitted_exponent >= 0.4,
            format!(
                "constant {:.3} (sharp {:.3}), exponent {:.3}",
                rep.constant, rep.sharp_constant, rep.fitted_exponent
            ),
        ))
    });
    c.out
}

pub fn mild_suite() -> Vec<CheckResult> {
    let mut c = Collector::new("mild");
    let tol = 1e-10;

    c.run("logistic-closed-form", || {
        let p = HeatParams {
            modes: 1,
            reaction: 1.0 / single_mode_square_coefficient(),
            noise_amp: 0.0,
            u0_amp: 0.5,
            n_cells: 512,
            horizon: 0.5,
            ..HeatParams::default()
        };
        let spec = make_heat_model(&p)?;
        let (sol, _) = picard_solve(&spec, 0.5, 1e-12, 200)?;
        let mut worst = 0.0f64;
        for j in 0..=sol.path.n_cells() {
            let e = (-sol.path.time(j)).exp();
            let exact = 0.5 * e / (1.0 + 0.5 * (1.0 - e));
            worst = worst.max((sol.path.value(j)[0] - exact).abs() / exact);
        }
        Ok((worst < 1e-4, format!("max relative error {worst:.2e} against u' = -u - u^2")))
    });

    let heat = make_heat_model(&HeatParams {
        n_cells: 256,
        horizon: 0.5,
        ..HeatParams::default()
    });
    c.run("residual", || {
        let spec = heat.as_ref().map_err(shared)?;
        let (_, rep) = picard_solve(spec, 0.5, tol, 200)?;
        Ok((rep.residual < 10.0 * tol, format!("residual {:.2e} after {} iterations", rep.residual, rep.iterations)))
    });

    c.run("uniqueness", || {
        let spec = heat.as_ref().map_err(shared)?;
        let (a, _) = picard_solve(spec, 0.5, tol, 200)?;
        let map = MildMap::new(spec, 0.5)?;
        let (b, _) = picard_solve_from(spec, 0.5, tol, 200, map.frozen_initial())?;
        let gap = map.norm(&a.path.sub(&b.path)?).total;
        Ok((gap < 10.0 * tol, format!("distance between fixed points from two starts {gap:.2e}")))
    });

    c.run("continuation", || {
        let spec = heat.as_ref().map_err(shared)?;
        let (sol, reps) = continue_solution(spec, 2, 0.25, tol, 200)?;
        let (whole, _) = picard_solve(spec, 0.25, tol, 200)?;
        let err = dist(sol.path.value(128), whole.path.last());
        Ok((
            reps.len() == 2 && err < 1e-12 && reps.iter().all(|r| r.converged),
            format!("joint mismatch {err:.2e}, segments converged: {}", reps.iter().all(|r| r.converged)),
        ))
    });
    c.out
}

fn models_suite(config: &RunConfig) -> Vec<CheckResult> {
    let mut c = Collector::new("models");
    let spec = config.build_spec();

    c.run("condition-audit", || {
        let spec = spec.as_ref().map_err(shared)?;
        let report = condition_audit(spec, 200, config.seed)?;
        let mut detail = format!("{} model, {} checks", config.model, report.checks.len());
        for f in report.failures() {
            let witness = f
                .witness
                .iter()
                .map(|(k, v)| format!("|{k}| = {:.4e}", norm(v)))
                .collect::<Vec<_>>()
                .join(", ");
            detail.push_str(&format!(
                "; {} violated ({}): {}/{} samples, lhs {:.6e} > rhs {:.6e}, witness {witness}",
                f.name, f.statement, f.violations, f.samples, f.worst.0, f.worst.1
            ));
        }
        Ok((report.passed(), detail))
    });

    c.run("derivatives", || {
        let spec = spec.as_ref().map_err(shared)?;
        let (dq, df) = derivative_checks(spec, config.seed)?;
        let ok = dq.order >= 1.8 && df.order >= 1.8;
        Ok((ok, format!("DQ order {:.3}, DF order {:.3}", dq.order, df.order)))
    });

    c.run("ns-structure", || {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let mut worst = 0.0f64;
        for dim in [2, 3] {
            let basis = StokesBasis::new(dim, 3)?;
            for _ in 0..10 {
                let x = random_vec(&mut rng, basis.dim());
                worst = worst.max(energy_defect(&basis, &x));
            }
        }
        Ok((worst <= 1e-10, format!("max <B(u,u),u>/|u|^3 = {worst:.2e}")))
    });

    c.run("sobolevski", || {
        let basis = StokesBasis::new(2, 4)?;
        let a = sobolevski_check(&basis, 200, 52)?;
        let b = sobolevski_check(&basis, 200, 53)?;
        let spread = (a.estimate - b.estimate).abs() / a.estimate.max(b.estimate);
        Ok((
            a.estimate.is_finite() && a.estimate >= a.raw_max && spread <= 0.1,
            format!("estimates {:.5} and {:.5}, spread {:.2}%", a.estimate, b.estimate, 100.0 * spread),
        ))
    });
    c.out
}

/// Runs `suite`; the models suite audits the model described by `config`.
pub fn run_suite(suite: Suite, config: &RunConfig) -> Vec<CheckResult> {
    match suite {
        Suite::Spectral => spectral_suite(),
        Suite::Young => young_suite(),
        Suite::Convolve => convolve_suite(),
        Suite::Mild => mild_suite(),
        Suite::Models => models_suite(config),
        Suite::All => [spectral_suite(), young_suite(), convolve_suite(), mild_suite(), models_suite(config)].concat(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_suite_passes() {
        let r = spectral_suite();
        assert!(r.iter().all(|c| c.passed), "{r:#?}");
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!("bogus".parse::<Suite>().is_err());
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
    }
}
