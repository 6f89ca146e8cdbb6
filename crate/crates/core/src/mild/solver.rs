use super::{ht_norm_unchecked, HtNorm, ProblemSpec, SolutionPath, SolverReport};
use crate::convolve::ConvolutionPlan;
use crate::error::{Error, Result};
use crate::paths::{GridWindow, SampledPath};

/// Maximum number of horizon halvings tried by [`solve_with_halving`].
pub const MAX_HALVINGS: usize = 6;

/// Consecutive non-contracting Picard steps tolerated before giving up.
const EXPANSION_LIMIT: usize = 3;

/// `𝕃` on the grid of `w` restricted to `[0, T]`, with its per-run tables.
pub struct MildMap<'a> {
    spec: &'a ProblemSpec,
    w: SampledPath,
    plan: Option<ConvolutionPlan>,
    free: SampledPath,
    decay: Vec<f64>,
}

impl<'a> MildMap<'a> {
    pub fn new(spec: &'a ProblemSpec, horizon: f64) -> Result<Self> {
        spec.validate()?;
        let window = spec.w.window(0.0, horizon)?;
        if window.cells() == 0 {
            return Err(Error::arg("horizon must cover at least one grid cell"));
        }
        let w = spec.w.restrict(window)?;
        let n = w.n_cells();
        let dt = w.dt();
        let plan = if spec.q.is_zero() {
            None
        } else {
            Some(ConvolutionPlan::new(
                spec.op.clone(),
                spec.exponents.tau,
                n,
                w.horizon(),
            )?)
        };
        let dim = spec.dim();
        let decay: Vec<f64> = spec.op.eigenvalues().iter().map(|l| (-l * dt).exp()).collect();
        let mut free = vec![0.0; (n + 1) * dim];
        free[..dim].copy_from_slice(&spec.u0);
        for j in 1..=n {
            // P_{t_j} u₀ evaluated directly rather than by repeated stepping
            let t = w.time(j);
            let row = spec.op.semigroup_unchecked(t, &spec.u0);
            free[j * dim..(j + 1) * dim].copy_from_slice(&row);
        }
        let free = SampledPath::new(w.horizon(), dim, free)?;
        Ok(Self {
            spec,
            w,
            plan,
            free,
            decay,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.w.horizon()
    }

    pub fn n_cells(&self) -> usize {
        self.w.n_cells()
    }

    pub fn driving_path(&self) -> &SampledPath {
        &self.w
    }

    /// `t ↦ P_t u₀`, the default Picard start.
    pub fn free_evolution(&self) -> &SampledPath {
        &self.free
    }

    /// `t ↦ u₀`, the alternative Picard start.
    pub fn frozen_initial(&self) -> SampledPath {
        let values = self.spec.u0.repeat(self.n_cells() + 1);
        SampledPath::new(self.horizon(), self.spec.dim(), values).expect("finite initial value")
    }

    pub fn norm(&self, u: &SampledPath) -> HtNorm {
        let e = &self.spec.exponents;
        ht_norm_unchecked(u, e.delta, e.alpha, &self.spec.op)
    }

    pub fn check_path(&self, u: &SampledPath) -> Result<()> {
        if u.dim() != self.spec.dim()
            || u.n_cells() != self.n_cells()
            || (u.horizon() - self.horizon()).abs() > 1e-12 * self.horizon()
        {
            return Err(Error::arg(format!(
                "path must have dimension {} on {} cells of [0, {}]",
                self.spec.dim(),
                self.n_cells(),
                self.horizon()
            )));
        }
        Ok(())
    }

    /// `t ↦ ∫₀ᵗ A^τ P_{t−s} Q(u_s) ds`.
    pub fn bochner_term(&self, u: &SampledPath) -> Result<SampledPath> {
        self.check_path(u)?;
        match &self.plan {
            None => SampledPath::zeros(self.horizon(), self.n_cells(), self.spec.dim()),
            Some(plan) => {
                let mut g = Vec::with_capacity(u.values().len());
                for j in 0..u.n_points() {
                    g.extend(self.spec.q.eval(u.value(j)));
                }
                let g = SampledPath::new(self.horizon(), self.spec.dim(), g)
                    .map_err(|_| Error::domain("nonlinearity produced non-finite values"))?;
                plan.convolution_path(&g)
            }
        }
    }

    /// `t ↦ ∫₀ᵗ P_{t−s} F(u_s) dw_s` by `U_{j+1} = P_Δ (U_j + F(u_j)(w_{j+1} − w_j))`.
    pub fn noise_term(&self, u: &SampledPath) -> Result<SampledPath> {
        self.check_path(u)?;
        let dim = self.spec.dim();
        let n = self.n_cells();
        let mut values = vec![0.0; (n + 1) * dim];
        let mut acc = vec![0.0; dim];
        let mut dw = vec![0.0; self.w.dim()];
        for j in 0..n {
            for ((d, a), b) in dw.iter_mut().zip(self.w.value(j + 1)).zip(self.w.value(j)) {
                *d = a - b;
            }
            let inc = self.spec.f.apply(u.value(j), &dw);
            for k in 0..dim {
                acc[k] = self.decay[k] * (acc[k] + inc[k]);
            }
            values[(j + 1) * dim..(j + 2) * dim].copy_from_slice(&acc);
        }
        SampledPath::new(self.horizon(), dim, values)
            .map_err(|_| Error::domain("noise term produced non-finite values"))
    }

    /// `𝕃u = P_t u₀ − J + U`.
    pub fn apply(&self, u: &SampledPath) -> Result<SampledPath> {
        let u_term = self.noise_term(u)?;
        let mut values = self.free.values().to_vec();
        if self.plan.is_some() {
            let j_term = self.bochner_term(u)?;
            for (v, j) in values.iter_mut().zip(j_term.values()) {
                *v -= j;
            }
        }
        for (v, x) in values.iter_mut().zip(u_term.values()) {
            *v += x;
        }
        SampledPath::new(self.horizon(), self.spec.dim(), values)
            .map_err(|_| Error::domain("mild map produced non-finite values"))
    }
}

/// `𝕃u` on `[0, T]` with its ℍ_T norm.
pub fn apply_l(spec: &ProblemSpec, u: &SampledPath, horizon: f64) -> Result<SolutionPath> {
    let map = MildMap::new(spec, horizon)?;
    let path = map.apply(u)?;
    let norm = map.norm(&path);
    Ok(SolutionPath { path, norm })
}

/// Picard iteration from `u⁰_t = P_t u₀`.
pub fn picard_solve(
    spec: &ProblemSpec,
    horizon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(SolutionPath, SolverReport)> {
    let map = MildMap::new(spec, horizon)?;
    let start = map.free_evolution().clone();
    iterate(&map, start, tol, max_iter)
}

/// Picard iteration from a caller-supplied first guess on the grid of `[0, T]`.
pub fn picard_solve_from(
    spec: &ProblemSpec,
    horizon: f64,
    tol: f64,
    max_iter: usize,
    initial: SampledPath,
) -> Result<(SolutionPath, SolverReport)> {
    let map = MildMap::new(spec, horizon)?;
    map.check_path(&initial)?;
    iterate(&map, initial, tol, max_iter)
}

fn iterate(
    map: &MildMap<'_>,
    start: SampledPath,
    tol: f64,
    max_iter: usize,
) -> Result<(SolutionPath, SolverReport)> {
    if !(tol > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::arg("max_iter must be at least 1"));
    }
    let mut report = SolverReport {
        horizon: map.horizon(),
        beta: map.norm(&start).total,
        residual: f64::NAN,
        ..SolverReport::default()
    };
    let diverged = |report: SolverReport| Error::Diverged {
        report: Box::new(report),
        segment: None,
    };
    let mut u = start;
    loop {
        let next = match map.apply(&u) {
            Ok(v) => v,
            Err(Error::Domain(_)) => return Err(diverged(report)),
            Err(e) => return Err(e),
        };
        let inc = map.norm(&next.sub(&u)?).total;
        let size = map.norm(&next).total;
        report.push_increment(inc);
        report.beta = report.beta.max(size);
        u = next;
        if !inc.is_finite() || !size.is_finite() {
            return Err(diverged(report));
        }
        if inc < tol {
            break;
        }
        if report.trailing_expansions() >= EXPANSION_LIMIT || report.iterations >= max_iter {
            return Err(diverged(report));
        }
    }
    report.residual = match map.apply(&u) {
        Ok(v) => map.norm(&v.sub(&u)?).total,
        Err(_) => f64::INFINITY,
    };
    report.converged = true;
    let norm = map.norm(&u);
    Ok((SolutionPath { path: u, norm }, report))
}

/// [`picard_solve`] on `T, T/2, T/4, …` until it converges, at most [`MAX_HALVINGS`] halvings.
pub fn solve_with_halving(
    spec: &ProblemSpec,
    horizon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(SolutionPath, SolverReport)> {
    let mut last = None;
    for halvings in 0..=MAX_HALVINGS {
        let t = horizon / (1u64 << halvings) as f64;
        match spec.w.window(0.0, t) {
            Ok(w) if w.cells() > 0 => {}
            _ => break,
        }
        match picard_solve(spec, t, tol, max_iter) {
            Ok((sol, mut report)) => {
                report.halvings = halvings;
                return Ok((sol, report));
            }
            Err(Error::Diverged { mut report, .. }) => {
                report.halvings = halvings;
                last = Some(report);
            }
            Err(e) => return Err(e),
        }
    }
    match last {
        Some(report) => Err(Error::Diverged {
            report,
            segment: None,
        }),
        None => Err(Error::arg(format!("horizon {horizon} is not on the grid"))),
    }
}

/// `‖𝕃u − 𝕃v‖_{ℍ_T} / ‖u − v‖_{ℍ_T}`.
pub fn lipschitz_probe(spec: &ProblemSpec, horizon: f64, u: &SampledPath, v: &SampledPath) -> Result<f64> {
    let map = MildMap::new(spec, horizon)?;
    map.check_path(u)?;
    map.check_path(v)?;
    let den = map.norm(&u.sub(v)?).total;
    if den == 0.0 {
        return Err(Error::arg("lipschitz probe needs two distinct paths"));
    }
    let lu = map.apply(u)?;
    let lv = map.apply(v)?;
    Ok(map.norm(&lu.sub(&lv)?).total / den)
}

/// Solves on `segments` consecutive windows of length `T_each`, each restarted from the
/// terminal value of the previous one with the driving path shifted accordingly.
pub fn continue_solution(
    spec: &ProblemSpec,
    segments: usize,
    t_each: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(SolutionPath, Vec<SolverReport>)> {
    if segments == 0 {
        return Err(Error::arg("need at least one segment"));
    }
    let cells = spec.w.window(0.0, t_each)?.cells();
    if cells == 0 || segments * cells > spec.w.n_cells() {
        return Err(Error::arg(format!(
            "{segments} segments of length {t_each} do not fit the driving path"
        )));
    }
    let mut reports = Vec::with_capacity(segments);
    let mut joined: Option<SampledPath> = None;
    let mut u0 = spec.u0.clone();
    for i in 0..segments {
        let w = spec.w.restrict(GridWindow::new(i * cells, (i + 1) * cells))?;
        let seg = spec.clone().with_initial(u0)?.with_path(w)?;
        let (sol, report) = picard_solve(&seg, seg.w.horizon(), tol, max_iter).map_err(|e| match e {
            Error::Diverged { report, .. } => Error::Diverged {
                report,
                segment: Some(i),
            },
            other => other,
        })?;
        u0 = sol.path.last().to_vec().into();
        joined = Some(match joined {
            None => sol.path,
            Some(p) => p.concat(&sol.path)?,
        });
        reports.push(report);
    }
    let path = joined.expect("at least one segment");
    let norm = {
        let e = &spec.exponents;
        ht_norm_unchecked(&path, e.delta, e.alpha, &spec.op)
    };
    Ok((SolutionPath { path, norm }, reports))
}
