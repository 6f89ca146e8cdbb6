use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rough_mild::linalg::{dist, OperatorValue};
use rough_mild::mild::{
    apply_l, continue_solution, horizon_bounds, lipschitz_probe, picard_solve, select_horizon, solve_with_halving,
    ConstantNoise, Exponents, ModelConstants, ProblemSpec, ZeroNonlinearity,
};
use rough_mild::models::{make_heat_model, single_mode_square_coefficient, HeatParams};
use rough_mild::paths::{fbm_generate, SampledPath};
use rough_mild::spectral::SpectralOperator;
use rough_mild::Error;

fn exps() -> Exponents {
    Exponents::new(0.25, 0.5, 0.6).unwrap()
}

/// `Q ≡ 0` and `F ≡ f0` on the given spectrum, driven by fBM.
fn linear_spec(eigen: Vec<f64>, f0: OperatorValue, u0: Vec<f64>, n: usize, horizon: f64, seed: u64) -> ProblemSpec {
    let op = SpectralOperator::new(eigen).unwrap();
    let w = fbm_generate(0.75, n, horizon, f0.cols(), seed).unwrap();
    ProblemSpec::new(
        op,
        exps(),
        Arc::new(ZeroNonlinearity),
        Arc::new(ConstantNoise(f0)),
        ModelConstants::zero(),
        u0.into(),
        w,
    )
    .unwrap()
}

fn logistic(u0_amp: f64, n: usize, horizon: f64) -> ProblemSpec {
    make_heat_model(&HeatParams {
        modes: 1,
        reaction: 1.0 / single_mode_square_coefficient(),
        noise_amp: 0.0,
        u0_amp,
        n_cells: n,
        horizon,
        ..HeatParams::default()
    })
    .unwrap()
}

fn random_path(dim: usize, n: usize, horizon: f64, seed: u64) -> SampledPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SampledPath::from_fn(horizon, n, dim, |_| (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect()).unwrap()
}

#[test]
fn free_evolution_when_q_and_f_vanish() {
    let spec = linear_spec(vec![1.0, 4.0, 9.0], OperatorValue::zeros(3, 2), vec![1.0, -2.0, 0.5], 64, 1.0, 1);
    let u = random_path(3, 64, 1.0, 2);
    let lu = apply_l(&spec, &u, 1.0).unwrap().path;
    for j in 0..=64 {
        let p = spec.op.semigroup_apply(lu.time(j), &spec.u0.0).unwrap();
        assert_eq!(lu.value(j), &p.0[..], "t = {}", lu.time(j));
    }
}

#[test]
fn constant_noise_matches_fine_grid_oracle() {
    let f0 = OperatorValue::from_row_major(1, 1, vec![1.0]).unwrap();
    let fine = linear_spec(vec![1.0], f0.clone(), vec![0.0], 8 * 4096, 1.0, 77);
    let coarse = fine.clone().with_path(fine.w.subsample(8).unwrap()).unwrap();
    let u_fine = SampledPath::zeros(1.0, 8 * 4096, 1).unwrap();
    let u_coarse = SampledPath::zeros(1.0, 4096, 1).unwrap();
    let oracle = apply_l(&fine, &u_fine, 1.0).unwrap().path;
    let got = apply_l(&coarse, &u_coarse, 1.0).unwrap().path;
    let scale = (0..=4096).map(|j| got.value(j)[0].abs()).fold(0.0, f64::max);
    let err = (0..=4096)
        .map(|j| (got.value(j)[0] - oracle.value(8 * j)[0]).abs())
        .fold(0.0, f64::max);
    assert!(err / scale < 2e-2, "relative error {}", err / scale);
}

/// `e^{−t} u₀ − ∫₀ᵗ e^{−(t−s)} I[u²](s) ds` with `I` the piecewise-linear interpolant,
/// integrated cell by cell with composite Simpson.
fn variation_of_constants(u: &SampledPath, u0: f64, m: usize) -> f64 {
    let t = u.time(m);
    let dt = u.dt();
    let sub = 64;
    let mut acc = 0.0;
    for j in 0..m {
        let (ga, gb) = (u.value(j)[0].powi(2), u.value(j + 1)[0].powi(2));
        let a = u.time(j);
        let h = dt / sub as f64;
        let mut s = 0.0;
        for i in 0..=sub {
            let r = a + i as f64 * h;
            let g = ga + (gb - ga) * (r - a) / dt;
            let w = if i == 0 || i == sub { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * (-(t - r)).exp() * g;
        }
        acc += s * h / 3.0;
    }
    (-t).exp() * u0 - acc
}

#[test]
fn bochner_term_matches_direct_quadrature() {
    let spec = logistic(0.5, 64, 1.0);
    let u = SampledPath::from_fn(1.0, 64, 1, |t| vec![0.5 * (3.0 * t).cos()]).unwrap();
    let lu = apply_l(&spec, &u, 1.0).unwrap().path;
    for m in [1, 7, 32, 64] {
        let exact = variation_of_constants(&u, 0.5, m);
        assert!((lu.value(m)[0] - exact).abs() < 1e-8, "m = {m}: {} vs {exact}", lu.value(m)[0]);
    }
}

#[test]
fn constant_map_converges_in_one_effective_iteration() {
    let f0 = OperatorValue::from_row_major(2, 2, vec![1.0, 0.5, -0.25, 2.0]).unwrap();
    let spec = linear_spec(vec![1.0, 4.0], f0, vec![1.0, 1.0], 256, 1.0, 3);
    let (_, rep) = picard_solve(&spec, 1.0, 1e-12, 10).unwrap();
    assert_eq!(rep.iterations, 2);
    assert!(rep.increments[0] > 0.0);
    assert_eq!(rep.increments[1], 0.0);
    assert_eq!(rep.residual, 0.0);
}

#[test]
fn stiff_blow_up_diverges_then_succeeds_after_two_halvings() {
    // u' = −u − u² with u₀ = −3 blows up at t = ln(3/2) ≈ 0.405
    let spec = logistic(-3.0, 1024, 1.0);
    match picard_solve(&spec, 1.0, 1e-10, 200) {
        Err(Error::Diverged { report, segment }) => {
            assert!(!report.converged);
            assert_eq!(segment, None);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
    let (sol, rep) = solve_with_halving(&spec, 1.0, 1e-10, 200).unwrap();
    assert_eq!(rep.halvings, 2);
    assert!(rep.converged);
    assert_eq!(sol.path.horizon(), 0.25);
}

#[test]
fn residual_is_below_ten_tolerances() {
    for (seed, tol) in [(1, 1e-8), (2, 1e-10), (3, 1e-6), (4, 1e-9)] {
        let spec = make_heat_model(&HeatParams {
            n_cells: 256,
            seed,
            ..HeatParams::default()
        })
        .unwrap();
        let (_, rep) = solve_with_halving(&spec, 1.0, tol, 200).unwrap();
        assert!(rep.residual < 10.0 * tol, "seed {seed}: residual {} tol {tol}", rep.residual);
    }
}

#[test]
fn default_heat_model_contracts_geometrically() {
    let spec = make_heat_model(&HeatParams::default()).unwrap();
    let (_, rep) = picard_solve(&spec, 1.0, 1e-8, 200).unwrap();
    let r = &rep.ratios;
    assert!(r.len() >= 4, "{r:?}");
    for k in 2..r.len() {
        assert!(r[k] < 1.0, "{r:?}");
        if k > 2 {
            let variation = (r[k] - r[k - 1]).abs() / r[k - 1];
            assert!(variation < 0.3, "ratio {k}: {r:?}");
        }
    }
}

#[test]
fn horizon_is_full_when_bounds_degenerate() {
    let spec = linear_spec(vec![1.0, 4.0], OperatorValue::zeros(2, 1), vec![0.1, 0.1], 128, 2.0, 5);
    let b = horizon_bounds(&spec, 2.0, 1.0).unwrap();
    assert_eq!(b.contraction, 0.0);
    let choice = select_horizon(&spec, 1.0).unwrap();
    assert_eq!(choice.horizon, 2.0);
    assert_eq!(choice.level, 0);
}

#[test]
fn small_data_horizon_is_positive_and_solvable() {
    let spec = make_heat_model(&HeatParams::small_data()).unwrap();
    let beta = 2.0 * horizon_bounds(&spec, 1.0, 1.0).unwrap().initial_terms;
    let choice = select_horizon(&spec, beta).unwrap();
    assert!(choice.horizon > 0.0);
    assert!(choice.bounds.invariance <= beta && choice.bounds.contraction <= 0.5);
    let (_, rep) = picard_solve(&spec, choice.horizon, 1e-10, 200).unwrap();
    assert!(rep.converged);
}

#[test]
fn horizon_is_monotone_in_beta_without_q() {
    let spec = make_heat_model(&HeatParams {
        disable_q: true,
        ..HeatParams::small_data()
    })
    .unwrap();
    let beta = horizon_bounds(&spec, 1.0, 1.0).unwrap().initial_terms;
    let mut last = 0.0;
    for k in 0..5 {
        let t = select_horizon(&spec, beta * 2f64.powi(k)).map_or(0.0, |c| c.horizon);
        assert!(t >= last, "beta x 2^{k}: {t} < {last}");
        last = t;
    }
    assert!(last > 0.0);
}

#[test]
fn default_heat_model_has_no_certified_horizon() {
    let spec = make_heat_model(&HeatParams::default()).unwrap();
    for beta in [1.0, 10.0, 100.0] {
        match select_horizon(&spec, beta) {
            Err(Error::Infeasible { contraction, .. }) => assert!(contraction > 0.5),
            other => panic!("beta {beta}: {other:?}"),
        }
    }
}

#[test]
fn lipschitz_probe_of_constant_map_is_zero() {
    let f0 = OperatorValue::from_row_major(2, 1, vec![1.0, -1.0]).unwrap();
    let spec = linear_spec(vec![1.0, 4.0], f0, vec![1.0, 0.0], 128, 1.0, 6);
    let u = random_path(2, 128, 1.0, 7);
    let v = random_path(2, 128, 1.0, 8);
    assert_eq!(lipschitz_probe(&spec, 1.0, &u, &v).unwrap(), 0.0);
}

/// `A^δ`-flat random coordinates plus fBM time dependence, on the grid of `spec.w`.
fn state_path(spec: &ProblemSpec, seed: u64) -> SampledPath {
    let (n, t, dim) = (spec.w.n_cells(), spec.w.horizon(), spec.dim());
    let drivers = fbm_generate(0.8, n, t, dim, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    let weights: Vec<f64> = spec.op.eigenvalues().iter().map(|l| l.powf(-spec.exponents.delta)).collect();
    let base: Vec<f64> = weights.iter().map(|w| rng.random_range(-1.0..1.0) * w).collect();
    let mut j = 0;
    SampledPath::from_fn(t, n, dim, |_| {
        let v = drivers.value(j).iter().zip(&base).zip(&weights).map(|((d, b), w)| b + d * w).collect();
        j += 1;
        v
    })
    .unwrap()
}

#[test]
fn lipschitz_ratio_shrinks_with_horizon() {
    let spec = make_heat_model(&HeatParams {
        n_cells: 512,
        ..HeatParams::default()
    })
    .unwrap();
    for seed in 0..5 {
        let full_u = state_path(&spec, 100 + seed).scaled(0.3);
        let full_v = state_path(&spec, 200 + seed).scaled(0.3);
        let at = |t: f64| {
            let w = spec.w.window(0.0, t).unwrap();
            lipschitz_probe(&spec, t, &full_u.restrict(w).unwrap(), &full_v.restrict(w).unwrap()).unwrap()
        };
        assert!(at(0.5) <= at(1.0), "seed {seed}");
    }
}

#[test]
fn one_segment_continuation_is_picard() {
    let spec = make_heat_model(&HeatParams {
        n_cells: 256,
        ..HeatParams::default()
    })
    .unwrap();
    let (a, ra) = continue_solution(&spec, 1, 1.0, 1e-9, 200).unwrap();
    let (b, rb) = picard_solve(&spec, 1.0, 1e-9, 200).unwrap();
    assert_eq!(a.path, b.path);
    assert_eq!(ra, vec![rb]);
}

#[test]
fn linear_continuation_follows_semigroup() {
    let spec = linear_spec(vec![1.0, 4.0, 25.0], OperatorValue::zeros(3, 1), vec![1.0, -1.0, 2.0], 128, 1.0, 9);
    let (sol, _) = continue_solution(&spec, 2, 0.5, 1e-12, 10).unwrap();
    for j in 0..=128 {
        let p = spec.op.semigroup_apply(sol.path.time(j), &spec.u0.0).unwrap();
        assert!(dist(sol.path.value(j), &p.0) <= 1e-12, "t = {}", sol.path.time(j));
    }
}

#[test]
fn heat_continuation_over_four_segments() {
    let spec = make_heat_model(&HeatParams {
        n_cells: 512,
        ..HeatParams::default()
    })
    .unwrap();
    let (sol, reports) = continue_solution(&spec, 4, 0.25, 1e-9, 200).unwrap();
    assert_eq!(reports.len(), 4);
    assert!(reports.iter().all(|r| r.converged));
    assert_eq!(sol.path.n_cells(), 512);
    // each segment restarts from the previous terminal value, so joints match exactly
    for i in 1..4 {
        let w = spec.w.window(0.0, 0.25 * i as f64).unwrap();
        let seg = spec
            .clone()
            .with_initial(sol.path.value(w.end).to_vec().into())
            .unwrap()
            .with_path(spec.w.restrict(rough_mild::paths::GridWindow::new(w.end, w.end + 128)).unwrap())
            .unwrap();
        let (s, _) = picard_solve(&seg, 0.25, 1e-9, 200).unwrap();
        assert_eq!(s.path.value(0), sol.path.value(w.end));
        assert_eq!(s.path.last(), sol.path.value(w.end + 128));
    }
}
