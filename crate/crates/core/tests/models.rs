use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use num_complex::Complex64;
use rough_mild::linalg::norm;
use rough_mild::mild::{picard_solve, solve_with_halving};
use rough_mild::models::{
    derivative_checks, fit_quadratic_constant, leray_project, make_heat_model, make_ns_model_with_basis,
    sobolevski_check, taylor_green, FourierField, HeatParams, NsParams, StokesBasis, WaveSet,
};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_field(waves: &std::sync::Arc<WaveSet>, rng: &mut ChaCha8Rng) -> FourierField {
    let mut f = FourierField::zeros(waves);
    for i in 0..waves.len() {
        if waves.negation(i) < i {
            continue;
        }
        let c: Vec<Complex64> = (0..waves.dim()).map(|_| Complex64::new(gauss(rng), gauss(rng))).collect();
        f.set_mode(waves.vector(i), &c).unwrap();
    }
    f
}

fn unforced(dim: usize, tau: f64) -> NsParams {
    NsParams {
        dim,
        k_max: 3,
        tau,
        noise_amp: 0.0,
        n_cells: 256,
        horizon: 0.5,
        ..NsParams::default()
    }
}

#[test]
fn fitted_quadratic_constant_is_stable_and_dominated() {
    let spec = make_heat_model(&HeatParams::default()).unwrap();
    let fits: Vec<f64> = [1, 2, 3].iter().map(|s| fit_quadratic_constant(&spec, 1000, *s).unwrap()).collect();
    let hi = fits.iter().cloned().fold(0.0, f64::max);
    let lo = fits.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((hi - lo) / hi <= 0.1, "{fits:?}");
    assert!(spec.constants.k2.coeff >= hi, "declared {} vs fitted {hi}", spec.constants.k2.coeff);
}

#[test]
fn ns_fitted_constant_is_stable() {
    let (spec, _) = make_ns_model_with_basis(&unforced(2, 0.25)).unwrap();
    let a = fit_quadratic_constant(&spec, 1000, 1).unwrap();
    let b = fit_quadratic_constant(&spec, 1000, 2).unwrap();
    assert!((a - b).abs() / a.max(b) <= 0.1, "{a} vs {b}");
    assert!(spec.constants.k2.coeff >= a.max(b));
}

#[test]
fn taylor_green_energy_decays() {
    let (spec, basis) = make_ns_model_with_basis(&unforced(2, 0.25)).unwrap();
    let spec = spec.with_initial(taylor_green(&basis, 1.0).unwrap().into()).unwrap();
    let (sol, _) = picard_solve(&spec, 0.5, 1e-12, 100).unwrap();
    let energies: Vec<f64> = (0..=sol.path.n_cells()).map(|j| norm(sol.path.value(j)).powi(2)).collect();
    assert!(energies.windows(2).all(|e| e[1] < e[0]), "energy not decreasing");
    // a steady advection mode decays at its viscous rate e^{−2λt}
    let rate = (energies[0] / energies[energies.len() - 1]).ln() / 0.5;
    assert!((rate - 2.0 * 2.0).abs() < 1e-6, "decay rate {rate}");
}

#[test]
fn zero_data_without_noise_stays_zero() {
    let p = NsParams {
        u0_amp: 0.0,
        ..unforced(2, 0.25)
    };
    let (spec, _) = make_ns_model_with_basis(&p).unwrap();
    let (sol, _) = picard_solve(&spec, 0.5, 1e-12, 10).unwrap();
    assert!(sol.path.values().iter().all(|v| *v == 0.0));
}

#[test]
fn unforced_energy_dissipates_in_full_formulation() {
    for dim in [2, 3] {
        let (spec, _) = make_ns_model_with_basis(&unforced(dim, 0.0)).unwrap();
        let (sol, _) = solve_with_halving(&spec, 0.5, 1e-12, 200).unwrap();
        for j in 0..sol.path.n_cells() {
            let (a, b) = (norm(sol.path.value(j)).powi(2), norm(sol.path.value(j + 1)).powi(2));
            assert!(b <= a * (1.0 + 1e-8), "dim {dim}, step {j}: {a} -> {b}");
        }
    }
}

#[test]
fn ns3d_trajectory_stays_divergence_free() {
    let p = NsParams {
        noise_amp: 1.0,
        ..unforced(3, 0.25)
    };
    let (spec, basis) = make_ns_model_with_basis(&p).unwrap();
    let (sol, _) = solve_with_halving(&spec, 0.5, 1e-10, 200).unwrap();
    for j in 0..=sol.path.n_cells() {
        let f = basis.to_field(sol.path.value(j));
        assert!(f.max_divergence() <= 1e-10 * f.norm().max(f64::MIN_POSITIVE));
    }
}

#[test]
fn leray_projector_is_self_adjoint() {
    let waves = WaveSet::new(3, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let (f, g) = (random_field(&waves, &mut rng), random_field(&waves, &mut rng));
        let lhs = leray_project(&f).inner(&g);
        let rhs = f.inner(&leray_project(&g));
        assert!((lhs - rhs).abs() <= 1e-12 * f.norm() * g.norm());
    }
}

#[test]
fn ns_derivative_checks_have_order_two() {
    for dim in [2, 3] {
        let (spec, _) = make_ns_model_with_basis(&NsParams {
            dim,
            k_max: 3,
            n_cells: 64,
            ..NsParams::default()
        })
        .unwrap();
        let (dq, df) = derivative_checks(&spec, 9).unwrap();
        assert!(dq.order >= 1.8, "dim {dim}: {dq:?}");
        assert!(df.order >= 1.8, "dim {dim}: {df:?}");
    }
}

#[test]
fn single_mode_ratio_is_below_estimate() {
    let basis = StokesBasis::new(2, 3).unwrap();
    let est = sobolevski_check(&basis, 200, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..basis.dim() {
        let mut u = vec![0.0; basis.dim()];
        u[i] = rng.random_range(0.5..2.0);
        if let Some(r) = basis.sobolevski_ratio(&u, &u) {
            assert!(r.is_finite() && r <= est.estimate * (1.0 + 1e-12), "mode {i}: {r} > {}", est.estimate);
        }
    }
}
