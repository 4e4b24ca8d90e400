//! Cross-checks of the three coupling regimes against independent values.

use cavity_decay::*;
use num_complex::Complex64;

/// Bound state below the band edge for η = 0.1, ωc = 50, n = 1: root of
/// `E − ω₀ + ∫ J(ω)/(ω − E) dω = 0` and residue `1/(1 + ∫ J/(ω − E)² dω)`,
/// both from 30-digit adaptive quadrature.
const WEAK_BOUND_ENERGY: f64 = -3.232_652_121_150_59;
const WEAK_BOUND_RESIDUE: f64 = 0.8675125658961055;

fn weak() -> SpectralParams {
    SpectralParams::new(0.1, 50.0, 1.0).unwrap()
}

#[test]
fn weak_coupling_amplitude_locks_onto_bound_state() {
    let grid = TimeGrid::new(20.0, 2e-4).unwrap();
    let s = solve_u(&Kernel::ClosedForm(weak()), &grid, 1.0).unwrap();
    let r = extract_rates(&s, DEFAULT_EPSILON_U, 1.0);
    let late: Vec<usize> = r.valid_in(15.0, 20.0).collect();
    let mean_abs = late.iter().map(|&k| s.u[k].norm()).sum::<f64>() / late.len() as f64;
    let mean_omega = late.iter().map(|&k| r.omega[k]).sum::<f64>() / late.len() as f64;
    assert!((mean_abs - WEAK_BOUND_RESIDUE).abs() < 2e-3, "{mean_abs}");
    assert!(
        (mean_omega - WEAK_BOUND_ENERGY).abs() < 5e-3,
        "{mean_omega}"
    );
    assert!(r.mean_gamma(15.0, 20.0).unwrap().abs() < 5e-3);
}

#[test]
fn weak_coupling_matches_discrete_bath() {
    let grid = TimeGrid::new(3.0, 1e-3).unwrap();
    let bath =
        discretize_bath(&weak(), 1200, 1500.0, 3.0, SamplingScheme::MidpointUniform).unwrap();
    let oracle = oracle_amplitude(&bath, 1.0, &grid).unwrap();
    let s = solve_u(&Kernel::ClosedForm(weak()), &grid, 1.0).unwrap();
    // the finite bath shifts the bound-state phase slightly; compare moduli
    let dev =
        s.u.iter()
            .zip(&oracle.u)
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max);
    assert!(dev < 2e-3, "{dev}");
}

#[test]
fn weak_coupling_self_convergence_is_second_order() {
    let report = convergence_study(
        &Kernel::ClosedForm(weak()),
        &TimeGrid::new(3.0, 1e-3).unwrap(),
        2,
        1.0,
    )
    .unwrap();
    let ratio = report.max_errors[0] / report.max_errors[1];
    assert!((3.3..=4.8).contains(&ratio), "{ratio}");
}

#[test]
fn closed_form_and_quadrature_kernels_agree() {
    let grid = TimeGrid::new(10.0, 1e-3).unwrap();
    for (eta, omega_c, n) in [(5.0, 1.0, 1.0), (0.5, 2.0, 0.5), (1.0, 1.0, 2.0)] {
        let p = SpectralParams::new(eta, omega_c, n).unwrap();
        let a = solve_u(&Kernel::ClosedForm(p), &grid, 1.0).unwrap();
        let b = solve_u(
            &Kernel::Quadrature {
                params: p,
                config: QuadratureConfig::default(),
            },
            &grid,
            1.0,
        )
        .unwrap();
        let dev = a.max_deviation(&b, grid.count());
        assert!(dev < 1e-7, "eta {eta} omega_c {omega_c} n {n}: {dev}");
    }
}

#[test]
fn markovian_amplitude_uses_oracle_coefficients() {
    let grid = TimeGrid::new(3.0, 1e-2).unwrap();
    let m = markovian_u(&weak(), &grid).unwrap();
    for k in [0, 50, 300] {
        let t = grid.time(k);
        assert!((m.u[k].norm() - (-0.307938 * t).exp()).abs() < 1e-6);
    }
    let phase_slope = (m.u_dot[100] / m.u[100]).im;
    assert!((phase_slope + (1.0 - 5.3249)).abs() < 1e-4);
}

#[test]
fn strong_coupling_steady_state_is_not_vacuum() {
    let p = SpectralParams::new(5.0, 1.0, 1.0).unwrap();
    let grid = TimeGrid::new(50.0, 5e-4).unwrap();
    let s = solve_u(&Kernel::ClosedForm(p), &grid, 1.0).unwrap();
    let last = s.u.last().unwrap().norm();
    assert!((last - 0.5118).abs() < 1e-3, "{last}");
    let cat = CatState::new(Complex64::new(1.0, 0.0));
    let ev = evolve_cat(&cat, *s.u.last().unwrap());
    let fock = FockDensity::from_evolved_cat(&ev, 24).unwrap();
    assert!((fock.purity() - ev.purity).abs() < 1e-8);
    assert!((fock.trace().re - 1.0).abs() < 1e-10);
}

#[test]
fn long_memory_rate_oscillates_about_positive_value() {
    let p = SpectralParams::new(5.0, 0.2, 1.0).unwrap();
    let grid = TimeGrid::new(100.0, 1e-3).unwrap();
    let s = solve_u(&Kernel::ClosedForm(p), &grid, 1.0).unwrap();
    let r = extract_rates(&s, DEFAULT_EPSILON_U, 1.0);
    assert!(r.gamma_sign_changes(0.0, 100.0) >= 5);
    assert!(r.mean_gamma(0.0, 100.0).unwrap() > 0.0);
    assert!(s.max_abs() <= 1.0 + 1e-8);
}
