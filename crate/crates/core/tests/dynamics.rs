use crlab_core::dynamics::*;
use crlab_core::init::{gaussian, two_bumps};
use crlab_core::operator::MultiplierOperator;
use crlab_core::symmetry::{dilate, solution_rescale};
use crlab_core::*;

fn workspace(d: usize, n: usize, l: f64, k: usize) -> OperatorWorkspace {
    let grid = GridSpec::new(d, n, l).unwrap();
    let q = QuadratureScheme::new(QuadratureRule::PseudoConformalSplit, k, 0.5).unwrap();
    OperatorWorkspace::new(grid, q, Dealias::ZeroPad2x).unwrap()
}

fn final_state(g0: &Field, scheme: Scheme, dt: f64, t: f64, op: &dyn CubicOperator) -> Field {
    let cfg = IntegratorConfig::new(scheme, dt, t);
    evolve(g0, &cfg, op, usize::MAX).unwrap().trajectory.last().unwrap().clone()
}

#[test]
fn rk4_is_fourth_order_and_midpoint_second_order() {
    let grid = GridSpec::new(2, 16, 3.0).unwrap();
    let g0 = gaussian(grid, 1.0, &[0.5, 0.0]);
    let op = MultiplierOperator::new(grid, 0.5, 1.0);
    let exact = g0.map_with_coords(|p, v| {
        let r2: f64 = p.iter().map(|x| x * x).sum();
        v * Complex64::from_polar(1.0, -(0.5 * r2 + 1.0))
    });
    let err = |s, dt| final_state(&g0, s, dt, 1.0, &op).rel_distance(&exact).unwrap();
    let r4 = err(Scheme::Rk4, 0.02) / err(Scheme::Rk4, 0.01);
    let r2 = err(Scheme::ImplicitMidpoint, 0.02) / err(Scheme::ImplicitMidpoint, 0.01);
    assert!((r4 - 16.0).abs() < 1.0, "{r4}");
    assert!((r2 - 4.0).abs() < 0.2, "{r2}");
}

#[test]
fn conserved_quantities_hold_in_two_dimensions() {
    let ws = workspace(2, 32, 8.0, 32);
    let g0 = two_bumps(*ws.grid());
    let cfg = IntegratorConfig::new(Scheme::Rk4, 2e-3, 0.1);
    let ev = evolve(&g0, &cfg, &ws, 10).unwrap();
    assert_eq!(ev.diagnostics.len(), 6);
    for (name, v) in drift(&ev.diagnostics).entries() {
        assert!(v < 1e-7, "{name}: {v}");
    }
    // 𝒯 is not the zero map here: the field does move.
    assert!(ev.trajectory.last().unwrap().rel_distance(&g0).unwrap() > 1e-3);
}

#[test]
fn implicit_midpoint_conserves_mass_to_solver_tolerance() {
    let ws = workspace(2, 16, 4.0, 16);
    let g0 = two_bumps(*ws.grid());
    let cfg = IntegratorConfig::new(Scheme::ImplicitMidpoint, 0.02, 0.2);
    let ev = evolve(&g0, &cfg, &ws, 1).unwrap();
    let rep = drift(&ev.diagnostics);
    assert!(rep.mass < 1e-11, "{}", rep.mass);
}

#[test]
fn virial_rhs_matches_finite_differences_in_three_dimensions() {
    let ws = workspace(3, 16, 6.0, 48);
    let g0 = two_bumps(*ws.grid());
    let cfg = IntegratorConfig::new(Scheme::Rk4, 5e-4, 0.004);
    let ev = evolve(&g0, &cfg, &ws, 1).unwrap();
    let samples = virial_check(&ev.trajectory, &ws).unwrap();
    assert!(samples.len() >= 5);
    for s in samples {
        assert!(s.rhs.abs() > 0.0);
        assert!(s.rel_discrepancy < 1e-3, "{s:?}");
    }
}

#[test]
fn virial_rhs_vanishes_in_two_dimensions() {
    let ws = workspace(2, 16, 4.0, 16);
    let g = two_bumps(*ws.grid());
    assert_eq!(ws.virial_rhs(&g).unwrap(), 0.0);
}

#[test]
fn amplitude_rescaling_matches_direct_evolution() {
    // λg(λ²t, ξ) solves the equation when g does.
    let ws = workspace(2, 32, 8.0, 32);
    let g0 = two_bumps(*ws.grid());
    let lam = 1.5;
    let cfg = IntegratorConfig::new(Scheme::Rk4, 1e-3, 0.05);
    let base = evolve(&g0, &cfg, &ws, 10).unwrap().trajectory;
    let mapped = solution_rescale(&base, lam, 0).unwrap();
    let t_end = *mapped.times.last().unwrap();
    assert!((t_end - 0.05 / (lam * lam)).abs() < 1e-15);
    let h0 = g0.scaled(lam.into());
    let direct = final_state(&h0, Scheme::Rk4, 1e-3 / (lam * lam), t_end, &ws);
    let e = direct.rel_distance(mapped.last().unwrap()).unwrap();
    assert!(e < 1e-5, "{e}");
}

#[test]
fn dyadic_rescaling_matches_direct_evolution() {
    // g(μ^{2−2d} t, μξ) with μ = 2, d = 2: time runs four times slower.
    let ws = workspace(2, 64, 10.0, 129);
    let g0 = gaussian(*ws.grid(), 2.0, &[0.5, 0.0]);
    let cfg = IntegratorConfig::new(Scheme::Rk4, 1e-3, 0.02);
    let base = evolve(&g0, &cfg, &ws, 10).unwrap().trajectory;
    let mapped = solution_rescale(&base, 1.0, 1).unwrap();
    let t_end = *mapped.times.last().unwrap();
    assert!((t_end - 0.08).abs() < 1e-15);
    let h0 = dilate(&g0, 1).unwrap();
    let direct = final_state(&h0, Scheme::Rk4, 4e-3, t_end, &ws);
    let e = direct.rel_distance(mapped.last().unwrap()).unwrap();
    assert!(e < 1e-4, "{e}");
}

#[test]
fn adaptive_stepping_reaches_the_final_time() {
    let grid = GridSpec::new(2, 16, 3.0).unwrap();
    let g0 = gaussian(grid, 1.0, &[0.0, 0.0]);
    let op = MultiplierOperator::new(grid, 0.5, 1.0);
    let mut cfg = IntegratorConfig::new(Scheme::Rk4, 0.5, 1.0);
    cfg.adapt = Some(1e-9);
    let ev = evolve(&g0, &cfg, &op, 1).unwrap();
    assert!((ev.trajectory.times.last().unwrap() - 1.0).abs() < 1e-12);
    let (dt, err) = preflight_dt(&g0, &IntegratorConfig::new(Scheme::Rk4, 0.5, 1.0), &op, 0.5, 1e-6)
        .unwrap();
    assert!(dt <= 0.5 && err <= 1e-6 || dt == 0.5 / 8.0);
}

#[test]
fn non_finite_data_is_reported() {
    let grid = GridSpec::new(2, 8, 2.0).unwrap();
    let mut g0 = gaussian(grid, 1.0, &[0.0, 0.0]);
    g0.values_mut()[3] = Complex64::new(f64::NAN, 0.0);
    let op = MultiplierOperator::new(grid, 0.5, 1.0);
    let cfg = IntegratorConfig::new(Scheme::Rk4, 0.1, 0.2);
    assert!(matches!(evolve(&g0, &cfg, &op, 1), Err(Error::NonFinite(_))));
}
