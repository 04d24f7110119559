use crlab_core::init::{gaussian, random_smooth};
use crlab_core::norms::{first_moments, mass};
use crlab_core::stationary::*;
use crlab_core::*;
use std::f64::consts::PI;

fn workspace(d: usize, n: usize, l: f64, k: usize) -> OperatorWorkspace {
    let grid = GridSpec::new(d, n, l).unwrap();
    let q = QuadratureScheme::new(QuadratureRule::PseudoConformalSplit, k, 0.5).unwrap();
    OperatorWorkspace::new(grid, q, Dealias::ZeroPad2x).unwrap()
}

/// `ℋ/M²`, which is dilation and amplitude invariant in `d = 2`.
fn sharp_ratio(g: &Field, op: &dyn CubicOperator) -> f64 {
    op.hamiltonian(g).unwrap() / mass(g).powi(2)
}

#[test]
fn petviashvili_finds_a_gaussian_in_two_dimensions() {
    // The mass-only problem is dilation invariant; a coarse box lets the
    // iterate drift along that orbit, so this needs n = 64, L = 10.
    let ws = workspace(2, 64, 10.0, 64);
    let init = random_smooth(*ws.grid(), 1.5, 11, true);
    let res = petviashvili_solve(&init, VariationalRegime::MassOnly, 1e-9, 300, &ws).unwrap();
    assert!(res.converged && res.residual <= 1e-9);
    assert_eq!(res.pohozaev_kinetic_ratio, 0.0);
    assert!((res.pohozaev_mass_ratio - 1.0).abs() < 1e-8);

    let r2 = gaussian_log_fit(&res.phi, 1e-6).unwrap();
    assert!(r2 >= 0.9999, "{r2}");

    // For the unit Gaussian ℋ = π³/4 and M = π, and Gaussians are maximizers.
    let v = sharp_ratio(&res.phi, &ws);
    assert!((v - PI / 4.0).abs() < 1e-6 * PI, "{v}");

    let m = extract_multipliers(&res.phi, &ws).unwrap();
    assert!(m.least_squares.0.abs() < 1e-6, "{m:?}");
    assert!((m.least_squares.1 - 1.0).abs() < 1e-6, "{m:?}");
}

#[test]
fn ascent_reaches_the_same_level() {
    let ws = workspace(2, 32, 8.0, 32);
    let init = random_smooth(*ws.grid(), 1.2, 11, true);
    let before = sharp_ratio(&init, &ws);
    let res = gradient_ascent_solve(
        &init,
        VariationalRegime::MassOnly,
        &AscentPolicy::default(),
        1e-6,
        &ws,
    )
    .unwrap();
    assert!(res.history.windows(2).all(|w| w[1] >= w[0]));
    let after = sharp_ratio(&res.phi, &ws);
    assert!(after > before);
    assert!((after - PI / 4.0).abs() < 1e-6, "{after}");
}

#[test]
fn pohozaev_report_on_the_gaussian() {
    let ws = workspace(2, 64, 10.0, 64);
    let g = gaussian(*ws.grid(), 1.0, &[0.0, 0.0]);
    // 𝒯(G) = (π²/2)G, so φ = cG with c² = 2/π² solves φ = 𝒯(φ).
    let phi = g.scaled(Complex64::new((2.0f64).sqrt() / PI, 0.0));
    let rep = pohozaev_report(&phi, 0.0, 1.0, &ws).unwrap();
    assert!(rep.energy_residual.abs() < 1e-8, "{rep:?}");
    assert!(rep.pohozaev_residual.abs() < 1e-8, "{rep:?}");
    assert!(rep.dilation_defect.abs() < 1e-8, "{rep:?}");
    assert!(rep.max_ratio_error() < 1e-8);
}

#[test]
fn regime_and_initializer_errors() {
    let ws = workspace(2, 16, 4.0, 16);
    let g = gaussian(*ws.grid(), 1.0, &[0.0, 0.0]);
    for regime in [
        VariationalRegime::MassPlusKinetic,
        VariationalRegime::KineticOnly,
    ] {
        let e = petviashvili_solve(&g, regime, 1e-8, 10, &ws).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter(_)), "{e:?}");
    }
    assert!(Constraint::new(VariationalRegime::MassOnly, 0.5).is_err());
    assert!(Constraint::new(VariationalRegime::MassPlusKinetic, -1.0).is_err());
    assert!(VariationalRegime::for_dimension(6).is_err());
    let zero = Field::zeros(*ws.grid(), Side::Frequency);
    assert!(petviashvili_solve(&zero, VariationalRegime::MassOnly, 1e-8, 10, &ws).is_err());
    let e = petviashvili_solve(&g, VariationalRegime::MassOnly, 1e-14, 2, &ws).unwrap_err();
    assert!(matches!(e, Error::NoConvergence(_)), "{e:?}");
}

#[test]
fn decay_norms_stabilize_on_growing_boxes() {
    let grid = GridSpec::new(2, 32, 8.0).unwrap();
    let phi = gaussian(grid, 1.0, &[0.0, 0.0]);
    let boxes: Vec<Field> = [4.0, 6.0, 8.0]
        .iter()
        .map(|l| restrict_box(&phi, *l).unwrap())
        .collect();
    let table = decay_check(&boxes).unwrap();
    assert_eq!(table.half_widths, vec![4.0, 6.0, 8.0]);
    assert!(table.stabilized(1e-10), "{:?}", table.last_change);
    let first = decay_check(&boxes[..2]).unwrap();
    assert!(!first.stabilized(1e-10));
}

#[test]
fn recentering_removes_the_momentum() {
    let grid = GridSpec::new(2, 64, 10.0).unwrap();
    let psi = gaussian(grid, 1.0, &[1.25, -0.5]);
    let (phi, nu) = traveling_recenter(&psi, 0.5).unwrap();
    // P = −∫ξ|ψ|² = −c M, so ν = 2Pλ/M = −2λc.
    assert!((nu[0] + 1.25).abs() < 1e-10 && (nu[1] - 0.5).abs() < 1e-10, "{nu:?}");
    let c = first_moments(&phi);
    assert!(c.iter().all(|v| v.abs() < 1e-10), "{c:?}");
    let canon = canonicalize(&psi).unwrap();
    let centered = gaussian(grid, 1.0, &[0.0, 0.0]);
    assert!(canon.rel_distance(&centered).unwrap() < 1e-10);
}
