use crlab_core::init::{gaussian, random_smooth, two_bumps};
use crlab_core::operator::{free_propagate, MultiplierOperator, ZeroOperator};
use crlab_core::oracle::{oracle_t_at, PointOracleConfig};
use crlab_core::symmetry::{apply_symmetry, SymmetryKind};
use crlab_core::*;
use proptest::prelude::*;

fn workspace(d: usize, n: usize, l: f64, k: usize) -> OperatorWorkspace {
    let grid = GridSpec::new(d, n, l).unwrap();
    let q = QuadratureScheme::new(QuadratureRule::PseudoConformalSplit, k, 0.5).unwrap();
    OperatorWorkspace::new(grid, q, Dealias::ZeroPad2x).unwrap()
}

#[test]
fn gaussian_is_an_eigenfunction_in_two_dimensions() {
    let ws = workspace(2, 64, 10.0, 64);
    let g = gaussian(*ws.grid(), 1.0, &[0.0, 0.0]);
    let t = ws.apply(&g).unwrap();
    let origin = ws.grid().origin();
    let mu = t.values()[origin].re;
    let e = t.rel_distance(&g.scaled(mu.into())).unwrap();
    assert!(e < 1e-8, "{e}");
    let unit = |p: &[f64]| Complex64::new((-(p[0] * p[0] + p[1] * p[1]) / 2.0).exp(), 0.0);
    let o = oracle_t_at(&unit, &[0.0, 0.0], &PointOracleConfig::default()).unwrap();
    assert!((o.re - mu).abs() / o.re < 1e-3);
}

#[test]
fn free_gaussian_propagation_closed_form() {
    // e^{isΔ}e^{-x²/2} = (1+2is)^{-1/2} e^{-x²/(2(1+2is))} for the multiplier e^{-is|ξ|²}.
    let grid = GridSpec::new(1, 256, 16.0).unwrap();
    let g = gaussian(grid, 1.0, &[0.0]);
    for s in [0.3, 1.7] {
        let u = free_propagate(&g, s).unwrap();
        let z = Complex64::new(1.0, 2.0 * s);
        let mut worst = 0.0f64;
        for (k, v) in u.values().iter().enumerate() {
            let x = grid.coord(Side::Physical, k);
            if x.abs() <= 4.0 {
                let exact = z.powf(-0.5) * (-x * x / (2.0 * z)).exp();
                worst = worst.max((v - exact).norm());
            }
        }
        assert!(worst < 1e-8, "s = {s}: {worst}");
        assert!((u.norm_sq() - g.norm_sq()).abs() < 1e-12 * g.norm_sq());
    }
}

#[test]
fn gaussian_hamiltonian_closed_form() {
    // |e^{isΔ}ǧ|⁴ = |1+2is|^{-4} e^{-2|x|²/(1+4s²)} in d = 2, so the x-integral
    // is π/(2(1+4s²)) and ℋ = (2π/2)·(π/2)·(π/2) = π³/4.
    let ws = workspace(2, 64, 10.0, 129);
    let g = gaussian(*ws.grid(), 1.0, &[0.0, 0.0]);
    let h = ws.hamiltonian(&g).unwrap();
    let exact = std::f64::consts::PI.powi(3) / 4.0;
    assert!((h - exact).abs() < 1e-6 * exact, "{h} vs {exact}");
}

#[test]
fn phase_and_homogeneity() {
    let ws = workspace(2, 16, 4.0, 32);
    let g = two_bumps(*ws.grid());
    let c = Complex64::from_polar(1.7, 0.9);
    let t = ws.apply(&g).unwrap();
    let tc = ws.apply(&g.scaled(c)).unwrap();
    let e = tc.rel_distance(&t.scaled(c * c.norm_sqr())).unwrap();
    assert!(e < 1e-13, "{e}");
    let h = ws.hamiltonian(&g).unwrap();
    let hc = ws.hamiltonian(&g.scaled(c)).unwrap();
    assert!((hc - c.norm_sqr().powi(2) * h).abs() < 1e-12 * hc.abs());
}

fn equivariance(ws: &OperatorWorkspace, g: &Field, sym: &SymmetryKind) -> f64 {
    let lhs = ws.apply(&apply_symmetry(g, sym).unwrap()).unwrap();
    let rhs = apply_symmetry(&ws.apply(g).unwrap(), sym).unwrap();
    lhs.rel_distance(&rhs).unwrap()
}

#[test]
fn operator_commutes_with_grid_exact_symmetries() {
    // Quadratic modulation shifts the s-integral, so it needs the finer rule.
    let ws = workspace(2, 64, 10.0, 129);
    let g = gaussian(*ws.grid(), 0.9, &[0.3125, -0.3125]);
    for s in ["translate 3 -2", "modulate 2 1", "quadratic 0.4", "rotate -2 1", "rotate 2 1"] {
        let e = equivariance(&ws, &g, &SymmetryKind::parse(s, 2).unwrap());
        assert!(e < 1e-7, "{s}: {e}");
    }
    // At n = 32 the d = 3 physical box bounds the commutation error for
    // lattice translations near 1e-6; rotations permute nodes exactly.
    let ws3 = workspace(3, 32, 6.0, 64);
    let g3 = gaussian(*ws3.grid(), 1.0, &[0.375, 0.0, -0.375]);
    let e = equivariance(&ws3, &g3, &SymmetryKind::parse("rotate 3 -1 2", 3).unwrap());
    assert!(e < 1e-13, "{e}");
    let e = equivariance(&ws3, &g3, &SymmetryKind::parse("translate 1 0 -2", 3).unwrap());
    assert!(e < 1e-5, "{e}");
}

#[test]
fn stand_in_operators() {
    let grid = GridSpec::new(2, 8, 2.0).unwrap();
    let g = random_smooth(grid, 1.0, 5, false);
    assert_eq!(ZeroOperator::new(grid).apply(&g).unwrap().norm(), 0.0);
    let m = MultiplierOperator::new(grid, 0.5, 2.0);
    let t = m.apply(&g).unwrap();
    let expect = g.map_with_coords(|p, v| v * (0.5 * (p[0] * p[0] + p[1] * p[1]) + 2.0));
    assert!(t.rel_distance(&expect).unwrap() < 1e-15);
    assert!((t.inner(&g).unwrap().re - 2.0 * m.hamiltonian(&g).unwrap()).abs() < 1e-12);
}

#[test]
fn quadrature_refinement_converges() {
    let g = two_bumps(GridSpec::new(2, 32, 8.0).unwrap());
    let a = workspace(2, 32, 8.0, 64).apply(&g).unwrap();
    let b = workspace(2, 32, 8.0, 129).apply(&g).unwrap();
    let e = a.rel_distance(&b).unwrap();
    assert!(e < 1e-6, "{e}");
}

#[test]
fn trilinear_form_is_symmetric_in_the_outer_slots() {
    let ws = workspace(2, 16, 4.0, 32);
    let grid = *ws.grid();
    let f = random_smooth(grid, 1.0, 1, false);
    let g = random_smooth(grid, 1.0, 2, false);
    let h = random_smooth(grid, 1.0, 3, false);
    let a = ws.trilinear_t(&f, &g, &h).unwrap();
    let b = ws.trilinear_t(&h, &g, &f).unwrap();
    assert!(a.rel_distance(&b).unwrap() < 1e-13);
    let diag = ws.trilinear_t(&f, &f, &f).unwrap();
    assert!(diag.rel_distance(&ws.apply(&f).unwrap()).unwrap() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pairing_is_twice_the_hamiltonian(seed in any::<u64>(), three in any::<bool>()) {
        let ws = if three { workspace(3, 8, 3.0, 16) } else { workspace(2, 16, 4.0, 16) };
        let g = random_smooth(*ws.grid(), 1.0, seed, false);
        let p = ws.apply(&g).unwrap().inner(&g).unwrap().re;
        let h = ws.hamiltonian(&g).unwrap();
        prop_assert!(h > 0.0);
        prop_assert!((p - 2.0 * h).abs() <= 1e-10 * p.abs());
    }
}
