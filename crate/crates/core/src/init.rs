//! Initial data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Field, GridSpec, Side};

/// `exp(-|ξ - c|² / (2w²))`.
pub fn gaussian(grid: GridSpec, width: f64, center: &[f64]) -> Field {
    Field::from_fn(grid, Side::Frequency, |p| {
        let r2: f64 = p
            .iter()
            .enumerate()
            .map(|(a, x)| (x - center.get(a).copied().unwrap_or(0.0)).powi(2))
            .sum();
        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    })
}

/// A fixed, non-stationary datum with nonzero momentum, position and
/// angular momentum: a Gaussian plus an offset, modulated vortex bump.
pub fn two_bumps(grid: GridSpec) -> Field {
    let d = grid.dim();
    Field::from_fn(grid, Side::Frequency, |p| {
        let a: f64 = p
            .iter()
            .enumerate()
            .map(|(i, x)| (x - if i == 0 { 0.6 } else { 0.0 }).powi(2))
            .sum();
        let b: f64 = p
            .iter()
            .enumerate()
            .map(|(i, x)| (x + if i == 1 { 0.8 } else { 0.0 }).powi(2))
            .sum();
        let vortex = if d >= 2 {
            Complex64::new(p[0], p[1])
        } else {
            Complex64::new(p[0], 0.0)
        };
        let modulation = Complex64::from_polar(1.0, 0.7 * p[0] - 0.4 * p[d - 1]);
        Complex64::new((-a / 2.0).exp(), 0.0)
            + vortex * modulation * (0.6 * (-b / 1.6).exp())
    })
}

/// Band-limited noise: a Gaussian envelope of width `width` carrying a
/// random superposition of a few physical translations. Smooth and
/// decaying for every seed; `even` symmetrizes `g(ξ) + g(-ξ)`.
pub fn random_smooth(grid: GridSpec, width: f64, seed: u64, even: bool) -> Field {
    let d = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(Complex64, [f64; 3])> = (0..6)
        .map(|_| {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let mut x = [0.0; 3];
            for v in x.iter_mut().take(d) {
                *v = rng.gen_range(-1.5..1.5);
            }
            (c, x)
        })
        .collect();
    let eval = |p: &[f64]| -> Complex64 {
        let r2: f64 = p.iter().map(|x| x * x).sum();
        let env = (-r2 / (2.0 * width * width)).exp();
        modes
            .iter()
            .map(|(c, x)| {
                let phase: f64 = (0..d).map(|a| x[a] * p[a]).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum::<Complex64>()
            * env
    };
    Field::from_fn(grid, Side::Frequency, |p| {
        if even {
            let q: Vec<f64> = p.iter().map(|x| -x).collect();
            (eval(p) + eval(&q)) * 0.5
        } else {
            eval(p)
        }
    })
}

/// Unit-modulus random phase field `e^{iθ(ξ)}` with a smooth random `θ`.
pub fn smooth_phase(grid: GridSpec, seed: u64) -> Field {
    let d = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, [f64; 3], f64)> = (0..5)
        .map(|_| {
            let mut k = [0.0; 3];
            for v in k.iter_mut().take(d) {
                *v = rng.gen_range(-0.8..0.8);
            }
            (rng.gen_range(0.5..2.0), k, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    Field::from_fn(grid, Side::Frequency, |p| {
        let theta: f64 = modes
            .iter()
            .map(|(a, k, ph)| a * ((0..d).map(|i| k[i] * p[i]).sum::<f64>() + ph).cos())
            .sum();
        Complex64::from_polar(1.0, theta)
    })
}
