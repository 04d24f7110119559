//! Brute-force evaluations of `𝒯` that share no code with the spectral path.
//!
//! With `a = ξ₁ − ξ`, `b = ξ₃ − ξ` and `ξ₂ = ξ₁ + ξ₃ − ξ` the resonance
//! function is `Ω = −2a·b`, so the delta on `Ω` restricts `b` to the
//! hyperplane orthogonal to `a` with density `1/(2|a|)`:
//!
//! ```text
//! 𝒯(g)(ξ) = ∫ (2|a|)^{-1} ∫_{b ⟂ a} g(ξ+a) conj(g(ξ+a+b)) g(ξ+b) db da.
//! ```
//!
//! `a` is integrated in polar coordinates (Gauss–Legendre in `|a|`, which
//! never samples the removable singularity at 0), `b` by a tensor
//! Gauss–Legendre rule on the hyperplane.

use std::f64::consts::PI;
use std::ops::Neg;

use num_complex::{Complex, Complex64};
use num_traits::Num;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Side};
use crate::quadrature::gauss_legendre;
use crate::transform::refine_frequency;

/// Exact or floating scalars the lattice oracle can run on.
pub trait LatticeScalar: Clone + Num + Neg<Output = Self> {}

impl<T: Clone + Num + Neg<Output = T>> LatticeScalar for T {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointOracleConfig {
    pub radial_nodes: usize,
    /// Directions on the circle (d = 2) or polar nodes on the sphere (d = 3,
    /// with twice as many azimuthal nodes).
    pub sphere_nodes: usize,
    pub hyperplane_nodes: usize,
    pub domain_cap: f64,
}

impl Default for PointOracleConfig {
    fn default() -> Self {
        Self {
            radial_nodes: 48,
            sphere_nodes: 48,
            hyperplane_nodes: 48,
            domain_cap: 8.0,
        }
    }
}

impl PointOracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 8 || self.sphere_nodes < 8 || self.hyperplane_nodes < 8 {
            return Err(Error::InvalidParameter("oracle node counts must be >= 8".into()));
        }
        if !(self.domain_cap.is_finite() && self.domain_cap > 0.0) {
            return Err(Error::InvalidParameter("oracle domain cap must be positive".into()));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self {
            radial_nodes: 2 * self.radial_nodes,
            sphere_nodes: 2 * self.sphere_nodes,
            hyperplane_nodes: 2 * self.hyperplane_nodes,
            domain_cap: self.domain_cap,
        }
    }
}

/// Unit directions with weights summing to the sphere area, and for each an
/// orthonormal basis of the orthogonal hyperplane.
fn directions(d: usize, m: usize) -> Vec<(f64, [f64; 3], [[f64; 3]; 2])> {
    match d {
        2 => (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                let (s, c) = t.sin_cos();
                (2.0 * PI / m as f64, [c, s, 0.0], [[-s, c, 0.0], [0.0; 3]])
            })
            .collect(),
        _ => {
            let (z, wz) = gauss_legendre(m, -1.0, 1.0);
            let np = 2 * m;
            let mut out = Vec::with_capacity(m * np);
            for (ct, w) in z.iter().zip(&wz) {
                let st = (1.0 - ct * ct).sqrt();
                for k in 0..np {
                    let p = 2.0 * PI * k as f64 / np as f64;
                    let (sp, cp) = p.sin_cos();
                    out.push((
                        w * 2.0 * PI / np as f64,
                        [st * cp, st * sp, *ct],
                        [[ct * cp, ct * sp, -st], [-sp, cp, 0.0]],
                    ));
                }
            }
            out
        }
    }
}

/// `𝒯(g, g, g)(ξ)` by nested quadrature over the resonant manifold.
pub fn oracle_t_at<F>(g: &F, xi: &[f64], cfg: &PointOracleConfig) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    cfg.validate()?;
    let d = xi.len();
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "oracle supports d = 2, 3; got {d}"
        )));
    }
    let cap = cfg.domain_cap;
    let (rn, rw) = gauss_legendre(cfg.radial_nodes, 0.0, cap);
    let (tn, tw) = gauss_legendre(cfg.hyperplane_nodes, -cap, cap);
    let dirs = directions(d, cfg.sphere_nodes);
    let plane: Vec<(f64, [f64; 2])> = if d == 2 {
        tn.iter().zip(&tw).map(|(&t, &w)| (w, [t, 0.0])).collect()
    } else {
        let mut v = Vec::with_capacity(tn.len() * tn.len());
        for (&t1, &w1) in tn.iter().zip(&tw) {
            for (&t2, &w2) in tn.iter().zip(&tw) {
                v.push((w1 * w2, [t1, t2]));
            }
        }
        v
    };

    let shells: Vec<Result<Complex64>> = rn
        .par_iter()
        .zip(rw.par_iter())
        .map(|(&r, &wr)| {
            let radial = wr * r.powi(d as i32 - 2) / 2.0;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut pa = [0.0; 3];
            let mut pb = [0.0; 3];
            let mut pab = [0.0; 3];
            for (wd, w, basis) in &dirs {
                for i in 0..d {
                    pa[i] = xi[i] + r * w[i];
                }
                let ga = g(&pa[..d]);
                let mut inner = Complex64::new(0.0, 0.0);
                for (wb, t) in &plane {
                    for i in 0..d {
                        let b = t[0] * basis[0][i] + t[1] * basis[1][i];
                        pb[i] = xi[i] + b;
                        pab[i] = pa[i] + b;
                    }
                    inner += g(&pab[..d]).conj() * g(&pb[..d]) * *wb;
                }
                acc += ga * inner * *wd;
            }
            if acc.re.is_finite() && acc.im.is_finite() {
                Ok(acc * radial)
            } else {
                Err(Error::NonFinite(format!("oracle integrand at |a| = {r}")))
            }
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for s in shells {
        total += s?;
    }
    Ok(total)
}

/// Smooth off-grid evaluation of a frequency field: trigonometric refinement
/// by zero-padding followed by local tensor Lagrange interpolation. The field
/// is taken to vanish outside its box.
#[derive(Clone, Debug)]
pub struct FieldInterpolant {
    fine: Field,
    order: usize,
}

impl FieldInterpolant {
    pub fn new(g: &Field, refine: usize) -> Result<Self> {
        g.expect_side(Side::Frequency)?;
        if refine == 0 {
            return Err(Error::InvalidParameter("refinement factor must be >= 1".into()));
        }
        Ok(Self {
            fine: refine_frequency(g, refine)?,
            order: 8,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.fine.grid()
    }

    pub fn eval(&self, p: &[f64]) -> Complex64 {
        let grid = self.fine.grid();
        let d = grid.dim();
        let n = grid.n() as isize;
        let h = grid.h_freq();
        let mut starts = [0isize; 3];
        let mut weights = [[0.0f64; 16]; 3];
        for a in 0..d {
            let t = p[a] / h + (n / 2) as f64;
            let base = t.floor() as isize - (self.order as isize / 2 - 1);
            starts[a] = base;
            for (i, w) in weights[a].iter_mut().take(self.order).enumerate() {
                let xi = (base + i as isize) as f64;
                let mut l = 1.0;
                for j in 0..self.order {
                    if j != i {
                        let xj = (base + j as isize) as f64;
                        l *= (t - xj) / (xi - xj);
                    }
                }
                *w = l;
            }
        }
        let vals = self.fine.values();
        let mut acc = Complex64::new(0.0, 0.0);
        let m = self.order;
        let count = m.pow(d as u32);
        for flat in 0..count {
            let mut rest = flat;
            let mut idx = 0usize;
            let mut w = 1.0;
            let mut inside = true;
            for a in 0..d {
                let o = rest % m;
                rest /= m;
                let i = starts[a] + o as isize;
                if i < 0 || i >= n {
                    inside = false;
                    break;
                }
                w *= weights[a][o];
                idx = idx * n as usize + i as usize;
            }
            if inside {
                acc += vals[idx] * w;
            }
        }
        acc
    }
}

/// Values on `ℤᵈ ∩ [-R, R]ᵈ`, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField<T> {
    d: usize,
    radius: i64,
    values: Vec<Complex<T>>,
}

impl<T: LatticeScalar> LatticeField<T> {
    pub fn from_fn(d: usize, radius: i64, f: impl Fn(&[i64]) -> Complex<T>) -> Self {
        let side = (2 * radius + 1) as usize;
        let len = side.pow(d as u32);
        let values = (0..len)
            .map(|k| f(&Self::point_of(d, radius, k)[..d]))
            .collect();
        Self { d, radius, values }
    }

    pub fn zeros(d: usize, radius: i64) -> Self {
        Self::from_fn(d, radius, |_| Complex::new(T::zero(), T::zero()))
    }

    fn point_of(d: usize, radius: i64, flat: usize) -> [i64; 3] {
        let side = (2 * radius + 1) as usize;
        let mut p = [0i64; 3];
        let mut rest = flat;
        for a in (0..d).rev() {
            p[a] = (rest % side) as i64 - radius;
            rest /= side;
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn point(&self, flat: usize) -> [i64; 3] {
        Self::point_of(self.d, self.radius, flat)
    }

    pub fn index(&self, p: &[i64]) -> Option<usize> {
        let side = 2 * self.radius + 1;
        let mut idx = 0i64;
        for &c in &p[..self.d] {
            if c.abs() > self.radius {
                return None;
            }
            idx = idx * side + c + self.radius;
        }
        Some(idx as usize)
    }

    pub fn get(&self, p: &[i64]) -> Option<&Complex<T>> {
        self.index(p).map(|i| &self.values[i])
    }

    /// `Σ a · conj(b)`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.values
            .iter()
            .zip(&other.values)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.clone() * conj(b)
            })
    }
}

fn conj<T: LatticeScalar>(z: &Complex<T>) -> Complex<T> {
    Complex::new(z.re.clone(), z.im.clone().neg())
}

fn check_box(d: usize, radius: i64) -> Result<()> {
    let limit = match d {
        1 => 64,
        2 => 8,
        3 => 3,
        _ => return Err(Error::InvalidParameter(format!("lattice dimension {d}"))),
    };
    if radius < 0 || radius > limit {
        return Err(Error::InvalidParameter(format!(
            "lattice box radius {radius} exceeds the limit {limit} for d = {d}"
        )));
    }
    Ok(())
}

fn sq(p: &[i64]) -> i64 {
    p.iter().map(|c| c * c).sum()
}

/// `Σ_{ξ₁−ξ₂+ξ₃=ξ, Ω=0} g(ξ₁) conj(g(ξ₂)) g(ξ₃)` with every frequency in the
/// box, tested exactly in integers.
pub fn discrete_resonant_t<T: LatticeScalar>(g: &LatticeField<T>) -> Result<LatticeField<T>> {
    let d = g.d;
    check_box(d, g.radius)?;
    let len = g.values.len();
    let mut out = LatticeField::zeros(d, g.radius);
    let mut p2 = [0i64; 3];
    for k in 0..len {
        let xi = g.point(k);
        let mut acc = Complex::new(T::zero(), T::zero());
        for i1 in 0..len {
            let p1 = g.point(i1);
            for i3 in 0..len {
                let p3 = g.point(i3);
                for a in 0..d {
                    p2[a] = p1[a] + p3[a] - xi[a];
                }
                let Some(i2) = g.index(&p2) else { continue };
                if sq(&p1[..d]) - sq(&p2[..d]) + sq(&p3[..d]) - sq(&xi[..d]) != 0 {
                    continue;
                }
                acc = acc + g.values[i1].clone() * conj(&g.values[i2]) * g.values[i3].clone();
            }
        }
        out.values[k] = acc;
    }
    Ok(out)
}

/// `Σ_{ξ₁−ξ₂+ξ₃−ξ₄=0, Ω=0} g₁ ḡ₂ g₃ ḡ₄`, i.e. twice the lattice Hamiltonian.
pub fn discrete_quartic_sum<T: LatticeScalar>(g: &LatticeField<T>) -> Result<Complex<T>> {
    let d = g.d;
    check_box(d, g.radius)?;
    let len = g.values.len();
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut p4 = [0i64; 3];
    for i1 in 0..len {
        let p1 = g.point(i1);
        for i2 in 0..len {
            let p2 = g.point(i2);
            for i3 in 0..len {
                let p3 = g.point(i3);
                for a in 0..d {
                    p4[a] = p1[a] - p2[a] + p3[a];
                }
                let Some(i4) = g.index(&p4) else { continue };
                if sq(&p1[..d]) - sq(&p2[..d]) + sq(&p3[..d]) - sq(&p4[..d]) != 0 {
                    continue;
                }
                acc = acc
                    + g.values[i1].clone()
                        * conj(&g.values[i2])
                        * g.values[i3].clone()
                        * conj(&g.values[i4]);
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d3_directions_cover_the_sphere() {
        let dirs = directions(3, 8);
        let area: f64 = dirs.iter().map(|(w, _, _)| w).sum();
        assert!((area - 4.0 * PI).abs() < 1e-12);
        for (_, w, b) in &dirs {
            let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            assert!(dot(w, &b[0]).abs() < 1e-14 && dot(w, &b[1]).abs() < 1e-14);
            assert!(dot(&b[0], &b[1]).abs() < 1e-14);
            assert!((dot(&b[0], &b[0]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn guardrail() {
        let g = LatticeField::<i64>::zeros(2, 9);
        assert!(discrete_resonant_t(&g).is_err());
        let g = LatticeField::<i64>::zeros(3, 4);
        assert!(discrete_quartic_sum(&g).is_err());
    }

    #[test]
    fn rejects_small_configs() {
        let cfg = PointOracleConfig {
            radial_nodes: 4,
            ..Default::default()
        };
        assert!(oracle_t_at(&|_: &[f64]| Complex64::new(0.0, 0.0), &[0.0, 0.0], &cfg).is_err());
    }
}
