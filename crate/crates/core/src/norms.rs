//! Weighted Lebesgue norms, moments and spectral derivatives.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Side};
use crate::transform::transform_in_place;

/// `‖⟨c⟩^s f‖_{L^p}` (or `|c|^s` when homogeneous), summed over derivatives up
/// to `derivative_order` as in `X^{ℓ,N} = Σ_{|α|≤N} ‖∇^α f‖_{L^{∞,ℓ}}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedNormSpec {
    pub p: f64,
    pub s: f64,
    pub homogeneous: bool,
    pub derivative_order: u32,
}

impl WeightedNormSpec {
    pub fn lebesgue(p: f64, s: f64) -> Self {
        Self {
            p,
            s,
            homogeneous: false,
            derivative_order: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "norm exponent p = {} must be >= 1",
                self.p
            )));
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter("weight exponent must be finite".into()));
        }
        Ok(())
    }

    /// Weight at a point with squared radius `r2`.
    pub fn weight(&self, r2: f64) -> f64 {
        if self.homogeneous {
            if r2 == 0.0 {
                // The origin is a measure-zero node; a singular weight is dropped.
                if self.s < 0.0 {
                    0.0
                } else if self.s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                r2.powf(self.s / 2.0)
            }
        } else {
            (1.0 + r2).powf(self.s / 2.0)
        }
    }
}

fn lp_of(values: impl Iterator<Item = f64>, p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        (values.map(|v| v.powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// Multi-indices with total order at most `order` in dimension `d`.
fn multi_indices(d: usize, order: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=order {
        for b in 0..=(if d > 1 { order - a } else { 0 }) {
            for c in 0..=(if d > 2 { order - a - b } else { 0 }) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

pub fn weighted_norm(f: &Field, spec: &WeightedNormSpec) -> Result<f64> {
    spec.validate()?;
    let grid = f.grid();
    let r2 = grid.radius_sq(f.side());
    let cell = grid.cell(f.side());
    let mut total = 0.0;
    for alpha in multi_indices(grid.dim(), spec.derivative_order) {
        let df;
        let field = if alpha == [0, 0, 0] {
            f
        } else {
            df = derivative(f, &alpha[..grid.dim()])?;
            &df
        };
        total += lp_of(
            field
                .values()
                .iter()
                .zip(&r2)
                .map(|(v, &r)| v.norm() * spec.weight(r)),
            spec.p,
            cell,
        );
    }
    Ok(total)
}

/// Spectral partial derivative `∂^α f` in the field's own variable.
///
/// On the frequency side `∂_ξ g = ℱ[-ix ǧ]`; on the physical side
/// `∂_x ǧ = ℱ⁻¹[iξ g]`. For odd orders the unpaired boundary plane of the
/// dual grid is zeroed so real symmetric inputs stay symmetric.
pub fn derivative(f: &Field, alpha: &[u32]) -> Result<Field> {
    let grid = *f.grid();
    let d = grid.dim();
    if alpha.len() != d {
        return Err(Error::InvalidParameter(format!(
            "multi-index has length {}, expected {d}",
            alpha.len()
        )));
    }
    let side = f.side();
    let dual = side.dual();
    let sign = if side == Side::Frequency { -1.0 } else { 1.0 };
    let mut vals = f.values().to_vec();
    transform_in_place(&mut vals, &grid, side);
    for (k, v) in vals.iter_mut().enumerate() {
        let idx = grid.index_of(k);
        let mut m = Complex64::new(1.0, 0.0);
        for a in 0..d {
            if alpha[a] == 0 {
                continue;
            }
            if alpha[a] % 2 == 1 && idx[a] == 0 {
                m = Complex64::new(0.0, 0.0);
                break;
            }
            let c = Complex64::new(0.0, sign * grid.coord(dual, idx[a]));
            m *= c.powu(alpha[a]);
        }
        *v *= m;
    }
    transform_in_place(&mut vals, &grid, dual);
    Field::from_values(grid, side, vals)
}

/// `Σ c^α |f|² h^d` (or `Σ c^α f² h^d` without conjugation) over the field's
/// own coordinates.
pub fn moment(f: &Field, alpha: &[u32], conjugate_pair: bool) -> Result<Complex64> {
    let grid = f.grid();
    let d = grid.dim();
    if alpha.len() != d {
        return Err(Error::InvalidParameter(format!(
            "multi-index has length {}, expected {d}",
            alpha.len()
        )));
    }
    if alpha.iter().sum::<u32>() > 2 {
        return Err(Error::InvalidParameter("moment order must be <= 2".into()));
    }
    let side = f.side();
    let s: Complex64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let p = grid.point(side, k);
            let w: f64 = (0..d).map(|a| p[a].powi(alpha[a] as i32)).product();
            let q = if conjugate_pair {
                Complex64::new(v.norm_sqr(), 0.0)
            } else {
                v * v
            };
            q * w
        })
        .sum();
    Ok(s * grid.cell(side))
}

/// Mass `Σ|f|²h^d`.
pub fn mass(f: &Field) -> f64 {
    f.norm_sq()
}

/// First moments `Σ c_a |f|² h^d` for each axis.
pub fn first_moments(f: &Field) -> Vec<f64> {
    let grid = f.grid();
    let d = grid.dim();
    let side = f.side();
    let mut out = vec![0.0; d];
    for (k, v) in f.values().iter().enumerate() {
        let p = grid.point(side, k);
        let w = v.norm_sqr();
        for a in 0..d {
            out[a] += p[a] * w;
        }
    }
    let cell = grid.cell(side);
    out.iter_mut().for_each(|v| *v *= cell);
    out
}

/// `Σ |c|² |f|² h^d`.
pub fn second_moment(f: &Field) -> f64 {
    let r2 = f.grid().radius_sq(f.side());
    f.values()
        .iter()
        .zip(&r2)
        .map(|(v, r)| v.norm_sqr() * r)
        .sum::<f64>()
        * f.grid().cell(f.side())
}

/// `∫ (ξ_i ∂_j − ξ_j ∂_i) g · conj(g) dξ`, evaluated literally (complex).
pub fn angular_momentum(g: &Field, i: usize, j: usize) -> Result<Complex64> {
    g.expect_side(Side::Frequency)?;
    let d = g.grid().dim();
    if i == j || i >= d || j >= d {
        return Err(Error::InvalidParameter(format!(
            "angular momentum needs distinct axes below {d}, got ({i}, {j})"
        )));
    }
    let unit = |a: usize| {
        let mut e = vec![0u32; d];
        e[a] = 1;
        e
    };
    let dj = derivative(g, &unit(j))?;
    let di = derivative(g, &unit(i))?;
    let grid = g.grid();
    let s: Complex64 = (0..grid.len())
        .map(|k| {
            let p = grid.point(Side::Frequency, k);
            (dj.values()[k] * p[i] - di.values()[k] * p[j]) * g.values()[k].conj()
        })
        .sum();
    Ok(s * grid.cell(Side::Frequency))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 2).len(), 3);
        assert_eq!(multi_indices(2, 1).len(), 3);
        assert_eq!(multi_indices(3, 2).len(), 10);
    }

    #[test]
    fn rejects_small_p() {
        let g = GridSpec::new(2, 8, 2.0).unwrap();
        let f = Field::zeros(g, Side::Frequency);
        assert!(weighted_norm(&f, &WeightedNormSpec::lebesgue(0.5, 0.0)).is_err());
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = GridSpec::new(1, 128, 12.0).unwrap();
        let f = Field::from_fn(g, Side::Frequency, |p| {
            Complex64::new((-p[0] * p[0] / 2.0).exp(), 0.0)
        });
        let df = derivative(&f, &[1]).unwrap();
        for (k, v) in df.values().iter().enumerate() {
            let x = g.coord(Side::Frequency, k);
            assert!((v - Complex64::new(-x * (-x * x / 2.0).exp(), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn homogeneous_origin_weight() {
        let spec = WeightedNormSpec {
            p: 2.0,
            s: -1.0,
            homogeneous: true,
            derivative_order: 0,
        };
        assert_eq!(spec.weight(0.0), 0.0);
        assert!((spec.weight(4.0) - 0.5).abs() < 1e-15);
    }
}
