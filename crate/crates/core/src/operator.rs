//! The free propagator, the resonant trilinear operator `𝒯` and the
//! Hamiltonian `ℋ`, all through the physical-space representation
//!
//! ```text
//! 𝒯(g₁,g₂,g₃) = (2π)^{d-1} ∫ e^{is|ξ|²} ℱ[u₁ ū₂ u₃](ξ) ds,   u = e^{isΔ}ǧ,
//! ℋ(g)        = (2π)^{d-1}/2 ∫∫ |e^{isΔ}ǧ|⁴ dx ds.
//! ```
//!
//! For `|s| > S` the lens transform gives
//! `|e^{isΔ}ǧ|(x) = (2|s|)^{-d/2} |ℱ[e^{iσ|·|²}ǧ]|(x/2s)` with `σ = 1/(4s)`,
//! which turns the exterior into `2^{d-2} ∫_{|σ|<1/(4S)} |σ|^{d-2} (…) dσ`
//! evaluated entirely from `ǧ`. The same change of variables carries over to
//! `𝒯` by duality.
//!
//! Products are formed on grids padded by two in the variable being
//! multiplied (frequency half width for the direct part, physical half width
//! for the exterior part), so the cubic product is not aliased. The unpaired
//! boundary planes are projected out on both sides, which keeps the discrete
//! operator exactly self-dual and maps real physical data to real output.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Side};
use crate::quadrature::{QuadratureRule, QuadratureScheme};
use crate::transform::{
    centered_embedding, to_physical, transform_in_place, transform_in_place_pruned, Prune,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dealias {
    None,
    TwoThirds,
    ZeroPad2x,
}

impl Dealias {
    pub fn name(self) -> &'static str {
        match self {
            Dealias::None => "none",
            Dealias::TwoThirds => "two_thirds",
            Dealias::ZeroPad2x => "zero_pad_2x",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Dealias::None),
            "two_thirds" => Some(Dealias::TwoThirds),
            "zero_pad_2x" => Some(Dealias::ZeroPad2x),
            _ => None,
        }
    }
}

/// The cubic right-hand side as seen by the evolution and stationary
/// solvers. Implemented by the spectral workspace and by simple stand-ins.
pub trait CubicOperator: Sync {
    fn grid(&self) -> &GridSpec;
    /// `𝒯(g, g, g)`.
    fn apply(&self, g: &Field) -> Result<Field>;
    /// `ℋ(g)`, normalized so that `Re⟨apply(g), g⟩ = 2ℋ(g)`.
    fn hamiltonian(&self, g: &Field) -> Result<f64>;
    /// Right-hand side of the virial identity for `d/dt ‖∇g‖²`.
    fn virial_rhs(&self, g: &Field) -> Result<f64>;
}

/// `𝒯 ≡ 0`: free evolution is the identity.
#[derive(Clone, Debug)]
pub struct ZeroOperator {
    grid: GridSpec,
}

impl ZeroOperator {
    pub fn new(grid: GridSpec) -> Self {
        Self { grid }
    }
}

impl CubicOperator for ZeroOperator {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn apply(&self, g: &Field) -> Result<Field> {
        g.expect_side(Side::Frequency)?;
        Ok(Field::zeros(self.grid, Side::Frequency))
    }

    fn hamiltonian(&self, _g: &Field) -> Result<f64> {
        Ok(0.0)
    }

    fn virial_rhs(&self, _g: &Field) -> Result<f64> {
        Ok(0.0)
    }
}

/// `𝒯(g) = (λ|ξ|² + μ) g`, for which every field is stationary.
#[derive(Clone, Debug)]
pub struct MultiplierOperator {
    grid: GridSpec,
    lambda: f64,
    mu: f64,
}

impl MultiplierOperator {
    pub fn new(grid: GridSpec, lambda: f64, mu: f64) -> Self {
        Self { grid, lambda, mu }
    }
}

impl CubicOperator for MultiplierOperator {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn apply(&self, g: &Field) -> Result<Field> {
        g.expect_side(Side::Frequency)?;
        let k2 = self.grid.radius_sq(Side::Frequency);
        let mut out = g.clone();
        for (v, r) in out.values_mut().iter_mut().zip(&k2) {
            *v *= self.lambda * r + self.mu;
        }
        Ok(out)
    }

    fn hamiltonian(&self, g: &Field) -> Result<f64> {
        Ok(0.5 * self.apply(g)?.inner(g)?.re)
    }

    fn virial_rhs(&self, _g: &Field) -> Result<f64> {
        Ok(0.0)
    }
}

/// Zero-padding lift from the working grid to the grid the product lives on.
#[derive(Clone, Debug)]
struct Lift {
    fine: GridSpec,
    map: Vec<usize>,
    /// Index block of the embedded coarse grid, for pruned transforms.
    block: (usize, usize),
}

impl Lift {
    fn new(coarse: &GridSpec, fine: GridSpec) -> Self {
        let map = centered_embedding(coarse.n(), fine.n(), coarse.dim());
        let lo = (fine.n() - coarse.n()) / 2;
        Self {
            fine,
            map,
            block: (lo, lo + coarse.n()),
        }
    }

    fn input(&self) -> Prune {
        Prune::Input(self.block.0, self.block.1)
    }

    fn output(&self) -> Prune {
        Prune::Output(self.block.0, self.block.1)
    }
}

/// Above this many cached phase samples the chirps are recomputed per node.
const CHIRP_CACHE_LIMIT: usize = 1 << 22;

/// Everything needed to evaluate `𝒯` and `ℋ` on one grid.
#[derive(Clone, Debug)]
pub struct OperatorWorkspace {
    grid: GridSpec,
    quad: QuadratureScheme,
    dealias: Dealias,
    deterministic: bool,
    direct: Lift,
    inverted: Lift,
    freq_mask: Vec<bool>,
    phys_mask: Vec<bool>,
    k2: Vec<f64>,
    x2: Vec<f64>,
    /// `w_k` for the direct nodes.
    direct_weights: Vec<f64>,
    /// `2^{d-2}|σ_j|^{d-2} w_j` for the exterior nodes.
    inverted_weights: Vec<f64>,
    direct_chirps: Option<Vec<Vec<Complex64>>>,
    inverted_chirps: Option<Vec<Vec<Complex64>>>,
}

impl OperatorWorkspace {
    pub fn new(grid: GridSpec, quad: QuadratureScheme, dealias: Dealias) -> Result<Self> {
        let d = grid.dim();
        if quad.rule() == QuadratureRule::PseudoConformalSplit && d < 2 {
            return Err(Error::InvalidParameter(
                "the split s-rule needs dimension >= 2 (the exterior weight |σ|^{d-2} is not integrable for d = 1)"
                    .into(),
            ));
        }
        let n = grid.n();
        let (direct_fine, inverted_fine) = match dealias {
            Dealias::ZeroPad2x => (
                GridSpec::new(d, 2 * n, 2.0 * grid.half_width())?,
                GridSpec::new(d, 2 * n, grid.half_width())?,
            ),
            Dealias::None | Dealias::TwoThirds => (grid, grid),
        };
        let keep = |flat: usize| -> bool {
            let idx = grid.index_of(flat);
            match dealias {
                Dealias::TwoThirds => idx[..d]
                    .iter()
                    .all(|&i| 3 * (i as isize - (n / 2) as isize).unsigned_abs() <= n),
                _ => !grid.on_nyquist_plane(flat),
            }
        };
        let freq_mask: Vec<bool> = (0..grid.len()).map(keep).collect();
        let phys_mask = freq_mask.clone();
        let k2 = grid.radius_sq(Side::Frequency);
        let x2 = grid.radius_sq(Side::Physical);
        let direct_weights = quad.weights().to_vec();
        let inverted_weights = quad
            .inverted_nodes()
            .iter()
            .zip(quad.inverted_weights())
            .map(|(&s, &w)| 2f64.powi(d as i32 - 2) * s.abs().powi(d as i32 - 2) * w)
            .collect();
        let cache = grid.len() * (quad.nodes().len() + quad.inverted_nodes().len())
            <= CHIRP_CACHE_LIMIT;
        let direct_chirps = cache.then(|| {
            quad.nodes()
                .iter()
                .map(|&s| chirp(&k2, -s))
                .collect::<Vec<_>>()
        });
        let inverted_chirps = cache.then(|| {
            quad.inverted_nodes()
                .iter()
                .map(|&s| chirp(&x2, s))
                .collect::<Vec<_>>()
        });
        Ok(Self {
            grid,
            quad,
            dealias,
            deterministic: false,
            direct: Lift::new(&grid, direct_fine),
            inverted: Lift::new(&grid, inverted_fine),
            freq_mask,
            phys_mask,
            k2,
            x2,
            direct_weights,
            inverted_weights,
            direct_chirps,
            inverted_chirps,
        })
    }

    /// Fixed ascending-node accumulation, bitwise reproducible across thread
    /// counts.
    pub fn with_deterministic(mut self, on: bool) -> Self {
        self.deterministic = on;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn quadrature(&self) -> &QuadratureScheme {
        &self.quad
    }

    pub fn dealias(&self) -> Dealias {
        self.dealias
    }

    pub fn deterministic(&self) -> bool {
        self.deterministic
    }

    fn check(&self, g: &Field) -> Result<()> {
        g.expect_side(Side::Frequency)?;
        if *g.grid() != self.grid {
            return Err(Error::Mismatch(format!(
                "field grid {:?} differs from workspace grid {:?}",
                g.grid(),
                self.grid
            )));
        }
        Ok(())
    }

    fn direct_chirp(&self, k: usize) -> std::borrow::Cow<'_, [Complex64]> {
        match &self.direct_chirps {
            Some(c) => std::borrow::Cow::Borrowed(&c[k]),
            None => std::borrow::Cow::Owned(chirp(&self.k2, -self.quad.nodes()[k])),
        }
    }

    fn inverted_chirp(&self, j: usize) -> std::borrow::Cow<'_, [Complex64]> {
        match &self.inverted_chirps {
            Some(c) => std::borrow::Cow::Borrowed(&c[j]),
            None => std::borrow::Cow::Owned(chirp(&self.x2, self.quad.inverted_nodes()[j])),
        }
    }

    /// `e^{isΔ}ǧ` on the frequency-padded grid for direct node `k`.
    fn direct_image(&self, phase: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![ZERO; self.direct.fine.len()];
        for (c, &f) in self.direct.map.iter().enumerate() {
            if self.freq_mask[c] {
                buf[f] = g[c] * phase[c];
            }
        }
        transform_in_place_pruned(&mut buf, &self.direct.fine, Side::Frequency, self.direct.input());
        buf
    }

    fn direct_back(&self, phase: &[Complex64], mut prod: Vec<Complex64>) -> Vec<Complex64> {
        transform_in_place_pruned(&mut prod, &self.direct.fine, Side::Physical, self.direct.output());
        self.direct
            .map
            .iter()
            .enumerate()
            .map(|(c, &f)| {
                if self.freq_mask[c] {
                    prod[f] * phase[c].conj()
                } else {
                    ZERO
                }
            })
            .collect()
    }

    /// `ℱ[e^{iσ|x|²}ǧ]` on the physically padded grid for exterior node `j`.
    fn inverted_image(&self, phase: &[Complex64], gc: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![ZERO; self.inverted.fine.len()];
        for (c, &f) in self.inverted.map.iter().enumerate() {
            if self.phys_mask[c] {
                buf[f] = gc[c] * phase[c];
            }
        }
        transform_in_place_pruned(
            &mut buf,
            &self.inverted.fine,
            Side::Physical,
            self.inverted.input(),
        );
        buf
    }

    fn inverted_back(&self, phase: &[Complex64], mut prod: Vec<Complex64>) -> Vec<Complex64> {
        transform_in_place_pruned(
            &mut prod,
            &self.inverted.fine,
            Side::Frequency,
            self.inverted.output(),
        );
        self.inverted
            .map
            .iter()
            .enumerate()
            .map(|(c, &f)| {
                if self.phys_mask[c] {
                    prod[f] * phase[c].conj()
                } else {
                    ZERO
                }
            })
            .collect()
    }

    /// Sums per-node vectors, in ascending node order when deterministic.
    fn accumulate(
        &self,
        count: usize,
        len: usize,
        term: impl Fn(usize) -> Vec<Complex64> + Sync,
    ) -> Vec<Complex64> {
        let add = |mut a: Vec<Complex64>, b: Vec<Complex64>| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        };
        if self.deterministic {
            let terms: Vec<Vec<Complex64>> = (0..count).into_par_iter().map(&term).collect();
            terms.into_iter().fold(vec![ZERO; len], add)
        } else {
            (0..count)
                .into_par_iter()
                .map(&term)
                .reduce(|| vec![ZERO; len], add)
        }
    }

    fn sum_scalars(&self, count: usize, term: impl Fn(usize) -> Complex64 + Sync) -> Complex64 {
        let terms: Vec<Complex64> = (0..count).into_par_iter().map(&term).collect();
        terms.into_iter().sum()
    }

    /// `𝒯(g₁, g₂, g₃)`, conjugating the middle slot.
    pub fn trilinear_t(&self, g1: &Field, g2: &Field, g3: &Field) -> Result<Field> {
        for g in [g1, g2, g3] {
            self.check(g)?;
        }
        let (distinct, slot) = dedupe(&[g1, g2, g3]);
        let d = self.grid.dim();
        let len = self.grid.len();

        let direct = self.accumulate(self.quad.nodes().len(), len, |k| {
            let phase = self.direct_chirp(k);
            let imgs: Vec<Vec<Complex64>> = distinct
                .iter()
                .map(|g| self.direct_image(&phase, g.values()))
                .collect();
            let prod = triple(&imgs[slot[0]], &imgs[slot[1]], &imgs[slot[2]]);
            let mut out = self.direct_back(&phase, prod);
            let w = self.direct_weights[k];
            out.iter_mut().for_each(|v| *v *= w);
            out
        });

        let mut total = direct;
        if !self.quad.inverted_nodes().is_empty() {
            let checks: Vec<Vec<Complex64>> = distinct
                .iter()
                .map(|g| to_physical(g).map(Field::into_values))
                .collect::<Result<_>>()?;
            let mut exterior = self.accumulate(self.quad.inverted_nodes().len(), len, |j| {
                let phase = self.inverted_chirp(j);
                let imgs: Vec<Vec<Complex64>> = checks
                    .iter()
                    .map(|g| self.inverted_image(&phase, g))
                    .collect();
                let prod = triple(&imgs[slot[0]], &imgs[slot[1]], &imgs[slot[2]]);
                let mut out = self.inverted_back(&phase, prod);
                let w = self.inverted_weights[j];
                out.iter_mut().for_each(|v| *v *= w);
                out
            });
            transform_in_place(&mut exterior, &self.grid, Side::Physical);
            for (t, e) in total.iter_mut().zip(&exterior) {
                *t += e;
            }
        }
        let c = (2.0 * PI).powi(d as i32 - 1);
        total.iter_mut().for_each(|v| *v *= c);
        Field::from_values(self.grid, Side::Frequency, total)
    }

    /// `ℋ(g₁, g₂, g₃, g₄) = (2π)^{d-1}/2 ∫∫ u₁ ū₂ u₃ ū₄ dx ds`.
    pub fn hamiltonian_polarized(
        &self,
        g1: &Field,
        g2: &Field,
        g3: &Field,
        g4: &Field,
    ) -> Result<Complex64> {
        for g in [g1, g2, g3, g4] {
            self.check(g)?;
        }
        let (distinct, slot) = dedupe(&[g1, g2, g3, g4]);
        let quartic = |imgs: &[Vec<Complex64>]| -> Complex64 {
            let (a, b, c, e) = (
                &imgs[slot[0]],
                &imgs[slot[1]],
                &imgs[slot[2]],
                &imgs[slot[3]],
            );
            (0..a.len())
                .map(|i| a[i] * b[i].conj() * c[i] * e[i].conj())
                .sum()
        };
        let direct = self.sum_scalars(self.quad.nodes().len(), |k| {
            let phase = self.direct_chirp(k);
            let imgs: Vec<Vec<Complex64>> = distinct
                .iter()
                .map(|g| self.direct_image(&phase, g.values()))
                .collect();
            quartic(&imgs) * (self.direct_weights[k] * self.direct.fine.cell(Side::Physical))
        });
        let mut total = direct;
        if !self.quad.inverted_nodes().is_empty() {
            let checks: Vec<Vec<Complex64>> = distinct
                .iter()
                .map(|g| to_physical(g).map(Field::into_values))
                .collect::<Result<_>>()?;
            total += self.sum_scalars(self.quad.inverted_nodes().len(), |j| {
                let phase = self.inverted_chirp(j);
                let imgs: Vec<Vec<Complex64>> = checks
                    .iter()
                    .map(|g| self.inverted_image(&phase, g))
                    .collect();
                quartic(&imgs)
                    * (self.inverted_weights[j] * self.inverted.fine.cell(Side::Frequency))
            });
        }
        Ok(total * (0.5 * (2.0 * PI).powi(self.grid.dim() as i32 - 1)))
    }

    /// Per-node `∫|e^{isΔ}ǧ|⁴ dx` (direct) and `∫|ℱ[e^{iσ|x|²}ǧ]|⁴` (exterior).
    fn quartic_profile(&self, g: &Field) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(g)?;
        let direct: Vec<f64> = (0..self.quad.nodes().len())
            .into_par_iter()
            .map(|k| {
                let phase = self.direct_chirp(k);
                let u = self.direct_image(&phase, g.values());
                u.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>()
                    * self.direct.fine.cell(Side::Physical)
            })
            .collect();
        let mut exterior = Vec::new();
        if !self.quad.inverted_nodes().is_empty() {
            let gc = to_physical(g)?.into_values();
            exterior = (0..self.quad.inverted_nodes().len())
                .into_par_iter()
                .map(|j| {
                    let phase = self.inverted_chirp(j);
                    let w = self.inverted_image(&phase, &gc);
                    w.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>()
                        * self.inverted.fine.cell(Side::Frequency)
                })
                .collect();
        }
        Ok((direct, exterior))
    }

    /// `ℋ(g) = (2π)^{d-1}/2 ∫∫ |e^{isΔ}ǧ|⁴ dx ds`.
    pub fn hamiltonian(&self, g: &Field) -> Result<f64> {
        let (direct, exterior) = self.quartic_profile(g)?;
        let a: f64 = direct.iter().zip(&self.direct_weights).map(|(q, w)| q * w).sum();
        let b: f64 = exterior
            .iter()
            .zip(&self.inverted_weights)
            .map(|(q, w)| q * w)
            .sum();
        Ok(0.5 * (2.0 * PI).powi(self.grid.dim() as i32 - 1) * (a + b))
    }

    /// `2(2-d)(2π)^{d-1} ∫∫ s |e^{isΔ}ǧ|⁴ dx ds`; the exterior weight becomes
    /// `2^{d-4} sgn(σ)|σ|^{d-3}`.
    pub fn virial_rhs(&self, g: &Field) -> Result<f64> {
        let d = self.grid.dim() as i32;
        if d == 2 {
            self.check(g)?;
            return Ok(0.0);
        }
        let (direct, exterior) = self.quartic_profile(g)?;
        let a: f64 = direct
            .iter()
            .zip(self.quad.nodes().iter().zip(self.quad.weights()))
            .map(|(q, (s, w))| q * s * w)
            .sum();
        let b: f64 = exterior
            .iter()
            .zip(
                self.quad
                    .inverted_nodes()
                    .iter()
                    .zip(self.quad.inverted_weights()),
            )
            .map(|(q, (s, w))| q * w * s.signum() * s.abs().powi(d - 3) * 2f64.powi(d - 4))
            .sum();
        Ok(2.0 * (2 - d) as f64 * (2.0 * PI).powi(d - 1) * (a + b))
    }
}

impl CubicOperator for OperatorWorkspace {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn apply(&self, g: &Field) -> Result<Field> {
        self.trilinear_t(g, g, g)
    }

    fn hamiltonian(&self, g: &Field) -> Result<f64> {
        OperatorWorkspace::hamiltonian(self, g)
    }

    fn virial_rhs(&self, g: &Field) -> Result<f64> {
        OperatorWorkspace::virial_rhs(self, g)
    }
}

/// `e^{isΔ}ǧ = ℱ⁻¹[e^{-is|ξ|²} g]`.
pub fn free_propagate(g: &Field, s: f64) -> Result<Field> {
    g.expect_side(Side::Frequency)?;
    let k2 = g.grid().radius_sq(Side::Frequency);
    let mut h = g.clone();
    for (v, r) in h.values_mut().iter_mut().zip(&k2) {
        *v *= Complex64::from_polar(1.0, -s * r);
    }
    to_physical(&h)
}

/// Free-function form of [`OperatorWorkspace::trilinear_t`].
pub fn trilinear_t(g1: &Field, g2: &Field, g3: &Field, ws: &OperatorWorkspace) -> Result<Field> {
    ws.trilinear_t(g1, g2, g3)
}

fn chirp(r2: &[f64], s: f64) -> Vec<Complex64> {
    r2.iter().map(|&r| Complex64::from_polar(1.0, s * r)).collect()
}

fn triple(a: &[Complex64], b: &[Complex64], c: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((x, y), z)| x * y.conj() * z)
        .collect()
}

/// Distinct inputs (by identity) and the slot → distinct index map, so that
/// `𝒯(g, g, g)` transforms `g` once per node.
fn dedupe<'a>(inputs: &[&'a Field]) -> (Vec<&'a Field>, Vec<usize>) {
    let mut distinct: Vec<&Field> = Vec::new();
    let mut slot = Vec::with_capacity(inputs.len());
    for &g in inputs {
        match distinct.iter().position(|&h| std::ptr::eq(h, g)) {
            Some(i) => slot.push(i),
            None => {
                slot.push(distinct.len());
                distinct.push(g);
            }
        }
    }
    (distinct, slot)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: GridSpec) -> Field {
        Field::from_fn(grid, Side::Frequency, |p| {
            Complex64::new((-p.iter().map(|x| x * x).sum::<f64>() / 2.0).exp(), 0.0)
        })
    }

    #[test]
    fn d2_gaussian_is_an_eigenfunction() {
        // For e^{-|ξ|²/2} in d = 2 the exact value is 𝒯 = (π²/2)·g.
        let grid = GridSpec::new(2, 32, 8.0).unwrap();
        let ws = OperatorWorkspace::new(grid, QuadratureScheme::default(), Dealias::ZeroPad2x)
            .unwrap();
        let g = gaussian(grid);
        let t = ws.apply(&g).unwrap();
        let c = PI * PI / 2.0;
        for (a, b) in t.values().iter().zip(g.values()) {
            assert!((a - b * c).norm() < 1e-6, "{a} vs {}", b * c);
        }
    }

    #[test]
    fn one_dimensional_split_rule_is_rejected() {
        let grid = GridSpec::new(1, 32, 8.0).unwrap();
        assert!(OperatorWorkspace::new(grid, QuadratureScheme::default(), Dealias::None).is_err());
    }

    #[test]
    fn dedupe_by_identity() {
        let grid = GridSpec::new(2, 8, 2.0).unwrap();
        let a = gaussian(grid);
        let b = a.clone();
        let (d, s) = dedupe(&[&a, &b, &a]);
        assert_eq!(d.len(), 2);
        assert_eq!(s, vec![0, 1, 0]);
    }
}
