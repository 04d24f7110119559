use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which variable a field is sampled in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Frequency,
    Physical,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Frequency => "frequency",
            Side::Physical => "physical",
        }
    }

    pub fn dual(self) -> Side {
        match self {
            Side::Frequency => Side::Physical,
            Side::Physical => Side::Frequency,
        }
    }
}

/// Uniform grid on `[-L, L)^d` in frequency and its dual physical grid.
///
/// Index `j` on an axis maps to `ξ_j = (j - n/2)·hξ` with `hξ = 2L/n`, and to
/// `x_j = (j - n/2)·hx` with `hx = π/L`. Storage is row-major with the last
/// axis fastest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    d: usize,
    n: usize,
    half_width: f64,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 4, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        n.checked_pow(d as u32)
            .and_then(|m| m.checked_mul(16))
            .ok_or_else(|| Error::InvalidGrid("grid size overflows".into()))?;
        Ok(Self { d, n, half_width })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h_freq(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn h_phys(&self) -> f64 {
        PI / self.half_width
    }

    pub fn phys_half_width(&self) -> f64 {
        PI * self.n as f64 / (2.0 * self.half_width)
    }

    pub fn spacing(&self, side: Side) -> f64 {
        match side {
            Side::Frequency => self.h_freq(),
            Side::Physical => self.h_phys(),
        }
    }

    /// Volume element `h^d` of the Riemann sum on `side`.
    pub fn cell(&self, side: Side) -> f64 {
        self.spacing(side).powi(self.d as i32)
    }

    pub fn coord(&self, side: Side, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing(side)
    }

    pub fn axis(&self, side: Side) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(side, i)).collect()
    }

    /// Per-axis indices of a flat index; unused trailing slots are 0.
    pub fn index_of(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rest = flat;
        for a in (0..self.d).rev() {
            idx[a] = rest % self.n;
            rest /= self.n;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx[..self.d].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn point(&self, side: Side, flat: usize) -> [f64; 3] {
        let idx = self.index_of(flat);
        let mut p = [0.0; 3];
        for a in 0..self.d {
            p[a] = self.coord(side, idx[a]);
        }
        p
    }

    /// `|ξ|²` or `|x|²` at every node.
    pub fn radius_sq(&self, side: Side) -> Vec<f64> {
        let axis = self.axis(side);
        (0..self.len())
            .map(|f| {
                let idx = self.index_of(f);
                idx[..self.d].iter().map(|&i| axis[i] * axis[i]).sum()
            })
            .collect()
    }

    /// Flat index of the node at the origin.
    pub fn origin(&self) -> usize {
        self.flat(&[self.n / 2; 3])
    }

    /// True when some axis index is 0, i.e. the node lies on the unpaired
    /// boundary plane at coordinate `-L` (or `-πn/(2L)`).
    pub fn on_nyquist_plane(&self, flat: usize) -> bool {
        self.index_of(flat)[..self.d].contains(&0)
    }
}

/// Complex grid function tagged with its grid and side.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    side: Side,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: GridSpec, side: Side) -> Self {
        Self {
            grid,
            side,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, side: Side, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, side, values })
    }

    /// Samples `f` at every node; the closure receives the first `d` coordinates.
    pub fn from_fn(grid: GridSpec, side: Side, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|k| f(&grid.point(side, k)[..grid.dim()]))
            .collect();
        Self { grid, side, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn expect_side(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(Error::WrongSide {
                expected: side.name(),
                found: self.side.name(),
            });
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Mismatch(format!(
                "grids differ: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        if self.side != other.side {
            return Err(Error::Mismatch(format!(
                "sides differ: {} vs {}",
                self.side.name(),
                other.side.name()
            )));
        }
        Ok(())
    }

    /// `⟨self, other⟩ = Σ self·conj(other)·h^d`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.check_compatible(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.cell(self.side))
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell(self.side)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field {
            grid: self.grid,
            side: self.side,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise map that also sees the node coordinates.
    pub fn map_with_coords(&self, f: impl Fn(&[f64], Complex64) -> Complex64) -> Field {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(&self.grid.point(self.side, k)[..self.grid.dim()], v))
            .collect();
        Field {
            grid: self.grid,
            side: self.side,
            values,
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(
        &self,
        other: &Field,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Field> {
        self.check_compatible(other)?;
        Ok(Field {
            grid: self.grid,
            side: self.side,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: Complex64, x: &Field) -> Result<()> {
        self.check_compatible(x)?;
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
        Ok(())
    }

    /// `‖self − other‖ / ‖other‖`, or the absolute norm when `other` vanishes.
    pub fn rel_distance(&self, other: &Field) -> Result<f64> {
        let diff = self.sub(other)?.norm();
        let base = other.norm();
        Ok(if base > 0.0 { diff / base } else { diff })
    }
}
