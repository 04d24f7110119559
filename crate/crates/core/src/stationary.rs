//! Stationary waves `(λ|ξ|² + μ)φ = 𝒯(φ, φ, φ)`: Petviashvili and projected
//! ascent solvers, multiplier extraction and the energy/Pohozaev checks.
//!
//! The identities are stated with `P(φ) = Re⟨𝒯(φ), φ⟩`, which equals `2ℋ(φ)`
//! in the normalization of [`CubicOperator::hamiltonian`]:
//!
//! * energy: `λ‖ξφ‖² + μ‖φ‖² = P`
//! * Pohozaev: `λ(d/2 − 1)‖ξφ‖² + μ(d/2)‖φ‖² = (1/2 + d/4)P`

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Side};
use crate::norms::{derivative, first_moments, mass, second_moment, weighted_norm, WeightedNormSpec};
use crate::operator::CubicOperator;
use crate::transform::{to_frequency, to_physical};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VariationalRegime {
    /// `sup ℋ` on `‖g‖² = 1`; `d = 2`.
    MassOnly,
    /// `sup ℋ` on `‖g‖² + ‖ξg‖² = 1`; `3 ≤ d ≤ 5`.
    MassPlusKinetic,
    /// `sup ℋ` on `‖ξg‖² = 1`; `d = 6`, out of reach on a grid.
    KineticOnly,
}

impl VariationalRegime {
    pub fn name(self) -> &'static str {
        match self {
            VariationalRegime::MassOnly => "mass_only",
            VariationalRegime::MassPlusKinetic => "mass_plus_kinetic",
            VariationalRegime::KineticOnly => "kinetic_only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mass_only" => Some(VariationalRegime::MassOnly),
            "mass_plus_kinetic" => Some(VariationalRegime::MassPlusKinetic),
            "kinetic_only" => Some(VariationalRegime::KineticOnly),
            _ => None,
        }
    }

    pub fn for_dimension(d: usize) -> Result<Self> {
        match d {
            2 => Ok(VariationalRegime::MassOnly),
            3..=5 => Ok(VariationalRegime::MassPlusKinetic),
            6 => Self::KineticOnly.check(d).map(|_| Self::KineticOnly),
            _ => Err(Error::InvalidParameter(format!(
                "no variational regime for d = {d}"
            ))),
        }
    }

    /// Rejects regimes that do not match `d` and the `d = 6` regime outright.
    pub fn check(self, d: usize) -> Result<()> {
        let ok = match self {
            VariationalRegime::MassOnly => d == 2,
            VariationalRegime::MassPlusKinetic => (3..=5).contains(&d),
            VariationalRegime::KineticOnly => {
                return Err(Error::InvalidParameter(
                    "kinetic_only regime needs d = 6, which is not computable on a desk-scale grid"
                        .into(),
                ))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "regime {} is inconsistent with d = {d}",
                self.name()
            )))
        }
    }

    /// `(λ, μ)` of the constraint operator `L = λ|ξ|² + μ`.
    pub fn multipliers(self) -> (f64, f64) {
        match self {
            VariationalRegime::MassOnly => (0.0, 1.0),
            VariationalRegime::MassPlusKinetic => (1.0, 1.0),
            VariationalRegime::KineticOnly => (1.0, 0.0),
        }
    }
}

/// The constraint operator `L = κλ₀|ξ|² + μ₀` of a regime, with an optional
/// kinetic weight `κ`. For `3 ≤ d ≤ 5` the scaling symmetry
/// `g ↦ a^{(3d−2)/4} g(a·)` maps the `κ = 1` problem onto `κ = a²`, so `κ`
/// only selects which member of the scaling orbit the grid has to resolve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub regime: VariationalRegime,
    pub kinetic_weight: f64,
}

impl From<VariationalRegime> for Constraint {
    fn from(regime: VariationalRegime) -> Self {
        Self {
            regime,
            kinetic_weight: 1.0,
        }
    }
}

impl Constraint {
    pub fn new(regime: VariationalRegime, kinetic_weight: f64) -> Result<Self> {
        if !(kinetic_weight.is_finite() && kinetic_weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kinetic weight must be positive, got {kinetic_weight}"
            )));
        }
        if kinetic_weight != 1.0 && regime == VariationalRegime::MassOnly {
            return Err(Error::InvalidParameter(
                "the mass-only regime has no kinetic term to weight".into(),
            ));
        }
        Ok(Self {
            regime,
            kinetic_weight,
        })
    }

    pub fn check(&self, d: usize) -> Result<()> {
        Self::new(self.regime, self.kinetic_weight)?;
        self.regime.check(d)
    }

    /// `(λ, μ)` of `L`.
    pub fn multipliers(&self) -> (f64, f64) {
        let (l, m) = self.regime.multipliers();
        (l * self.kinetic_weight, m)
    }

    fn symbol(&self, r2: f64) -> f64 {
        let (l, m) = self.multipliers();
        l * r2 + m
    }

    fn apply(&self, g: &Field) -> Field {
        let r2 = g.grid().radius_sq(Side::Frequency);
        let mut out = g.clone();
        for (v, r) in out.values_mut().iter_mut().zip(&r2) {
            *v *= self.symbol(*r);
        }
        out
    }

    fn apply_inverse(&self, g: &Field) -> Field {
        let r2 = g.grid().radius_sq(Side::Frequency);
        let mut out = g.clone();
        for (v, r) in out.values_mut().iter_mut().zip(&r2) {
            *v /= self.symbol(*r);
        }
        out
    }

    /// `⟨Lg, g⟩`.
    pub fn value(&self, g: &Field) -> f64 {
        let r2 = g.grid().radius_sq(Side::Frequency);
        g.values()
            .iter()
            .zip(&r2)
            .map(|(v, r)| v.norm_sqr() * self.symbol(*r))
            .sum::<f64>()
            * g.grid().cell(Side::Frequency)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryResult {
    pub phi: Field,
    pub lambda: f64,
    pub mu: f64,
    /// `‖(λ|ξ|² + μ)φ − 𝒯(φ)‖ / ‖𝒯(φ)‖`.
    pub residual: f64,
    /// `λ‖ξφ‖² / P(φ)`.
    pub pohozaev_kinetic_ratio: f64,
    /// `μ‖φ‖² / P(φ)`.
    pub pohozaev_mass_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final normalization ratio `⟨Lg, g⟩ / Re⟨𝒯(g), g⟩` (tends to 1).
    pub normalization: f64,
    /// Petviashvili: the ratio per iteration. Ascent: `ℋ(g)/⟨Lg, g⟩²` per accepted step.
    pub history: Vec<f64>,
}

fn check_init(init: &Field, regime: &Constraint, op: &dyn CubicOperator) -> Result<()> {
    init.expect_side(Side::Frequency)?;
    if init.grid() != op.grid() {
        return Err(Error::Mismatch("initializer and operator grids differ".into()));
    }
    regime.check(init.grid().dim())?;
    if init.norm() == 0.0 {
        return Err(Error::InvalidParameter("initializer must be nonzero".into()));
    }
    Ok(())
}

/// Normalization ratio and residual of `g` given `𝒯(g)`.
fn ratio_and_residual(
    g: &Field,
    tg: &Field,
    regime: &Constraint,
) -> Result<(f64, f64)> {
    let lg = regime.apply(g);
    let num = lg.inner(g)?.re;
    let den = tg.inner(g)?.re;
    if !(den > 0.0) || !num.is_finite() {
        return Err(Error::Degenerate(format!(
            "Re<T(g), g> = {den} is not positive; choose a different initializer"
        )));
    }
    let m = num / den;
    let scaled = tg.scaled(Complex64::new(m, 0.0));
    let residual = lg.sub(&scaled)?.norm() / scaled.norm();
    Ok((m, residual))
}

fn finish(
    phi: Field,
    regime: &Constraint,
    residual: f64,
    iterations: usize,
    normalization: f64,
    history: Vec<f64>,
    op: &dyn CubicOperator,
) -> Result<StationaryResult> {
    let (lambda, mu) = regime.multipliers();
    let p = op.apply(&phi)?.inner(&phi)?.re;
    Ok(StationaryResult {
        lambda,
        mu,
        residual,
        pohozaev_kinetic_ratio: lambda * second_moment(&phi) / p,
        pohozaev_mass_ratio: mu * mass(&phi) / p,
        iterations,
        converged: true,
        normalization,
        history,
        phi,
    })
}

/// Petviashvili iteration `g ← m^{3/2} L⁻¹𝒯(g)`, `m = ⟨Lg, g⟩ / Re⟨𝒯(g), g⟩`.
/// Stops once both the relative change and the residual are below `tol`;
/// the returned profile is rescaled so that `Lφ = 𝒯(φ)`.
pub fn petviashvili_solve(
    init: &Field,
    regime: impl Into<Constraint>,
    tol: f64,
    max_iter: usize,
    op: &dyn CubicOperator,
) -> Result<StationaryResult> {
    let regime = &regime.into();
    check_init(init, regime, op)?;
    let mut g = init.clone();
    let mut history = Vec::new();
    let mut last = (f64::NAN, f64::NAN);
    for it in 1..=max_iter {
        let tg = op.apply(&g)?;
        let (m, residual) = ratio_and_residual(&g, &tg, regime)?;
        history.push(m);
        let next = regime
            .apply_inverse(&tg)
            .scaled(Complex64::new(m.powf(1.5), 0.0));
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("iterate {it} is not finite")));
        }
        let change = next.rel_distance(&g)?;
        last = (change, residual);
        if change <= tol && residual <= tol {
            let phi = g.scaled(Complex64::new(m.sqrt(), 0.0));
            return finish(phi, regime, residual, it, m, history, op);
        }
        g = next;
    }
    Err(Error::NoConvergence(format!(
        "petviashvili: {max_iter} iterations, last change {:.3e}, residual {:.3e}",
        last.0, last.1
    )))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AscentPolicy {
    /// Initial step, measured relative to the normalized iterate.
    pub eta0: f64,
    pub grow: f64,
    pub shrink: f64,
    pub eta_floor: f64,
    pub max_iter: usize,
}

impl Default for AscentPolicy {
    fn default() -> Self {
        Self {
            eta0: 1.0,
            grow: 1.5,
            shrink: 0.5,
            eta_floor: 1e-10,
            max_iter: 2000,
        }
    }
}

fn normalize(g: &Field, regime: &Constraint) -> Field {
    g.scaled(Complex64::new(regime.value(g).sqrt().recip(), 0.0))
}

/// Projected ascent on `⟨Lg, g⟩ = 1`: `g ← normalize(g + η L⁻¹𝒯(g)/P(g))`,
/// accepting a step only if `ℋ` does not decrease. Stops when the residual
/// is below `tol`; the profile is returned with `Lφ = 𝒯(φ)` as above.
pub fn gradient_ascent_solve(
    init: &Field,
    regime: impl Into<Constraint>,
    policy: &AscentPolicy,
    tol: f64,
    op: &dyn CubicOperator,
) -> Result<StationaryResult> {
    let regime = &regime.into();
    check_init(init, regime, op)?;
    if !(policy.eta0 > 0.0 && policy.grow >= 1.0 && policy.shrink > 0.0 && policy.shrink < 1.0)
    {
        return Err(Error::InvalidParameter("invalid ascent step policy".into()));
    }
    let mut g = normalize(init, regime);
    let mut h = op.hamiltonian(&g)?;
    let mut history = vec![h];
    let mut eta = policy.eta0;
    for it in 1..=policy.max_iter {
        let tg = op.apply(&g)?;
        let (m, residual) = ratio_and_residual(&g, &tg, regime)?;
        if residual <= tol {
            let phi = g.scaled(Complex64::new(m.sqrt(), 0.0));
            return finish(phi, regime, residual, it, m, history, op);
        }
        let dir = regime.apply_inverse(&tg).scaled(Complex64::new(m, 0.0));
        loop {
            let mut cand = g.clone();
            cand.axpy(Complex64::new(eta, 0.0), &dir)?;
            let cand = normalize(&cand, regime);
            let hc = op.hamiltonian(&cand)?;
            if hc >= h {
                g = cand;
                h = hc;
                history.push(h);
                eta *= policy.grow;
                break;
            }
            eta *= policy.shrink;
            if eta < policy.eta_floor {
                return Err(Error::NoConvergence(format!(
                    "ascent step collapsed below {:.1e} at residual {residual:.3e}",
                    policy.eta_floor
                )));
            }
        }
    }
    Err(Error::NoConvergence(format!(
        "ascent: {} iterations without reaching residual {tol:.1e}",
        policy.max_iter
    )))
}

/// Inputs and outputs of the two multiplier extractions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Multipliers {
    /// From the energy and Pohozaev identities.
    pub identity: (f64, f64),
    /// From `min ‖(λ|ξ|² + μ)φ − 𝒯(φ)‖`.
    pub least_squares: (f64, f64),
    /// `Re⟨𝒯(φ), φ⟩`.
    pub pairing: f64,
    /// `−Re⟨𝒯(φ)ˇ, x·∇φ̌⟩`.
    pub dilation: f64,
    pub kinetic: f64,
    pub mass: f64,
}

/// `−Re⟨𝒯(φ)ˇ, x·∇φ̌⟩`, computed on the physical side.
pub fn dilation_pairing(phi: &Field, t_phi: &Field) -> Result<f64> {
    phi.expect_side(Side::Frequency)?;
    let check = to_physical(phi)?;
    let t_check = to_physical(t_phi)?;
    let grid = *phi.grid();
    let d = grid.dim();
    let mut xgrad = Field::zeros(grid, Side::Physical);
    for a in 0..d {
        let mut alpha = vec![0u32; d];
        alpha[a] = 1;
        let da = derivative(&check, &alpha)?;
        for (k, v) in xgrad.values_mut().iter_mut().enumerate() {
            *v += da.values()[k] * grid.point(Side::Physical, k)[a];
        }
    }
    Ok(-t_check.inner(&xgrad)?.re)
}

pub fn extract_multipliers(phi: &Field, op: &dyn CubicOperator) -> Result<Multipliers> {
    phi.expect_side(Side::Frequency)?;
    let t_phi = op.apply(phi)?;
    let p = t_phi.inner(phi)?.re;
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Degenerate(format!("Re<T(phi), phi> = {p} is not positive")));
    }
    let d = phi.grid().dim() as f64;
    let k = second_moment(phi);
    let m = mass(phi);
    if !(k * m > 1e-300) {
        return Err(Error::Degenerate(
            "energy/Pohozaev system is singular (||xi phi||^2 ||phi||^2 = 0)".into(),
        ));
    }
    let dil = dilation_pairing(phi, &t_phi)?;
    let lambda = (0.5 * d * p - dil) / k;
    let mu = (p * (1.0 - 0.5 * d) + dil) / m;

    let a = phi.map_with_coords(|c, v| v * c.iter().map(|x| x * x).sum::<f64>());
    let aa = a.norm_sq();
    let ab = a.inner(phi)?.re;
    let bb = m;
    let mat = Matrix2::new(aa, ab, ab, bb);
    let rhs = Vector2::new(t_phi.inner(&a)?.re, p);
    let ls = mat.lu().solve(&rhs).ok_or_else(|| {
        Error::Degenerate("least-squares normal equations are singular".into())
    })?;
    Ok(Multipliers {
        identity: (lambda, mu),
        least_squares: (ls[0], ls[1]),
        pairing: p,
        dilation: dil,
        kinetic: k,
        mass: m,
    })
}

/// Identity residuals and ratio checks, all normalized by `P(φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PohozaevReport {
    /// `(λ‖ξφ‖² + μ‖φ‖² − P) / P`.
    pub energy_residual: f64,
    /// `(λ(d/2−1)‖ξφ‖² + μ(d/2)‖φ‖² − D) / P` with `D` the dilation pairing,
    /// which equals `(1/2 + d/4)P` for the resonant operator.
    pub pohozaev_residual: f64,
    /// `(D − (1/2 + d/4)P) / P`.
    pub dilation_defect: f64,
    pub kinetic_ratio: f64,
    pub mass_ratio: f64,
    /// `(d − 2)/4`.
    pub expected_kinetic_ratio: f64,
    /// `(6 − d)/4`.
    pub expected_mass_ratio: f64,
}

impl PohozaevReport {
    pub fn max_ratio_error(&self) -> f64 {
        (self.kinetic_ratio - self.expected_kinetic_ratio)
            .abs()
            .max((self.mass_ratio - self.expected_mass_ratio).abs())
    }
}

pub fn pohozaev_report(
    phi: &Field,
    lambda: f64,
    mu: f64,
    op: &dyn CubicOperator,
) -> Result<PohozaevReport> {
    phi.expect_side(Side::Frequency)?;
    let t_phi = op.apply(phi)?;
    let p = t_phi.inner(phi)?.re;
    let dil = dilation_pairing(phi, &t_phi)?;
    let d = phi.grid().dim() as f64;
    let k = second_moment(phi);
    let m = mass(phi);
    Ok(PohozaevReport {
        energy_residual: (lambda * k + mu * m - p) / p,
        pohozaev_residual: (lambda * (0.5 * d - 1.0) * k + mu * 0.5 * d * m - dil) / p,
        dilation_defect: (dil - (0.5 + 0.25 * d) * p) / p,
        kinetic_ratio: lambda * k / p,
        mass_ratio: mu * m / p,
        expected_kinetic_ratio: (d - 2.0) / 4.0,
        expected_mass_ratio: (6.0 - d) / 4.0,
    })
}

/// Multiplies by `e^{i x·c}` on the physical side, i.e. `g(ξ) ↦ g(ξ − c)`.
pub fn shift_frequency(g: &Field, c: &[f64]) -> Result<Field> {
    let check = to_physical(g)?;
    let moved = check.map_with_coords(|x, v| {
        let ph: f64 = x.iter().zip(c).map(|(a, b)| a * b).sum();
        v * Complex64::from_polar(1.0, ph)
    });
    to_frequency(&moved)
}

/// `P(ψ̌) = i∫∇ψ̌·conj(ψ̌) dx = −∫ ξ|ψ|² dξ`.
pub fn momentum(psi: &Field) -> Result<Vec<f64>> {
    psi.expect_side(Side::Frequency)?;
    Ok(first_moments(psi).into_iter().map(|v| -v).collect())
}

/// `ν = 2Pλ/M` and the profile `φ(ξ) = ψ(ξ − ν/(2λ))`.
pub fn traveling_recenter(psi: &Field, lambda: f64) -> Result<(Field, Vec<f64>)> {
    psi.expect_side(Side::Frequency)?;
    if lambda == 0.0 {
        return Err(Error::InvalidParameter(
            "recentering is undefined for lambda = 0".into(),
        ));
    }
    let m = mass(psi);
    if !(m > 0.0) {
        return Err(Error::Degenerate("recentering needs positive mass".into()));
    }
    let p = momentum(psi)?;
    let nu: Vec<f64> = p.iter().map(|v| 2.0 * v * lambda / m).collect();
    if nu.iter().all(|v| *v == 0.0) {
        return Ok((psi.clone(), nu));
    }
    let c: Vec<f64> = nu.iter().map(|v| v / (2.0 * lambda)).collect();
    Ok((shift_frequency(psi, &c)?, nu))
}

/// Crops a frequency field to the centered sub-box of half-width `half_width`
/// with the same spacing.
pub fn restrict_box(phi: &Field, half_width: f64) -> Result<Field> {
    phi.expect_side(Side::Frequency)?;
    let grid = *phi.grid();
    let ratio = half_width / grid.half_width();
    let n_sub = (grid.n() as f64 * ratio).round() as usize;
    if (n_sub as f64 - grid.n() as f64 * ratio).abs() > 1e-9 || n_sub % 2 != 0 || n_sub > grid.n()
    {
        return Err(Error::InvalidParameter(format!(
            "half-width {half_width} does not crop grid n = {} L = {} to an even sub-lattice",
            grid.n(),
            grid.half_width()
        )));
    }
    let sub = GridSpec::new(grid.dim(), n_sub, half_width)?;
    let off = (grid.n() - n_sub) / 2;
    let d = grid.dim();
    let vals = (0..sub.len())
        .map(|k| {
            let idx = sub.index_of(k);
            let mut big = [0usize; 3];
            for a in 0..d {
                big[a] = idx[a] + off;
            }
            phi.values()[grid.flat(&big[..d])]
        })
        .collect();
    Field::from_values(sub, Side::Frequency, vals)
}

pub const DECAY_EXPONENTS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTable {
    pub half_widths: Vec<f64>,
    /// `norms[i][j] = ‖φ_i‖_{L^{2,s_j}}` for `s_j` in [`DECAY_EXPONENTS`].
    pub norms: Vec<[f64; 4]>,
    /// Relative change between the last two rows, per exponent.
    pub last_change: [f64; 4],
}

impl DecayTable {
    pub fn stabilized(&self, rel: f64) -> bool {
        self.last_change.iter().all(|c| *c <= rel)
    }
}

/// `‖φ‖_{L^{2,s}}`, `s = 1..4`, for the same profile on growing boxes.
pub fn decay_check(profiles: &[Field]) -> Result<DecayTable> {
    if profiles.is_empty() {
        return Err(Error::InvalidParameter("decay check needs at least one profile".into()));
    }
    let mut table = DecayTable {
        half_widths: Vec::new(),
        norms: Vec::new(),
        last_change: [0.0; 4],
    };
    for phi in profiles {
        phi.expect_side(Side::Frequency)?;
        let mut row = [0.0; 4];
        for (j, s) in DECAY_EXPONENTS.iter().enumerate() {
            row[j] = weighted_norm(phi, &WeightedNormSpec::lebesgue(2.0, *s))?;
        }
        table.half_widths.push(phi.grid().half_width());
        table.norms.push(row);
    }
    if let [.., a, b] = table.norms.as_slice() {
        for j in 0..4 {
            table.last_change[j] = (b[j] - a[j]).abs() / b[j].abs().max(1e-300);
        }
    }
    Ok(table)
}

/// Coefficient of determination of a full quadratic least-squares fit of
/// `log|φ|` over nodes with `|φ| ≥ floor·max|φ|`.
pub fn gaussian_log_fit(phi: &Field, floor: f64) -> Result<f64> {
    let grid = phi.grid();
    let d = grid.dim();
    let peak = phi.max_abs();
    if peak == 0.0 {
        return Err(Error::Degenerate("cannot fit the zero field".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    for (k, v) in phi.values().iter().enumerate() {
        let a = v.norm();
        if a < floor * peak || a == 0.0 {
            continue;
        }
        let p = grid.point(phi.side(), k);
        let mut row = vec![1.0];
        row.extend_from_slice(&p[..d]);
        for i in 0..d {
            for j in i..d {
                row.push(p[i] * p[j]);
            }
        }
        rows.push(row);
        y.push(a.ln());
    }
    let cols = 1 + d + d * (d + 1) / 2;
    if rows.len() <= cols {
        return Err(Error::Degenerate("too few nodes above the fit floor".into()));
    }
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let b = DVector::from_vec(y);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Degenerate(format!("quadratic fit failed: {e}")))?;
    let fitted = &a * coef;
    let mean = b.mean();
    let ss_res: f64 = (&b - fitted).norm_squared();
    let ss_tot: f64 = b.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 })
}

/// Zeroes the momentum and position centers and makes the value at the peak
/// real and positive, so profiles can be compared modulo symmetries.
pub fn canonicalize(phi: &Field) -> Result<Field> {
    let m = mass(phi);
    if !(m > 0.0) {
        return Err(Error::Degenerate("cannot canonicalize the zero field".into()));
    }
    let center: Vec<f64> = first_moments(phi).iter().map(|v| -v / m).collect();
    let g = shift_frequency(phi, &center)?;
    let check = to_physical(&g)?;
    let xc: Vec<f64> = first_moments(&check).iter().map(|v| v / m).collect();
    let g = g.map_with_coords(|p, v| {
        let ph: f64 = p.iter().zip(&xc).map(|(a, b)| a * b).sum();
        v * Complex64::from_polar(1.0, ph)
    });
    let peak = g
        .values()
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or_default();
    let phase = if peak.norm() > 0.0 {
        peak.conj() / peak.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(g.scaled(phase))
}
