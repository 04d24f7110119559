//! Grid-exact actions of the Hamiltonian symmetries, invariance checks,
//! solution-set rescaling and empirical operator-norm estimates.

use num_complex::Complex64;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Side};
use crate::init::smooth_phase;
use crate::norms::{weighted_norm, WeightedNormSpec};
use crate::operator::CubicOperator;
use crate::transform::refine_frequency;

/// Axis permutation with sign flips: `(Oξ)_i = ±ξ_{perm[i]}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    pub perm: [usize; 3],
    pub flip: [bool; 3],
}

impl SignedPermutation {
    pub fn identity() -> Self {
        Self {
            perm: [0, 1, 2],
            flip: [false; 3],
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        let mut seen = [false; 3];
        for &p in &self.perm[..d] {
            if p >= d || seen[p] {
                return Err(Error::InvalidParameter(format!(
                    "rotation {:?} is not a permutation of {d} axes",
                    &self.perm[..d]
                )));
            }
            seen[p] = true;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymmetryKind {
    /// `g ↦ e^{iθ}g`.
    PhaseRotation(f64),
    /// `g ↦ g(· + ξ₀)` with `ξ₀ = m·hξ`.
    Translation(Vec<i64>),
    /// `g ↦ e^{iξ·x₀}g` with `x₀ = m·hx`.
    Modulation(Vec<i64>),
    /// `g ↦ e^{iτ|ξ|²}g`.
    QuadraticModulation(f64),
    /// `g ↦ g(O·)` for a hyperoctahedral `O`.
    Rotation(SignedPermutation),
    /// `g ↦ μ^{(3d−2)/4} g(μ·)` with `μ = 2^k`.
    Scaling(i32),
}

impl SymmetryKind {
    pub fn name(&self) -> &'static str {
        match self {
            SymmetryKind::PhaseRotation(_) => "phase",
            SymmetryKind::Translation(_) => "translate",
            SymmetryKind::Modulation(_) => "modulate",
            SymmetryKind::QuadraticModulation(_) => "quadratic",
            SymmetryKind::Rotation(_) => "rotate",
            SymmetryKind::Scaling(_) => "scale",
        }
    }

    /// Parses `phase θ`, `translate m…`, `modulate m…`, `quadratic τ`,
    /// `rotate a…` (signed 1-based source axes, e.g. `rotate -2 1`) or
    /// `scale k` (`μ = 2^k`).
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let mut parts = text.split_whitespace();
        let head = parts.next().unwrap_or("");
        let args: Vec<&str> = parts.collect();
        let bad = |what: &str| Error::InvalidParameter(format!("symmetry '{text}': {what}"));
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad("expected a number"));
        let ints = |v: &[&str]| -> Result<Vec<i64>> {
            if v.len() != d {
                return Err(bad(&format!("expected {d} integers")));
            }
            v.iter()
                .map(|s| s.parse::<i64>().map_err(|_| bad("expected integers")))
                .collect()
        };
        let one = |v: &[&str]| -> Result<f64> {
            match v {
                [x] => float(x),
                _ => Err(bad("expected one number")),
            }
        };
        match head {
            "phase" => Ok(SymmetryKind::PhaseRotation(one(&args)?)),
            "quadratic" => Ok(SymmetryKind::QuadraticModulation(one(&args)?)),
            "translate" => Ok(SymmetryKind::Translation(ints(&args)?)),
            "modulate" => Ok(SymmetryKind::Modulation(ints(&args)?)),
            "scale" => match args.as_slice() {
                [k] => k
                    .parse::<i32>()
                    .map(SymmetryKind::Scaling)
                    .map_err(|_| bad("scale takes an integer exponent k for mu = 2^k")),
                _ => Err(bad("scale takes one integer")),
            },
            "rotate" => {
                let v = ints(&args)?;
                let mut r = SignedPermutation::identity();
                for (i, a) in v.iter().enumerate() {
                    if *a == 0 || a.unsigned_abs() as usize > d {
                        return Err(bad("axes are signed and 1-based"));
                    }
                    r.perm[i] = a.unsigned_abs() as usize - 1;
                    r.flip[i] = *a < 0;
                }
                r.validate(d)?;
                Ok(SymmetryKind::Rotation(r))
            }
            _ => Err(bad("unknown symmetry")),
        }
    }
}

/// Writes the form accepted by [`SymmetryKind::parse`]; rotations are
/// written for the dimension implied by their permutation prefix.
impl std::fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ints = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        match self {
            SymmetryKind::PhaseRotation(t) => write!(f, "phase {t:?}"),
            SymmetryKind::QuadraticModulation(t) => write!(f, "quadratic {t:?}"),
            SymmetryKind::Translation(m) => write!(f, "translate {}", ints(m)),
            SymmetryKind::Modulation(m) => write!(f, "modulate {}", ints(m)),
            SymmetryKind::Scaling(k) => write!(f, "scale {k}"),
            SymmetryKind::Rotation(o) => {
                let d = if o.perm[2] == 2 && o.perm[..2].iter().all(|&p| p < 2) && !o.flip[2] {
                    2
                } else {
                    3
                };
                let axes: Vec<i64> = (0..d)
                    .map(|i| {
                        let a = o.perm[i] as i64 + 1;
                        if o.flip[i] {
                            -a
                        } else {
                            a
                        }
                    })
                    .collect();
                write!(f, "rotate {}", ints(&axes))
            }
        }
    }
}

fn check_len(v: &[i64], d: usize) -> Result<()> {
    if v.len() == d {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lattice vector has {} components, expected {d}",
            v.len()
        )))
    }
}

/// `g(2^k ·)` on the same grid: decimation for `k > 0` (values outside the
/// shrunken box become zero) and trigonometric refinement for `k < 0`.
pub fn dilate(g: &Field, k: i32) -> Result<Field> {
    g.expect_side(Side::Frequency)?;
    let grid = *g.grid();
    let n = grid.n() as i64;
    let d = grid.dim();
    if k == 0 {
        return Ok(g.clone());
    }
    if k.unsigned_abs() >= 31 || (1i64 << k.unsigned_abs()) >= n {
        return Err(Error::InvalidParameter(format!(
            "dyadic scaling 2^{k} is too large for n = {n}"
        )));
    }
    let f = 1i64 << k.unsigned_abs();
    let mut out = Field::zeros(grid, Side::Frequency);
    if k > 0 {
        let mut src = [0usize; 3];
        for (flat, v) in out.values_mut().iter_mut().enumerate() {
            let idx = grid.index_of(flat);
            let mut inside = true;
            for a in 0..d {
                let j = n / 2 + f * (idx[a] as i64 - n / 2);
                if !(0..n).contains(&j) {
                    inside = false;
                    break;
                }
                src[a] = j as usize;
            }
            if inside {
                *v = g.values()[grid.flat(&src[..d])];
            }
        }
    } else {
        let fine = refine_frequency(g, f as usize)?;
        let fg = *fine.grid();
        let shift = (fg.n() - grid.n()) / 2;
        let mut src = [0usize; 3];
        for (flat, v) in out.values_mut().iter_mut().enumerate() {
            let idx = grid.index_of(flat);
            for a in 0..d {
                src[a] = idx[a] + shift;
            }
            *v = fine.values()[fg.flat(&src[..d])];
        }
    }
    Ok(out)
}

pub fn apply_symmetry(g: &Field, sym: &SymmetryKind) -> Result<Field> {
    g.expect_side(Side::Frequency)?;
    let grid = *g.grid();
    let d = grid.dim();
    let n = grid.n() as i64;
    match sym {
        SymmetryKind::PhaseRotation(theta) => Ok(g.scaled(Complex64::from_polar(1.0, *theta))),
        SymmetryKind::QuadraticModulation(tau) => Ok(g.map_with_coords(|p, v| {
            let r2: f64 = p.iter().map(|x| x * x).sum();
            v * Complex64::from_polar(1.0, tau * r2)
        })),
        SymmetryKind::Modulation(m) => {
            check_len(m, d)?;
            let hx = grid.h_phys();
            Ok(g.map_with_coords(|p, v| {
                let ph: f64 = p.iter().zip(m).map(|(a, &b)| a * b as f64 * hx).sum();
                v * Complex64::from_polar(1.0, ph)
            }))
        }
        SymmetryKind::Translation(m) => {
            check_len(m, d)?;
            if m.iter().any(|v| v.abs() >= n) {
                return Err(Error::InvalidParameter("translation leaves the grid".into()));
            }
            let mut out = Field::zeros(grid, Side::Frequency);
            let mut src = [0usize; 3];
            for (flat, v) in out.values_mut().iter_mut().enumerate() {
                let idx = grid.index_of(flat);
                let mut inside = true;
                for a in 0..d {
                    let j = idx[a] as i64 + m[a];
                    if !(0..n).contains(&j) {
                        inside = false;
                        break;
                    }
                    src[a] = j as usize;
                }
                if inside {
                    *v = g.values()[grid.flat(&src[..d])];
                }
            }
            Ok(out)
        }
        SymmetryKind::Rotation(o) => {
            o.validate(d)?;
            let mut out = Field::zeros(grid, Side::Frequency);
            let mut src = [0usize; 3];
            let nu = grid.n();
            for (flat, v) in out.values_mut().iter_mut().enumerate() {
                let idx = grid.index_of(flat);
                for a in 0..d {
                    let j = idx[o.perm[a]];
                    src[a] = if o.flip[a] { (nu - j) % nu } else { j };
                }
                *v = g.values()[grid.flat(&src[..d])];
            }
            Ok(out)
        }
        SymmetryKind::Scaling(k) => {
            let mu = 2f64.powi(*k);
            let pre = mu.powf((3.0 * d as f64 - 2.0) / 4.0);
            Ok(dilate(g, *k)?.scaled(Complex64::new(pre, 0.0)))
        }
    }
}

/// `|ℋ(Sg) − ℋ(g)| / ℋ(g)`.
pub fn check_hamiltonian_invariance(
    g: &Field,
    sym: &SymmetryKind,
    op: &dyn CubicOperator,
) -> Result<f64> {
    let h0 = op.hamiltonian(g)?;
    if h0 == 0.0 {
        return Err(Error::Degenerate("H(g) = 0; relative deviation undefined".into()));
    }
    let h1 = op.hamiltonian(&apply_symmetry(g, sym)?)?;
    Ok((h1 - h0).abs() / h0.abs())
}

/// `g(t, ξ) ↦ λ g(λ² μ^{2−2d} t, μξ)` with `μ = 2^k`: returns the trajectory
/// of the rescaled solution, whose sample times are `t / (λ² μ^{2−2d})`.
pub fn solution_rescale(traj: &Trajectory, lambda: f64, mu_exponent: i32) -> Result<Trajectory> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    let Some(first) = traj.snapshots.first() else {
        return Ok(Trajectory::default());
    };
    let d = first.grid().dim() as i32;
    let mu = 2f64.powi(mu_exponent);
    let speed = lambda * lambda * mu.powi(2 - 2 * d);
    let mut out = Trajectory::default();
    for (t, g) in traj.times.iter().zip(&traj.snapshots) {
        let h = dilate(g, mu_exponent)?.scaled(Complex64::new(lambda, 0.0));
        out.push(t / speed, h);
    }
    Ok(out)
}

/// How far a weighted space is from the boundedness hypotheses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceSupport {
    /// Smallest admissible weight exponent for the family (strict or not).
    pub threshold: f64,
    pub strict: bool,
    pub within_hypotheses: bool,
}

/// Checks that `space` belongs to one of the families `Ḷ^{2,(d−2)/2}`,
/// `L^{2,s}`, `L^{∞,s}`, `L^{p,s}` (`p ≥ 2`) or `X^{σ,N}`. Exponents below
/// the family's threshold are allowed and reported; other families are errors.
pub fn classify_space(space: &WeightedNormSpec, d: usize) -> Result<SpaceSupport> {
    space.validate()?;
    let df = d as f64;
    let unsupported = |why: &str| {
        Err(Error::InvalidParameter(format!(
            "unsupported space (p = {}, s = {}, homogeneous = {}, N = {}): {why}",
            space.p, space.s, space.homogeneous, space.derivative_order
        )))
    };
    let (threshold, strict) = if space.derivative_order > 0 {
        if !space.p.is_infinite() || space.homogeneous {
            return unsupported("derivative orders need the inhomogeneous sup-norm family");
        }
        (df - 1.0, true)
    } else if space.homogeneous {
        if space.p != 2.0 {
            return unsupported("the only homogeneous family is p = 2");
        }
        let t = (df - 2.0) / 2.0;
        return Ok(SpaceSupport {
            threshold: t,
            strict: false,
            within_hypotheses: (space.s - t).abs() < 1e-12,
        });
    } else if space.p < 2.0 {
        return unsupported("p must be at least 2");
    } else if space.p == 2.0 {
        ((df - 2.0) / 2.0, false)
    } else if space.p.is_infinite() {
        (df - 1.0, true)
    } else {
        (df - 1.0 - df / space.p, true)
    };
    let within = if strict {
        space.s > threshold
    } else {
        space.s >= threshold
    };
    Ok(SpaceSupport {
        threshold,
        strict,
        within_hypotheses: within,
    })
}

/// Ensemble used by [`empirical_norm_bound`]. Every member is multiplied by
/// the window `exp(−(|ξ|/(0.85L))^16)`.
///
/// * plateau members `⟨ξ⟩^{−s} χ(|ξ|)` with `χ = 1` up to `center_radius`
///   and a Gaussian edge of each width in `widths`;
/// * Gaussian bumps of each width centered at `|ξ₀| = center_radius` along
///   the first axis and along the diagonal;
/// * `random_phase_variants` plateau members (narrowest edge) multiplied by
///   smooth random phases seeded from `seed`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub center_radius: f64,
    pub widths: Vec<f64>,
    pub random_phase_variants: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(center_radius: f64, seed: u64) -> Self {
        Self {
            center_radius,
            widths: vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0],
            random_phase_variants: 2,
            seed,
        }
    }

    /// Members with their labels, in a fixed order.
    pub fn members(&self, grid: GridSpec, s: f64) -> Result<Vec<(String, Field)>> {
        if !(self.center_radius >= 0.0) || self.widths.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter(
                "ensemble needs a nonnegative radius and positive widths".into(),
            ));
        }
        if self.widths.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one width".into()));
        }
        let d = grid.dim();
        let r0 = self.center_radius;
        let cut = 0.85 * grid.half_width();
        let window = move |r: f64| (-(r / cut).powi(16)).exp();
        let plateau = move |w: f64| {
            move |p: &[f64]| {
                let r2: f64 = p.iter().map(|x| x * x).sum();
                let r = r2.sqrt();
                let edge = if r <= r0 {
                    1.0
                } else {
                    (-0.5 * ((r - r0) / w).powi(2)).exp()
                };
                Complex64::new((1.0 + r2).powf(-s / 2.0) * edge * window(r), 0.0)
            }
        };
        let mut out = Vec::new();
        for &w in &self.widths {
            out.push((
                format!("plateau R={r0} w={w}"),
                Field::from_fn(grid, Side::Frequency, plateau(w)),
            ));
        }
        let diag = 1.0 / (d as f64).sqrt();
        for (tag, dir) in [("axis", [1.0, 0.0, 0.0]), ("diagonal", [diag; 3])] {
            for &w in &self.widths {
                let f = Field::from_fn(grid, Side::Frequency, |p| {
                    let mut q = 0.0;
                    let mut r2 = 0.0;
                    for a in 0..d {
                        q += (p[a] - r0 * dir[a]).powi(2);
                        r2 += p[a] * p[a];
                    }
                    Complex64::new((-0.5 * q / (w * w)).exp() * window(r2.sqrt()), 0.0)
                });
                out.push((format!("bump {tag} R={r0} w={w}"), f));
            }
        }
        let base = Field::from_fn(grid, Side::Frequency, plateau(self.widths[0]));
        for i in 0..self.random_phase_variants {
            let seed = self.seed.wrapping_add(i as u64);
            let phase = smooth_phase(grid, seed);
            out.push((
                format!("plateau R={r0} w={} phase seed={seed}", self.widths[0]),
                base.zip_with(&phase, |a, b| a * b)?,
            ));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormBoundSample {
    pub space: WeightedNormSpec,
    pub ensemble_size: usize,
    pub labels: Vec<String>,
    /// `‖𝒯(f, f, f)‖_X / ‖f‖³_X` per member.
    pub observed_ratios: Vec<f64>,
    pub max_ratio: f64,
    pub support: SpaceSupport,
}

/// `‖𝒯(f, f, f)‖_X / ‖f‖³_X`.
pub fn norm_ratio(f: &Field, space: &WeightedNormSpec, op: &dyn CubicOperator) -> Result<f64> {
    let nf = weighted_norm(f, space)?;
    if !(nf > 0.0) {
        return Err(Error::Degenerate("ensemble member has zero norm".into()));
    }
    let nt = weighted_norm(&op.apply(f)?, space)?;
    let r = nt / nf.powi(3);
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite("norm ratio is not finite".into()))
    }
}

pub fn empirical_norm_bound(
    space: &WeightedNormSpec,
    ensemble: &EnsembleSpec,
    op: &dyn CubicOperator,
) -> Result<NormBoundSample> {
    let grid = *op.grid();
    let support = classify_space(space, grid.dim())?;
    let members = ensemble.members(grid, space.s)?;
    let mut labels = Vec::with_capacity(members.len());
    let mut ratios = Vec::with_capacity(members.len());
    for (label, f) in members {
        ratios.push(norm_ratio(&f, space, op)?);
        labels.push(label);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(NormBoundSample {
        space: *space,
        ensemble_size: ratios.len(),
        labels,
        observed_ratios: ratios,
        max_ratio,
        support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::gaussian;
    use crate::norms::mass;

    #[test]
    fn identity_parameters_are_exact() {
        let grid = GridSpec::new(2, 16, 4.0).unwrap();
        let g = crate::init::two_bumps(grid);
        for s in [
            SymmetryKind::PhaseRotation(0.0),
            SymmetryKind::Translation(vec![0, 0]),
            SymmetryKind::Modulation(vec![0, 0]),
            SymmetryKind::QuadraticModulation(0.0),
            SymmetryKind::Rotation(SignedPermutation::identity()),
            SymmetryKind::Scaling(0),
        ] {
            assert_eq!(apply_symmetry(&g, &s).unwrap(), g, "{s:?}");
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(
            SymmetryKind::parse("rotate -2 1", 2).unwrap(),
            SymmetryKind::Rotation(SignedPermutation {
                perm: [1, 0, 2],
                flip: [true, false, false]
            })
        );
        assert_eq!(SymmetryKind::parse("scale -1", 3).unwrap(), SymmetryKind::Scaling(-1));
        assert!(SymmetryKind::parse("rotate 1 1", 2).is_err());
        for t in ["phase 0.5", "translate 1 -2", "modulate 0 3", "quadratic 0.4", "rotate -2 1", "scale -1"] {
            assert_eq!(SymmetryKind::parse(t, 2).unwrap().to_string(), t);
        }
        assert_eq!(SymmetryKind::parse("rotate 1 2 -3", 3).unwrap().to_string(), "rotate 1 2 -3");
        assert!(SymmetryKind::parse("translate 1", 2).is_err());
        assert!(SymmetryKind::parse("shear 1", 2).is_err());
    }

    #[test]
    fn rotation_by_quarter_turn_four_times_is_identity() {
        let grid = GridSpec::new(2, 16, 4.0).unwrap();
        let g = crate::init::two_bumps(grid);
        let r = SymmetryKind::parse("rotate -2 1", 2).unwrap();
        let mut h = g.clone();
        for _ in 0..4 {
            h = apply_symmetry(&h, &r).unwrap();
        }
        assert_eq!(h, g);
    }

    #[test]
    fn decimation_and_refinement_scale_mass() {
        // ∫|μ^{(3d−2)/4} g(μξ)|² dξ = μ^{(3d−2)/2 − d} ‖g‖².
        let grid = GridSpec::new(2, 32, 8.0).unwrap();
        for (k, w, tol) in [(1, 1.5, 1e-8), (-1, 1.0, 1e-6)] {
            let g = gaussian(grid, w, &[0.0, 0.0]);
            let mu = 2f64.powi(k);
            let h = apply_symmetry(&g, &SymmetryKind::Scaling(k)).unwrap();
            let expect = mu.powf((3.0 * 2.0 - 2.0) / 2.0 - 2.0);
            assert!((mass(&h) / mass(&g) - expect).abs() < tol, "k = {k}: {}", mass(&h) / mass(&g) - expect);
        }
    }

    #[test]
    fn space_families() {
        let linf = |s| WeightedNormSpec::lebesgue(f64::INFINITY, s);
        assert!(classify_space(&linf(2.5), 3).unwrap().within_hypotheses);
        assert!(!classify_space(&linf(1.5), 3).unwrap().within_hypotheses);
        assert!(classify_space(&WeightedNormSpec::lebesgue(1.5, 3.0), 3).is_err());
        let mut hom = WeightedNormSpec::lebesgue(4.0, 1.0);
        hom.homogeneous = true;
        assert!(classify_space(&hom, 3).is_err());
        let mut x = linf(2.5);
        x.derivative_order = 1;
        assert!(classify_space(&x, 3).unwrap().within_hypotheses);
        x.p = 2.0;
        assert!(classify_space(&x, 3).is_err());
    }
}
