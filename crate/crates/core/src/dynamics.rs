//! Time integration of `i ∂ₜ g = 𝒯(g, g, g)` with conserved-quantity tracking.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Side};
use crate::norms::{angular_momentum, first_moments, mass, second_moment};
use crate::operator::CubicOperator;
use crate::transform::to_physical;

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Rk4,
    ImplicitMidpoint,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk4 => "rk4",
            Scheme::ImplicitMidpoint => "implicit_midpoint",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rk4" => Some(Scheme::Rk4),
            "implicit_midpoint" => Some(Scheme::ImplicitMidpoint),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    /// Relative one-step error target for step-doubling control.
    pub adapt: Option<f64>,
    pub midpoint_tol: f64,
    pub midpoint_max_iter: usize,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_final: f64) -> Self {
        Self {
            scheme,
            dt,
            t_final,
            adapt: None,
            midpoint_tol: 1e-13,
            midpoint_max_iter: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt >= 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {} must be >= 0", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_final = {} must be >= 0",
                self.t_final
            )));
        }
        if !(self.midpoint_tol > 0.0) {
            return Err(Error::InvalidParameter("midpoint_tol must be > 0".into()));
        }
        if let Some(a) = self.adapt {
            if !(a > 0.0) {
                return Err(Error::InvalidParameter("adapt target must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Conserved quantities and related functionals at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    /// `∫ ξ |g|² dξ`.
    pub momentum: Vec<f64>,
    /// `∫ |ξ|² |g|² dξ`.
    pub kinetic: f64,
    /// `∫ x |ǧ|² dx`.
    pub position: Vec<f64>,
    /// Pairs `(i, j)` with `i < j`, in lexicographic order.
    pub angular: Vec<Complex64>,
    pub hamiltonian: f64,
    /// `‖∇g‖² = ∫ |x|² |ǧ|² dx`.
    pub grad_norm_sq: f64,
    pub virial_rhs: f64,
}

/// Axis pairs `(i, j)`, `i < j`, in the order used by [`DiagnosticsRecord::angular`].
pub fn angular_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            v.push((i, j));
        }
    }
    v
}

pub fn diagnostics(g: &Field, t: f64, op: &dyn CubicOperator) -> Result<DiagnosticsRecord> {
    g.expect_side(Side::Frequency)?;
    let check = to_physical(g)?;
    let d = g.grid().dim();
    let angular = angular_pairs(d)
        .into_iter()
        .map(|(i, j)| angular_momentum(g, i, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsRecord {
        t,
        mass: mass(g),
        momentum: first_moments(g),
        kinetic: second_moment(g),
        position: first_moments(&check),
        angular,
        hamiltonian: op.hamiltonian(g)?,
        grad_norm_sq: second_moment(&check),
        virial_rhs: op.virial_rhs(g)?,
    })
}

/// `-i·𝒯(g, g, g)`.
pub fn rhs(g: &Field, op: &dyn CubicOperator) -> Result<Field> {
    Ok(op.apply(g)?.scaled(MINUS_I))
}

fn rk4(g: &Field, dt: f64, op: &dyn CubicOperator) -> Result<Field> {
    let c = |a: f64| Complex64::new(a, 0.0);
    let k1 = rhs(g, op)?;
    let mut y = g.clone();
    y.axpy(c(0.5 * dt), &k1)?;
    let k2 = rhs(&y, op)?;
    let mut y = g.clone();
    y.axpy(c(0.5 * dt), &k2)?;
    let k3 = rhs(&y, op)?;
    let mut y = g.clone();
    y.axpy(c(dt), &k3)?;
    let k4 = rhs(&y, op)?;
    let mut out = g.clone();
    out.axpy(c(dt / 6.0), &k1)?;
    out.axpy(c(dt / 3.0), &k2)?;
    out.axpy(c(dt / 3.0), &k3)?;
    out.axpy(c(dt / 6.0), &k4)?;
    Ok(out)
}

fn midpoint(g: &Field, dt: f64, cfg: &IntegratorConfig, op: &dyn CubicOperator) -> Result<Field> {
    let c = Complex64::new(dt, 0.0);
    let mut next = g.clone();
    next.axpy(c, &rhs(g, op)?)?;
    for _ in 0..cfg.midpoint_max_iter {
        let m = g.add(&next)?.scaled(Complex64::new(0.5, 0.0));
        let mut cand = g.clone();
        cand.axpy(c, &rhs(&m, op)?)?;
        let change = cand.rel_distance(&next)?;
        next = cand;
        if change <= cfg.midpoint_tol {
            return Ok(next);
        }
    }
    Err(Error::NoConvergence(format!(
        "implicit midpoint fixed point did not reach {} in {} iterations (dt = {dt} too large?)",
        cfg.midpoint_tol, cfg.midpoint_max_iter
    )))
}

/// One step of size `dt` with the configured scheme.
pub fn step_by(
    g: &Field,
    dt: f64,
    cfg: &IntegratorConfig,
    op: &dyn CubicOperator,
) -> Result<Field> {
    if dt == 0.0 {
        return Ok(g.clone());
    }
    match cfg.scheme {
        Scheme::Rk4 => rk4(g, dt, op),
        Scheme::ImplicitMidpoint => midpoint(g, dt, cfg, op),
    }
}

/// One step of size `cfg.dt` from time `t`.
pub fn step(
    g: &Field,
    t: f64,
    cfg: &IntegratorConfig,
    op: &dyn CubicOperator,
) -> Result<(Field, f64)> {
    cfg.validate()?;
    Ok((step_by(g, cfg.dt, cfg, op)?, t + cfg.dt))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, g: Field) {
        self.times.push(t);
        self.snapshots.push(g);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&Field> {
        self.snapshots.last()
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub trajectory: Trajectory,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub steps: usize,
}

fn ensure_finite(g: &Field, t: f64) -> Result<()> {
    if g.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("field became non-finite at t = {t}")))
    }
}

/// Advances `g0` to `cfg.t_final`, storing a snapshot and a diagnostics record
/// every `cadence` steps and at the final time.
pub fn evolve(
    g0: &Field,
    cfg: &IntegratorConfig,
    op: &dyn CubicOperator,
    cadence: usize,
) -> Result<Evolution> {
    cfg.validate()?;
    g0.expect_side(Side::Frequency)?;
    let cadence = cadence.max(1);
    let mut traj = Trajectory::default();
    let mut diags = Vec::new();
    let record = |g: &Field, t: f64, traj: &mut Trajectory, diags: &mut Vec<_>| -> Result<()> {
        diags.push(diagnostics(g, t, op)?);
        traj.push(t, g.clone());
        Ok(())
    };
    let mut g = g0.clone();
    ensure_finite(&g, 0.0)?;
    record(&g, 0.0, &mut traj, &mut diags)?;
    if cfg.t_final == 0.0 || cfg.dt == 0.0 {
        return Ok(Evolution {
            trajectory: traj,
            diagnostics: diags,
            steps: 0,
        });
    }
    if let Some(target) = cfg.adapt {
        return evolve_adaptive(g, cfg, op, cadence, target, traj, diags);
    }
    let steps = ((cfg.t_final / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * cfg.dt;
        let t = if k == steps { cfg.t_final } else { k as f64 * cfg.dt };
        g = step_by(&g, t - t_prev, cfg, op)?;
        ensure_finite(&g, t)?;
        if k % cadence == 0 || k == steps {
            record(&g, t, &mut traj, &mut diags)?;
        }
    }
    Ok(Evolution {
        trajectory: traj,
        diagnostics: diags,
        steps,
    })
}

fn evolve_adaptive(
    mut g: Field,
    cfg: &IntegratorConfig,
    op: &dyn CubicOperator,
    cadence: usize,
    target: f64,
    mut traj: Trajectory,
    mut diags: Vec<DiagnosticsRecord>,
) -> Result<Evolution> {
    let mut t = 0.0;
    let mut h = cfg.dt;
    let mut steps = 0;
    while t < cfg.t_final {
        let h_try = h.min(cfg.t_final - t);
        let big = step_by(&g, h_try, cfg, op)?;
        let half = step_by(&g, 0.5 * h_try, cfg, op)?;
        let small = step_by(&half, 0.5 * h_try, cfg, op)?;
        let err = big.rel_distance(&small)?;
        let factor = if err > 0.0 {
            0.9 * (target / err).powf(0.2)
        } else {
            2.0
        };
        if err <= target {
            t += h_try;
            g = small;
            ensure_finite(&g, t)?;
            steps += 1;
            if steps % cadence == 0 || t >= cfg.t_final {
                diags.push(diagnostics(&g, t, op)?);
                traj.push(t, g.clone());
            }
            h = h_try * factor.min(2.0);
        } else {
            h = h_try * factor.max(0.2);
            if h < 1e-14 * cfg.t_final.max(1.0) {
                return Err(Error::NoConvergence("adaptive step size underflow".into()));
            }
        }
    }
    Ok(Evolution {
        trajectory: traj,
        diagnostics: diags,
        steps,
    })
}

/// Preflight probe: halves `dt0` (at most three times) until the one-step
/// Richardson error estimate relative to `‖g0‖` is below `target`. Returns the
/// chosen step and its estimated error.
pub fn preflight_dt(
    g0: &Field,
    cfg: &IntegratorConfig,
    op: &dyn CubicOperator,
    dt0: f64,
    target: f64,
) -> Result<(f64, f64)> {
    let mut dt = dt0;
    let mut err = f64::INFINITY;
    for _ in 0..=3 {
        let big = step_by(g0, dt, cfg, op)?;
        let half = step_by(g0, 0.5 * dt, cfg, op)?;
        let small = step_by(&half, 0.5 * dt, cfg, op)?;
        err = big.sub(&small)?.norm() / g0.norm() * 16.0 / 15.0;
        if err <= target {
            return Ok((dt, err));
        }
        dt *= 0.5;
    }
    Ok((dt * 2.0, err))
}

/// Maximum relative drift of each conserved quantity over a record series.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub mass: f64,
    pub momentum: f64,
    pub kinetic: f64,
    pub position: f64,
    pub angular: f64,
    pub hamiltonian: f64,
    pub grad_norm_sq: f64,
}

impl DriftReport {
    pub fn entries(&self) -> [(&'static str, f64); 7] {
        [
            ("mass", self.mass),
            ("momentum", self.momentum),
            ("kinetic", self.kinetic),
            ("position", self.position),
            ("angular", self.angular),
            ("hamiltonian", self.hamiltonian),
            ("grad_norm_sq", self.grad_norm_sq),
        ]
    }
}

fn rel(now: f64, then: f64) -> f64 {
    if then != 0.0 {
        (now - then).abs() / then.abs()
    } else {
        now.abs()
    }
}

fn rel_vec(now: &[f64], then: &[f64]) -> f64 {
    let diff: f64 = now.iter().zip(then).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let base: f64 = then.iter().map(|b| b * b).sum::<f64>().sqrt();
    if base > 0.0 {
        diff / base
    } else {
        diff
    }
}

pub fn drift(records: &[DiagnosticsRecord]) -> DriftReport {
    let mut out = DriftReport {
        mass: 0.0,
        momentum: 0.0,
        kinetic: 0.0,
        position: 0.0,
        angular: 0.0,
        hamiltonian: 0.0,
        grad_norm_sq: 0.0,
    };
    let Some(first) = records.first() else {
        return out;
    };
    let flat = |v: &[Complex64]| -> Vec<f64> { v.iter().flat_map(|z| [z.re, z.im]).collect() };
    for r in records {
        out.mass = out.mass.max(rel(r.mass, first.mass));
        out.momentum = out.momentum.max(rel_vec(&r.momentum, &first.momentum));
        out.kinetic = out.kinetic.max(rel(r.kinetic, first.kinetic));
        out.position = out.position.max(rel_vec(&r.position, &first.position));
        out.angular = out
            .angular
            .max(rel_vec(&flat(&r.angular), &flat(&first.angular)));
        out.hamiltonian = out.hamiltonian.max(rel(r.hamiltonian, first.hamiltonian));
        out.grad_norm_sq = out.grad_norm_sq.max(rel(r.grad_norm_sq, first.grad_norm_sq));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct VirialSample {
    pub t: f64,
    pub fd_derivative: f64,
    pub rhs: f64,
    pub rel_discrepancy: f64,
}

/// Finite-difference `d/dt ‖∇g‖²` at interior snapshots (five-point stencil
/// when at least five snapshots are given, three-point otherwise) against
/// the quadrature right-hand side at the same snapshot.
pub fn virial_check(window: &Trajectory, op: &dyn CubicOperator) -> Result<Vec<VirialSample>> {
    let m = window.len();
    if m < 3 {
        return Err(Error::InvalidParameter(
            "virial check needs at least 3 snapshots".into(),
        ));
    }
    let h = window.times[1] - window.times[0];
    for w in window.times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300) {
            return Err(Error::InvalidParameter(
                "virial check needs uniformly spaced snapshots".into(),
            ));
        }
    }
    let gsq: Vec<f64> = window
        .snapshots
        .iter()
        .map(|g| to_physical(g).map(|c| second_moment(&c)))
        .collect::<Result<_>>()?;
    let (lo, hi) = if m >= 5 { (2, m - 2) } else { (1, m - 1) };
    (lo..hi)
        .map(|i| {
            let fd = if m >= 5 {
                (-gsq[i + 2] + 8.0 * gsq[i + 1] - 8.0 * gsq[i - 1] + gsq[i - 2]) / (12.0 * h)
            } else {
                (gsq[i + 1] - gsq[i - 1]) / (2.0 * h)
            };
            let rhs = op.virial_rhs(&window.snapshots[i])?;
            let scale = rhs.abs().max(fd.abs());
            let rel_discrepancy = if scale > 0.0 {
                (fd - rhs).abs() / rhs.abs().max(1e-300)
            } else {
                0.0
            };
            Ok(VirialSample {
                t: window.times[i],
                fd_derivative: fd,
                rhs,
                rel_discrepancy,
            })
        })
        .collect()
}
