//! `key = value` run configuration with `#` comments.
//!
//! Unknown and repeated keys are errors. [`RunConfig::render`] writes every
//! resolved key in a fixed order, so `render(parse(c))` is a normal form.

use std::fmt::Write as _;

use crate::dynamics::{IntegratorConfig, Scheme};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::init::{gaussian, random_smooth, two_bumps};
use crate::norms::WeightedNormSpec;
use crate::operator::{Dealias, OperatorWorkspace};
use crate::oracle::PointOracleConfig;
use crate::quadrature::{QuadratureRule, QuadratureScheme, DEFAULT_NODES, DEFAULT_S_MAX};
use crate::stationary::{Constraint, VariationalRegime};
use crate::symmetry::{EnsembleSpec, SymmetryKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subcommand {
    Evolve,
    Stationary,
    Diagnose,
    Virial,
    Symmetry,
    NormBench,
    OracleCompare,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Evolve,
        Subcommand::Stationary,
        Subcommand::Diagnose,
        Subcommand::Virial,
        Subcommand::Symmetry,
        Subcommand::NormBench,
        Subcommand::OracleCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Evolve => "evolve",
            Subcommand::Stationary => "stationary",
            Subcommand::Diagnose => "diagnose",
            Subcommand::Virial => "virial",
            Subcommand::Symmetry => "symmetry",
            Subcommand::NormBench => "norm-bench",
            Subcommand::OracleCompare => "oracle-compare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    fn required(self) -> &'static [&'static str] {
        const GRID: &[&str] = &["dimension", "grid_n", "grid_half_width"];
        const TIMED: &[&str] = &["dimension", "grid_n", "grid_half_width", "dt", "t_final"];
        match self {
            Subcommand::Evolve | Subcommand::Virial => TIMED,
            Subcommand::Symmetry => &["dimension", "grid_n", "grid_half_width", "symmetry"],
            Subcommand::NormBench => &["dimension", "grid_n", "grid_half_width", "norm_p", "norm_s"],
            Subcommand::Stationary | Subcommand::Diagnose | Subcommand::OracleCompare => GRID,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InitKind {
    Gaussian,
    TwoBumps,
    Random,
    RandomEven,
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::Gaussian => "gaussian",
            InitKind::TwoBumps => "two_bumps",
            InitKind::Random => "random",
            InitKind::RandomEven => "random_even",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            InitKind::Gaussian,
            InitKind::TwoBumps,
            InitKind::Random,
            InitKind::RandomEven,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    pub fn is_random(self) -> bool {
        matches!(self, InitKind::Random | InitKind::RandomEven)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Solver {
    Petviashvili,
    Ascent,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Petviashvili => "petviashvili",
            Solver::Ascent => "ascent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "petviashvili" => Some(Solver::Petviashvili),
            "ascent" => Some(Solver::Ascent),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dimension: Option<usize>,
    pub grid_n: Option<usize>,
    pub grid_half_width: Option<f64>,
    pub quad_rule: QuadratureRule,
    pub quad_nodes: usize,
    pub quad_s_max: f64,
    pub dealias: Dealias,
    pub integrator: Scheme,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub output_every: usize,
    /// Defaults to the regime of the dimension.
    pub regime: Option<VariationalRegime>,
    pub kinetic_weight: f64,
    pub solver: Solver,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub output_dir: String,
    pub init: InitKind,
    pub init_width: f64,
    pub init_amplitude: f64,
    /// `;`-separated symmetry actions, e.g. `phase 0.3; rotate -2 1`.
    pub symmetry: Option<String>,
    pub norm_p: Option<f64>,
    pub norm_s: Option<f64>,
    pub norm_homogeneous: bool,
    pub norm_derivatives: u32,
    pub bench_radii: Vec<f64>,
    pub bench_phase_variants: usize,
    /// Evaluation points for `oracle-compare`.
    pub oracle_points: Vec<Vec<f64>>,
    pub oracle_nodes: usize,
    pub oracle_cap: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let oracle = PointOracleConfig::default();
        Self {
            dimension: None,
            grid_n: None,
            grid_half_width: None,
            quad_rule: QuadratureRule::PseudoConformalSplit,
            quad_nodes: DEFAULT_NODES,
            quad_s_max: DEFAULT_S_MAX,
            dealias: Dealias::ZeroPad2x,
            integrator: Scheme::Rk4,
            dt: None,
            t_final: None,
            output_every: 10,
            regime: None,
            kinetic_weight: 1.0,
            solver: Solver::Petviashvili,
            tol: 1e-8,
            max_iter: 500,
            seed: None,
            deterministic: false,
            output_dir: "out".into(),
            init: InitKind::Gaussian,
            init_width: 1.0,
            init_amplitude: 1.0,
            symmetry: None,
            norm_p: None,
            norm_s: None,
            norm_homogeneous: false,
            norm_derivatives: 0,
            bench_radii: vec![0.0, 2.0, 4.0, 6.0],
            bench_phase_variants: 2,
            oracle_points: Vec::new(),
            oracle_nodes: oracle.radial_nodes,
            oracle_cap: oracle.domain_cap,
        }
    }
}

fn invalid(key: &str, value: &str, why: &str) -> Error {
    Error::Config(format!("invalid value '{value}' for {key}: {why}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| invalid(key, value, "not a number of the expected kind"))
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v: f64 = num(key, value)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, value, "must be positive and finite"))
    }
}

fn at_least(key: &str, value: &str, min: usize) -> Result<usize> {
    let v: usize = num(key, value)?;
    if v >= min {
        Ok(v)
    } else {
        Err(invalid(key, value, &format!("must be at least {min}")))
    }
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

fn float_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            let v: f64 = num(key, s.trim())?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(invalid(key, value, "entries must be finite"))
            }
        })
        .collect()
}

/// Shortest round-tripping form, e.g. `1e-8` rather than `0.00000001`.
fn fnum(x: f64) -> String {
    format!("{x:?}")
}

fn join(v: &[f64], sep: &str) -> String {
    v.iter().map(|x| fnum(*x)).collect::<Vec<_>>().join(sep)
}

impl RunConfig {
    pub const KEYS: [&'static str; 32] = [
        "dimension",
        "grid_n",
        "grid_half_width",
        "quad_rule",
        "quad_nodes",
        "quad_s_max",
        "dealias",
        "integrator",
        "dt",
        "t_final",
        "output_every",
        "regime",
        "kinetic_weight",
        "solver",
        "tol",
        "max_iter",
        "seed",
        "deterministic",
        "output_dir",
        "init",
        "init_width",
        "init_amplitude",
        "symmetry",
        "norm_p",
        "norm_s",
        "norm_homogeneous",
        "norm_derivatives",
        "bench_radii",
        "bench_phase_variants",
        "oracle_points",
        "oracle_nodes",
        "oracle_cap",
    ];

    /// Parses without checking subcommand requirements.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("duplicate key '{key}'")));
            }
            cfg.set(key, value)?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dimension" => {
                let d: usize = num(key, value)?;
                if !(2..=3).contains(&d) {
                    return Err(invalid(key, value, "dimension must be 2 or 3"));
                }
                self.dimension = Some(d);
            }
            "grid_n" => {
                let n = at_least(key, value, 4)?;
                if n % 2 != 0 {
                    return Err(invalid(key, value, "must be even"));
                }
                self.grid_n = Some(n);
            }
            "grid_half_width" => self.grid_half_width = Some(positive(key, value)?),
            "quad_rule" => {
                self.quad_rule = QuadratureRule::parse(value)
                    .ok_or_else(|| invalid(key, value, "expected split, gauss_legendre or tanh_sinh"))?
            }
            "quad_nodes" => self.quad_nodes = at_least(key, value, 2)?,
            "quad_s_max" => self.quad_s_max = positive(key, value)?,
            "dealias" => {
                self.dealias = Dealias::parse(value)
                    .ok_or_else(|| invalid(key, value, "expected none, two_thirds or zero_pad_2x"))?
            }
            "integrator" => {
                self.integrator = Scheme::parse(value)
                    .ok_or_else(|| invalid(key, value, "expected rk4 or implicit_midpoint"))?
            }
            "dt" => self.dt = Some(positive(key, value)?),
            "t_final" => {
                let t: f64 = num(key, value)?;
                if !(t.is_finite() && t >= 0.0) {
                    return Err(invalid(key, value, "must be nonnegative"));
                }
                self.t_final = Some(t);
            }
            "output_every" => self.output_every = at_least(key, value, 1)?,
            "regime" => {
                self.regime = Some(VariationalRegime::parse(value).ok_or_else(|| {
                    invalid(key, value, "expected mass_only, mass_plus_kinetic or kinetic_only")
                })?)
            }
            "kinetic_weight" => self.kinetic_weight = positive(key, value)?,
            "solver" => {
                self.solver = Solver::parse(value)
                    .ok_or_else(|| invalid(key, value, "expected petviashvili or ascent"))?
            }
            "tol" => self.tol = positive(key, value)?,
            "max_iter" => self.max_iter = at_least(key, value, 1)?,
            "seed" => self.seed = Some(num(key, value)?),
            "deterministic" => self.deterministic = flag(key, value)?,
            "output_dir" => {
                if value.is_empty() {
                    return Err(invalid(key, value, "must not be empty"));
                }
                self.output_dir = value.to_string();
            }
            "init" => {
                self.init = InitKind::parse(value).ok_or_else(|| {
                    invalid(key, value, "expected gaussian, two_bumps, random or random_even")
                })?
            }
            "init_width" => self.init_width = positive(key, value)?,
            "init_amplitude" => self.init_amplitude = positive(key, value)?,
            "symmetry" => {
                if value.is_empty() {
                    return Err(invalid(key, value, "must not be empty"));
                }
                let parts: Vec<&str> = value.split(';').map(str::trim).collect();
                self.symmetry = Some(parts.join("; "));
            }
            "norm_p" => {
                let p: f64 = if value == "inf" {
                    f64::INFINITY
                } else {
                    num(key, value)?
                };
                if !(p >= 1.0) {
                    return Err(invalid(key, value, "must be >= 1 or inf"));
                }
                self.norm_p = Some(p);
            }
            "norm_s" => {
                let s: f64 = num(key, value)?;
                if !s.is_finite() {
                    return Err(invalid(key, value, "must be finite"));
                }
                self.norm_s = Some(s);
            }
            "norm_homogeneous" => self.norm_homogeneous = flag(key, value)?,
            "norm_derivatives" => self.norm_derivatives = num(key, value)?,
            "bench_radii" => {
                let v = float_list(key, value)?;
                if v.iter().any(|r| *r < 0.0) {
                    return Err(invalid(key, value, "radii must be nonnegative"));
                }
                self.bench_radii = v;
            }
            "bench_phase_variants" => self.bench_phase_variants = num(key, value)?,
            "oracle_points" => {
                self.oracle_points = value
                    .split(';')
                    .map(|p| float_list(key, p.trim()))
                    .collect::<Result<_>>()?
            }
            "oracle_nodes" => self.oracle_nodes = at_least(key, value, 8)?,
            "oracle_cap" => self.oracle_cap = positive(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Cross-key consistency that does not depend on the subcommand.
    fn check(&self) -> Result<()> {
        if let Some(d) = self.dimension {
            if let Some(r) = self.regime {
                r.check(d)?;
            }
            if let Some(p) = self.oracle_points.iter().find(|p| p.len() != d) {
                return Err(Error::Config(format!(
                    "oracle point {p:?} does not have {d} coordinates"
                )));
            }
            if let Some(s) = &self.symmetry {
                for part in s.split(';') {
                    SymmetryKind::parse(part, d).map_err(|e| Error::Config(e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    /// Keys the subcommand needs that are absent, including `seed` when a
    /// random initializer or random-phase ensemble is used.
    pub fn missing_for(&self, sub: Subcommand) -> Vec<&'static str> {
        let mut missing: Vec<&'static str> = sub
            .required()
            .iter()
            .copied()
            .filter(|k| match *k {
                "dimension" => self.dimension.is_none(),
                "grid_n" => self.grid_n.is_none(),
                "grid_half_width" => self.grid_half_width.is_none(),
                "dt" => self.dt.is_none(),
                "t_final" => self.t_final.is_none(),
                "symmetry" => self.symmetry.is_none(),
                "norm_p" => self.norm_p.is_none(),
                "norm_s" => self.norm_s.is_none(),
                _ => false,
            })
            .collect();
        let random_bench = sub == Subcommand::NormBench && self.bench_phase_variants > 0;
        if self.seed.is_none() && (self.init.is_random() || random_bench) {
            missing.push("seed");
        }
        missing
    }

    pub fn require(&self, sub: Subcommand) -> Result<()> {
        let missing = self.missing_for(sub);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "missing required keys for {}: {}",
                sub.name(),
                missing.join(", ")
            )))
        }
    }

    /// Every key with its resolved value; absent optional keys are omitted.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut v: Vec<(&'static str, String)> = Vec::new();
        let mut opt = |k: &'static str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k, x));
            }
        };
        opt("dimension", self.dimension.map(|x| x.to_string()));
        opt("grid_n", self.grid_n.map(|x| x.to_string()));
        opt("grid_half_width", self.grid_half_width.map(fnum));
        opt("quad_rule", Some(self.quad_rule.name().into()));
        opt("quad_nodes", Some(self.quad_nodes.to_string()));
        opt("quad_s_max", Some(fnum(self.quad_s_max)));
        opt("dealias", Some(self.dealias.name().into()));
        opt("integrator", Some(self.integrator.name().into()));
        opt("dt", self.dt.map(fnum));
        opt("t_final", self.t_final.map(fnum));
        opt("output_every", Some(self.output_every.to_string()));
        opt("regime", self.regime.map(|r| r.name().into()));
        opt("kinetic_weight", Some(fnum(self.kinetic_weight)));
        opt("solver", Some(self.solver.name().into()));
        opt("tol", Some(fnum(self.tol)));
        opt("max_iter", Some(self.max_iter.to_string()));
        opt("seed", self.seed.map(|x| x.to_string()));
        opt("deterministic", Some(self.deterministic.to_string()));
        opt("output_dir", Some(self.output_dir.clone()));
        opt("init", Some(self.init.name().into()));
        opt("init_width", Some(fnum(self.init_width)));
        opt("init_amplitude", Some(fnum(self.init_amplitude)));
        opt("symmetry", self.symmetry.clone());
        opt(
            "norm_p",
            self.norm_p
                .map(|p| if p.is_infinite() { "inf".into() } else { fnum(p) }),
        );
        opt("norm_s", self.norm_s.map(fnum));
        opt("norm_homogeneous", Some(self.norm_homogeneous.to_string()));
        opt("norm_derivatives", Some(self.norm_derivatives.to_string()));
        opt("bench_radii", Some(join(&self.bench_radii, ",")));
        opt("bench_phase_variants", Some(self.bench_phase_variants.to_string()));
        if !self.oracle_points.is_empty() {
            let pts: Vec<String> = self.oracle_points.iter().map(|p| join(p, ",")).collect();
            opt("oracle_points", Some(pts.join(";")));
        }
        opt("oracle_nodes", Some(self.oracle_nodes.to_string()));
        opt("oracle_cap", Some(fnum(self.oracle_cap)));
        v
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("missing required key {key}")))
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(
            Self::need(self.dimension, "dimension")?,
            Self::need(self.grid_n, "grid_n")?,
            Self::need(self.grid_half_width, "grid_half_width")?,
        )
    }

    pub fn quadrature(&self) -> Result<QuadratureScheme> {
        QuadratureScheme::new(self.quad_rule, self.quad_nodes, self.quad_s_max)
    }

    pub fn workspace(&self) -> Result<OperatorWorkspace> {
        Ok(OperatorWorkspace::new(self.grid()?, self.quadrature()?, self.dealias)?
            .with_deterministic(self.deterministic))
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig> {
        let cfg = IntegratorConfig::new(
            self.integrator,
            Self::need(self.dt, "dt")?,
            Self::need(self.t_final, "t_final")?,
        );
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn constraint(&self) -> Result<Constraint> {
        let d = Self::need(self.dimension, "dimension")?;
        let regime = match self.regime {
            Some(r) => r,
            None => VariationalRegime::for_dimension(d)?,
        };
        let c = Constraint::new(regime, self.kinetic_weight)?;
        c.check(d)?;
        Ok(c)
    }

    pub fn initial_field(&self) -> Result<Field> {
        let grid = self.grid()?;
        let g = match self.init {
            InitKind::Gaussian => gaussian(grid, self.init_width, &[0.0; 3][..grid.dim()]),
            InitKind::TwoBumps => two_bumps(grid),
            InitKind::Random | InitKind::RandomEven => random_smooth(
                grid,
                self.init_width,
                Self::need(self.seed, "seed")?,
                self.init == InitKind::RandomEven,
            ),
        };
        Ok(g.scaled(self.init_amplitude.into()))
    }

    pub fn symmetries(&self) -> Result<Vec<SymmetryKind>> {
        let d = Self::need(self.dimension, "dimension")?;
        let text = self
            .symmetry
            .as_deref()
            .ok_or_else(|| Error::Config("missing required key symmetry".into()))?;
        text.split(';').map(|s| SymmetryKind::parse(s, d)).collect()
    }

    pub fn norm_spec(&self) -> Result<WeightedNormSpec> {
        let spec = WeightedNormSpec {
            p: Self::need(self.norm_p, "norm_p")?,
            s: Self::need(self.norm_s, "norm_s")?,
            homogeneous: self.norm_homogeneous,
            derivative_order: self.norm_derivatives,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ensemble(&self, center_radius: f64) -> EnsembleSpec {
        let mut e = EnsembleSpec::new(center_radius, self.seed.unwrap_or(0));
        e.random_phase_variants = self.bench_phase_variants;
        e
    }

    pub fn oracle_config(&self) -> PointOracleConfig {
        PointOracleConfig {
            radial_nodes: self.oracle_nodes,
            sphere_nodes: self.oracle_nodes,
            hyperplane_nodes: self.oracle_nodes,
            domain_cap: self.oracle_cap,
        }
    }
}

/// Parses and checks the keys `sub` requires.
pub fn parse_config(text: &str, sub: Subcommand) -> Result<RunConfig> {
    let cfg = RunConfig::parse(text)?;
    cfg.require(sub)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_evolve_lists_missing_keys() {
        let e = parse_config("", Subcommand::Evolve).unwrap_err().to_string();
        for k in ["dimension", "grid_n", "grid_half_width", "dt", "t_final"] {
            assert!(e.contains(k), "{e}");
        }
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert!(RunConfig::parse("tolerance = 1e-8").is_err());
        assert!(RunConfig::parse("tol = 1e-8\ntol = 1e-9").is_err());
        assert!(RunConfig::parse("grid_n = 7").is_err());
    }

    #[test]
    fn render_is_a_normal_form() {
        let text = "# comment\ndimension=3\n grid_n = 32\ngrid_half_width = 8 # box\n\
                    dt = 1e-3\nt_final = 1\nnorm_p = inf\noracle_points = 0,0,0; 1,0,0\n\
                    symmetry = phase 0.5;rotate -2 1 3";
        let c = parse_config(text, Subcommand::Evolve).unwrap();
        let r = c.render();
        assert_eq!(RunConfig::parse(&r).unwrap(), c);
        assert_eq!(RunConfig::parse(&r).unwrap().render(), r);
        assert!(r.contains("quad_nodes = 64\n"));
        assert!(r.contains("dt = 0.001\n"));
        assert!(r.contains("tol = 1e-8\n"));
    }

    #[test]
    fn random_init_needs_seed() {
        let c = RunConfig::parse("dimension = 2\ngrid_n = 8\ngrid_half_width = 2\ninit = random")
            .unwrap();
        assert_eq!(c.missing_for(Subcommand::Diagnose), vec!["seed"]);
    }
}
