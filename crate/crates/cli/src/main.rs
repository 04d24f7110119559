//! `crlab`: reproducible experiments for the continuous resonant equation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crlab_core::dynamics::{drift, evolve, virial_check, DiagnosticsRecord};
use crlab_core::io::{
    diagnostics_csv, format_number, read_snapshot, write_snapshot, InitKind, RunConfig, Solver,
    Subcommand, FORMAT_VERSION,
};
use crlab_core::operator::ZeroOperator;
use crlab_core::oracle::{oracle_t_at, FieldInterpolant};
use crlab_core::stationary::{
    extract_multipliers, gradient_ascent_solve, petviashvili_solve, pohozaev_report, AscentPolicy,
};
use crlab_core::symmetry::{apply_symmetry, check_hamiltonian_invariance, empirical_norm_bound};
use crlab_core::norms::mass;
use crlab_core::{CubicOperator, Error, Field, Result, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Evolve,
    Stationary,
    Diagnose,
    Virial,
    Symmetry,
    NormBench,
    OracleCompare,
}

impl Command {
    fn subcommand(self) -> Subcommand {
        match self {
            Command::Evolve => Subcommand::Evolve,
            Command::Stationary => Subcommand::Stationary,
            Command::Diagnose => Subcommand::Diagnose,
            Command::Virial => Subcommand::Virial,
            Command::Symmetry => Subcommand::Symmetry,
            Command::NormBench => Subcommand::NormBench,
            Command::OracleCompare => Subcommand::OracleCompare,
        }
    }
}

/// Thread count comes from CRLAB_THREADS when set.
#[derive(Debug, Parser)]
#[command(name = "crlab", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed reduction order for bitwise-reproducible output.
    #[arg(long)]
    deterministic: bool,
    /// Replace the cubic term by zero (free evolution is the identity).
    #[arg(long)]
    zero_nonlinearity: bool,
    /// Snapshot(s) used instead of the configured initializer.
    #[arg(long)]
    input: Vec<PathBuf>,
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
    zero: bool,
    inputs: Vec<PathBuf>,
}

impl Run {
    fn operator(&self) -> Result<Box<dyn CubicOperator>> {
        if self.zero {
            Ok(Box::new(ZeroOperator::new(self.cfg.grid()?)))
        } else {
            Ok(Box::new(self.cfg.workspace()?))
        }
    }

    /// First `--input` snapshot if given, else the configured initializer.
    fn initial(&self) -> Result<(Field, f64)> {
        match self.inputs.first() {
            Some(p) => self.load(p),
            None => Ok((self.cfg.initial_field()?, 0.0)),
        }
    }

    fn load(&self, p: &Path) -> Result<(Field, f64)> {
        let (g, t) = read_snapshot(p)?;
        g.expect_side(Side::Frequency)?;
        if *g.grid() != self.cfg.grid()? {
            return Err(Error::Mismatch(format!(
                "{} does not match the configured grid",
                p.display()
            )));
        }
        Ok((g, t))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn config_json(cfg: &RunConfig) -> Value {
    let mut m = Map::new();
    for (k, v) in cfg.entries() {
        m.insert(k.to_string(), Value::String(v));
    }
    Value::Object(m)
}

fn write_metadata(run: &Run, sub: Subcommand, results: Value) -> Result<()> {
    let meta = json!({
        "subcommand": sub.name(),
        "config": config_json(&run.cfg),
        "config_text": run.cfg.render(),
        "inputs": run.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "zero_nonlinearity": run.zero,
        "versions": {
            "crlab": env!("CARGO_PKG_VERSION"),
            "snapshot_format": FORMAT_VERSION,
        },
        "results": results,
    });
    let text = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Format(format!("metadata serialization: {e}")))?;
    fs::write(run.path("metadata.json"), text + "\n")?;
    fs::write(run.path("config.txt"), run.cfg.render())?;
    Ok(())
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn cmd_evolve(run: &Run) -> Result<Value> {
    let op = run.operator()?;
    let (g0, _) = run.initial()?;
    let icfg = run.cfg.integrator_config()?;
    let evo = evolve(&g0, &icfg, op.as_ref(), run.cfg.output_every)?;
    for (i, (t, g)) in evo.trajectory.times.iter().zip(&evo.trajectory.snapshots).enumerate() {
        write_snapshot(g, *t, &run.path(&format!("snap_{i:05}.crf")))?;
    }
    let d = g0.grid().dim();
    fs::write(run.path("diagnostics.csv"), diagnostics_csv(&evo.diagnostics, d))?;
    let rep = drift(&evo.diagnostics);
    let drift: Map<String, Value> = rep
        .entries()
        .iter()
        .map(|(k, v)| (k.to_string(), finite_or_null(*v)))
        .collect();
    println!(
        "evolve: {} steps to t = {}, {} snapshots, max relative drift {:.3e}",
        evo.steps,
        icfg.t_final,
        evo.trajectory.len(),
        rep.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    );
    Ok(json!({
        "steps": evo.steps,
        "snapshots": evo.trajectory.len(),
        "drift": drift,
    }))
}

fn cmd_stationary(run: &Run) -> Result<Value> {
    let op = run.operator()?;
    let (init, _) = run.initial()?;
    let constraint = run.cfg.constraint()?;
    let res = match run.cfg.solver {
        Solver::Petviashvili => {
            petviashvili_solve(&init, constraint, run.cfg.tol, run.cfg.max_iter, op.as_ref())?
        }
        Solver::Ascent => {
            let policy = AscentPolicy {
                max_iter: run.cfg.max_iter,
                ..AscentPolicy::default()
            };
            gradient_ascent_solve(&init, constraint, &policy, run.cfg.tol, op.as_ref())?
        }
    };
    write_snapshot(&res.phi, 0.0, &run.path("profile.crf"))?;
    let rep = pohozaev_report(&res.phi, res.lambda, res.mu, op.as_ref())?;
    let mult = extract_multipliers(&res.phi, op.as_ref())?;
    println!(
        "stationary: lambda = {} mu = {} residual = {:.3e} iterations = {} ratios = {:.6} {:.6} (expected {} {})",
        res.lambda,
        res.mu,
        res.residual,
        res.iterations,
        rep.kinetic_ratio,
        rep.mass_ratio,
        rep.expected_kinetic_ratio,
        rep.expected_mass_ratio
    );
    Ok(json!({
        "solver": run.cfg.solver.name(),
        "regime": constraint.regime.name(),
        "kinetic_weight": constraint.kinetic_weight,
        "lambda": res.lambda,
        "mu": res.mu,
        "residual": res.residual,
        "iterations": res.iterations,
        "converged": res.converged,
        "normalization": res.normalization,
        "pohozaev": {
            "kinetic_ratio": rep.kinetic_ratio,
            "mass_ratio": rep.mass_ratio,
            "expected_kinetic_ratio": rep.expected_kinetic_ratio,
            "expected_mass_ratio": rep.expected_mass_ratio,
            "max_ratio_error": rep.max_ratio_error(),
            "energy_residual": rep.energy_residual,
            "pohozaev_residual": rep.pohozaev_residual,
            "dilation_defect": rep.dilation_defect,
        },
        "extracted_multipliers": {
            "lambda_identity": mult.identity.0,
            "mu_identity": mult.identity.1,
            "lambda_least_squares": mult.least_squares.0,
            "mu_least_squares": mult.least_squares.1,
        },
    }))
}

fn cmd_diagnose(run: &Run) -> Result<Value> {
    let op = run.operator()?;
    let fields: Vec<(Field, f64)> = if run.inputs.is_empty() {
        vec![run.initial()?]
    } else {
        run.inputs.iter().map(|p| run.load(p)).collect::<Result<_>>()?
    };
    let records: Vec<DiagnosticsRecord> = fields
        .iter()
        .map(|(g, t)| crlab_core::dynamics::diagnostics(g, *t, op.as_ref()))
        .collect::<Result<_>>()?;
    let d = run.cfg.grid()?.dim();
    fs::write(run.path("diagnostics.csv"), diagnostics_csv(&records, d))?;
    for r in &records {
        println!(
            "diagnose: t = {} mass = {:.12e} hamiltonian = {:.12e} gradsq = {:.12e}",
            r.t, r.mass, r.hamiltonian, r.grad_norm_sq
        );
    }
    Ok(json!({ "records": records.len() }))
}

fn cmd_virial(run: &Run) -> Result<Value> {
    let op = run.operator()?;
    let (g0, _) = run.initial()?;
    let icfg = run.cfg.integrator_config()?;
    let evo = evolve(&g0, &icfg, op.as_ref(), run.cfg.output_every)?;
    // The shortened final step would break the uniform spacing.
    let mut window = evo.trajectory.clone();
    let n = window.len();
    if n >= 3 {
        let h = window.times[1] - window.times[0];
        let last = window.times[n - 1] - window.times[n - 2];
        if (last - h).abs() > 1e-9 * h {
            window.times.pop();
            window.snapshots.pop();
        }
    }
    let samples = virial_check(&window, op.as_ref())?;
    let mut csv = String::from("t,fd_derivative,rhs,rel_discrepancy\n");
    for s in &samples {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            format_number(s.t),
            format_number(s.fd_derivative),
            format_number(s.rhs),
            format_number(s.rel_discrepancy)
        );
    }
    fs::write(run.path("virial.csv"), csv)?;
    let worst = samples.iter().map(|s| s.rel_discrepancy).fold(0.0, f64::max);
    println!("virial: {} samples, max relative discrepancy {worst:.3e}", samples.len());
    Ok(json!({
        "samples": samples.len(),
        "max_rel_discrepancy": finite_or_null(worst),
    }))
}

fn cmd_symmetry(run: &Run) -> Result<Value> {
    let op = run.operator()?;
    let (g, _) = run.initial()?;
    let mut csv = String::from("symmetry,rel_ham_deviation,mass_before,mass_after\n");
    let mut rows = Vec::new();
    let m0 = mass(&g);
    for sym in run.cfg.symmetries()? {
        let dev = check_hamiltonian_invariance(&g, &sym, op.as_ref())?;
        let m1 = mass(&apply_symmetry(&g, &sym)?);
        let label = sym.to_string();
        let _ = writeln!(
            csv,
            "\"{label}\",{},{},{}",
            format_number(dev),
            format_number(m0),
            format_number(m1)
        );
        println!("symmetry: {label} relative H deviation {dev:.3e}");
        rows.push(json!({ "symmetry": label, "rel_ham_deviation": dev, "mass_after": m1 }));
    }
    fs::write(run.path("symmetry.csv"), csv)?;
    Ok(json!({ "mass_before": m0, "checks": rows }))
}

fn cmd_norm_bench(run: &Run) -> Result<Value> {
    let op = run.operator()?;
    let space = run.cfg.norm_spec()?;
    let mut csv = String::from("center_radius,member,ratio\n");
    let mut maxima = Vec::new();
    let mut within = None;
    for &r in &run.cfg.bench_radii {
        let sample = empirical_norm_bound(&space, &run.cfg.ensemble(r), op.as_ref())?;
        for (label, ratio) in sample.labels.iter().zip(&sample.observed_ratios) {
            let _ = writeln!(csv, "{},\"{label}\",{}", format_number(r), format_number(*ratio));
        }
        println!("norm-bench: radius {r} max ratio {:.6e}", sample.max_ratio);
        within = Some(sample.support.within_hypotheses);
        maxima.push(sample.max_ratio);
    }
    fs::write(run.path("norm_bench.csv"), csv)?;
    let strictly_increasing = maxima.windows(2).all(|w| w[1] > w[0]);
    let (lo, hi) = maxima
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(json!({
        "radii": run.cfg.bench_radii,
        "max_ratios": maxima,
        "max_over_min": finite_or_null(hi / lo),
        "strictly_increasing": strictly_increasing,
        "within_hypotheses": within,
    }))
}

fn cmd_oracle_compare(run: &Run) -> Result<Value> {
    let grid = run.cfg.grid()?;
    let d = grid.dim();
    let op = run.operator()?;
    let (g, _) = run.initial()?;
    let tg = op.apply(&g)?;
    let ocfg = run.cfg.oracle_config();
    let points = if run.cfg.oracle_points.is_empty() {
        vec![vec![0.0; d]]
    } else {
        run.cfg.oracle_points.clone()
    };
    // Gaussian data are evaluated exactly; other data through interpolation.
    let analytic = run.inputs.is_empty() && run.cfg.init == InitKind::Gaussian;
    let (w, amp) = (run.cfg.init_width, run.cfg.init_amplitude);
    let interp = if analytic {
        None
    } else {
        Some(FieldInterpolant::new(&g, 4)?)
    };
    let f = |p: &[f64]| -> Complex64 {
        match &interp {
            Some(i) => i.eval(p),
            None => {
                let r2: f64 = p.iter().map(|x| x * x).sum();
                Complex64::new(amp * (-r2 / (2.0 * w * w)).exp(), 0.0)
            }
        }
    };
    let h = grid.h_freq();
    let mut rows = Vec::new();
    for p in &points {
        let mut idx = [0usize; 3];
        for a in 0..d {
            let j = p[a] / h + (grid.n() / 2) as f64;
            let k = j.round();
            if (j - k).abs() > 1e-9 || k < 0.0 || k >= grid.n() as f64 {
                return Err(Error::InvalidParameter(format!(
                    "oracle point {p:?} is not a grid node"
                )));
            }
            idx[a] = k as usize;
        }
        let on_grid = tg.values()[grid.flat(&idx[..d])];
        let oracle = oracle_t_at(&f, p, &ocfg)?;
        let oracle2 = oracle_t_at(&f, p, &ocfg.doubled())?;
        let rel = (on_grid - oracle).norm() / oracle.norm();
        let self_conv = (oracle2 - oracle).norm() / oracle2.norm();
        println!(
            "oracle-compare: xi = {p:?} grid = {:.12e}{:+.12e}i oracle = {:.12e}{:+.12e}i rel_err = {rel:.3e} oracle_self_convergence = {self_conv:.3e}",
            on_grid.re, on_grid.im, oracle.re, oracle.im
        );
        rows.push(json!({
            "xi": p,
            "grid": [on_grid.re, on_grid.im],
            "oracle": [oracle.re, oracle.im],
            "rel_err": finite_or_null(rel),
            "oracle_self_convergence": finite_or_null(self_conv),
        }));
    }
    Ok(json!({ "analytic_input": analytic, "points": rows }))
}

fn run(cli: Cli) -> Result<()> {
    let sub = cli.command.subcommand();
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if cli.deterministic {
        cfg.deterministic = true;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.display().to_string();
    }
    cfg.require(sub)?;
    if let Ok(t) = std::env::var("CRLAB_THREADS") {
        let n: usize = t
            .parse()
            .map_err(|_| Error::Config(format!("CRLAB_THREADS = '{t}' is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let out = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out)?;
    let run = Run {
        cfg,
        out,
        zero: cli.zero_nonlinearity,
        inputs: cli.input,
    };
    let results = match sub {
        Subcommand::Evolve => cmd_evolve(&run)?,
        Subcommand::Stationary => cmd_stationary(&run)?,
        Subcommand::Diagnose => cmd_diagnose(&run)?,
        Subcommand::Virial => cmd_virial(&run)?,
        Subcommand::Symmetry => cmd_symmetry(&run)?,
        Subcommand::NormBench => cmd_norm_bench(&run)?,
        Subcommand::OracleCompare => cmd_oracle_compare(&run)?,
    };
    write_metadata(&run, sub, results)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\\', "\\\\").replace('"', "\\\"");
            eprintln!("error: kind={} message=\"{msg}\"", e.kind());
            ExitCode::from(2)
        }
    }
}
