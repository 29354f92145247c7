use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use commuprop::commutativity::{as_spatial_decomposition, check_with, martin_decompose_with, CheckOptions, DEFAULT_GRID};
use commuprop::error::Error;
use commuprop::generator::GeneratorSum;
use commuprop::linalg::ComplexMatrix;
use commuprop::output::{to_json_string, to_json_string_pretty};
use commuprop::par::Exec;
use commuprop::problem::ProblemSpec;
use commuprop::quantum::{evolve_state_with, DensityMatrix, PhysicalityPolicy, PhysicalityTol};
use commuprop::solver::{CommutativeGenerator, Method, Propagator, Trajectory, DEFAULT_RK4_STEPS_PER_UNIT};
use serde_json::{json, Value};

/// Relative commutativity tolerance override.
const TOL_ENV: &str = "COMMUPROP_TOL";

#[derive(Parser)]
#[command(name = "commuprop", version, about = "Propagators for functionally commutative linear ODEs")]
struct Cli {
    /// Evaluate independent time points on the thread pool.
    #[arg(long, global = true)]
    parallel: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide functional commutativity (exit 0 iff commutative).
    Check {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Sampled decomposition into commuting constant matrices.
    Decompose {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Write the decomposition to PATH.json instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fundamental solution on a time grid.
    Solve(SolveArgs),
    /// Density matrix trajectory from the problem's rho0.
    Evolve(EvolveArgs),
}

#[derive(Args)]
struct Common {
    spec: PathBuf,
    /// exact, zhu or rk4.
    #[arg(long, default_value = "exact")]
    method: Method,
    /// RK4 steps per unit time.
    #[arg(long, default_value_t = DEFAULT_RK4_STEPS_PER_UNIT)]
    steps: usize,
    /// Commutativity check grid used before exact propagation.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Output stem: writes PATH.csv and PATH.json. Without it the CSV goes
    /// to stdout and the summary to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t_start: f64,
    /// Defaults to the upper end of the problem's interval.
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// Number of evenly spaced times, ends included.
    #[arg(long, default_value_t = 21)]
    points: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Two methods to cross-check, e.g. zhu,rk4.
    #[arg(long, value_delimiter = ',')]
    compare: Option<Vec<Method>>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    common: Common,
    /// Report physicality violations instead of failing.
    #[arg(long)]
    allow_unphysical: bool,
}

/// Exit status 1: a well-formed request with a negative answer.
#[derive(Debug)]
struct Negative(String);

impl std::fmt::Display for Negative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Negative {}

fn is_negative(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<Negative>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::NotCommutative { .. } | Error::NonCommutingParts { .. } | Error::Residual { .. } | Error::Unphysical { .. })
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.parallel { Exec::Parallel } else { Exec::Sequential };
    let result = match cli.command {
        Command::Check { spec, grid } => cmd_check(&spec, grid, exec),
        Command::Decompose { spec, grid, out } => cmd_decompose(&spec, grid, out.as_deref(), exec),
        Command::Solve(args) => cmd_solve(&args, exec),
        Command::Evolve(args) => cmd_evolve(&args, exec),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_negative(&e) { 1 } else { 2 })
        }
    }
}

fn load(path: &Path) -> anyhow::Result<ProblemSpec> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProblemSpec::from_json(&src).with_context(|| format!("parsing {}", path.display()))
}

fn tolerance() -> anyhow::Result<f64> {
    match std::env::var(TOL_ENV) {
        Err(_) => Ok(commuprop::commutativity::DEFAULT_TOL),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => bail!("{TOL_ENV} must be a positive number, got '{s}'"),
        },
    }
}

fn check_options(grid: usize, exec: Exec) -> anyhow::Result<CheckOptions> {
    if grid < 3 {
        bail!("--grid must be at least 3");
    }
    Ok(CheckOptions { tol: tolerance()?, exec, ..CheckOptions::with_grid(grid) })
}

/// Writes to stdout; a reader that hung up early (`| head`) is not an error.
fn write_stdout(bytes: &[u8]) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(bytes).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(v: &Value) -> anyhow::Result<()> {
    write_stdout(format!("{}\n", to_json_string(v)?).as_bytes())
}

fn cmd_check(path: &Path, grid: usize, exec: Exec) -> anyhow::Result<ExitCode> {
    let spec = load(path)?;
    let report = check_with(spec.generator(), &check_options(grid, exec)?);
    print_json(&report.to_json())?;
    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    Ok(ExitCode::from(if report.is_commutative { 0 } else { 1 }))
}

fn require_commutative(g: &GeneratorSum, opts: &CheckOptions) -> anyhow::Result<()> {
    let report = check_with(g, opts);
    if report.is_commutative {
        return Ok(());
    }
    let (t, s) = report.witness_pair;
    Err(Negative(format!(
        "generator is not functionally commutative: |[L({t}), L({s})]| = {:e}",
        report.max_pairwise_commutator_norm
    ))
    .into())
}

fn cmd_decompose(path: &Path, grid: usize, out: Option<&Path>, exec: Exec) -> anyhow::Result<ExitCode> {
    let spec = load(path)?;
    let opts = check_options(grid, exec)?;
    require_commutative(spec.generator(), &opts)?;
    let d = martin_decompose_with(spec.generator(), grid, opts.tol, exec)?;
    let mut v = serde_json::to_value(&d)?;
    v["basis_size"] = json!(d.basis.len());
    v["max_residual"] = json!(d.max_residual());
    match out {
        Some(stem) => {
            let file = stem.with_extension("json");
            write_file(&file, to_json_string_pretty(&v)?.as_bytes())?;
            print_json(&json!({
                "basis_size": d.basis.len(),
                "max_residual": d.max_residual(),
                "json": file.display().to_string(),
            }))?;
        }
        None => write_stdout(format!("{}\n", to_json_string_pretty(&v)?).as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn times(c: &Common, g: &GeneratorSum) -> anyhow::Result<Vec<f64>> {
    let end = c.t_end.unwrap_or(g.interval().hi());
    if c.points < 2 {
        bail!("--points must be at least 2");
    }
    if !end.is_finite() || !c.t_start.is_finite() || end <= c.t_start {
        bail!("time grid needs t_end > t_start, got [{}, {end}]", c.t_start);
    }
    let step = (end - c.t_start) / (c.points - 1) as f64;
    Ok((0..c.points).map(|k| if k + 1 == c.points { end } else { c.t_start + step * k as f64 }).collect())
}

fn propagator(method: Method, g: &GeneratorSum, c: &Common, exec: Exec) -> anyhow::Result<Propagator> {
    Ok(match method {
        Method::Exact => {
            let opts = check_options(c.grid, exec)?;
            require_commutative(g, &opts).context("refusing exact propagation")?;
            Propagator::exact(CommutativeGenerator::verify(g.clone(), &opts)?)
        }
        Method::Zhu => Propagator::zhu(as_spatial_decomposition(g).context("refusing Zhu product")?),
        Method::Rk4 => {
            if c.steps == 0 {
                bail!("--steps must be positive");
            }
            Propagator::rk4(g.clone(), c.steps)
        }
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Writes `stem.csv` and `stem.json` and prints the summary, or streams
/// the CSV to stdout with the summary on stderr.
fn emit(out: Option<&Path>, csv: Vec<u8>, json_doc: &Value, mut summary: Value) -> anyhow::Result<()> {
    match out {
        Some(stem) => {
            let (csv_path, json_path) = (stem.with_extension("csv"), stem.with_extension("json"));
            write_file(&csv_path, &csv)?;
            write_file(&json_path, to_json_string_pretty(json_doc)?.as_bytes())?;
            summary["csv"] = json!(csv_path.display().to_string());
            summary["json"] = json!(json_path.display().to_string());
            print_json(&summary)
        }
        None => {
            write_stdout(&csv)?;
            eprintln!("{}", to_json_string(&summary)?);
            Ok(())
        }
    }
}

fn reference_residual(spec: &ProblemSpec, traj: &Trajectory) -> anyhow::Result<Option<f64>> {
    let Some(reference) = spec.quantum().and_then(|q| q.reference.as_ref()) else {
        return Ok(None);
    };
    let mut worst = 0.0f64;
    for (t, phi) in traj.times.iter().zip(&traj.values) {
        worst = worst.max(reference.eval(*t)?.distance(phi));
    }
    Ok(Some(worst))
}

fn cmd_solve(args: &SolveArgs, exec: Exec) -> anyhow::Result<ExitCode> {
    let c = &args.common;
    let spec = load(&c.spec)?;
    let g = spec.generator();
    let ts = times(c, g)?;
    let traj = propagator(c.method, g, c, exec)?.trajectory_with(&ts, exec)?;

    let mut summary = json!({
        "method": c.method.to_string(),
        "points": traj.len(),
        "t_start": ts[0],
        "t_end": ts[ts.len() - 1],
    });
    if let Some(r) = reference_residual(&spec, &traj)? {
        summary["reference_max_residual"] = json!(r);
    }
    if let Some(methods) = &args.compare {
        let [a, b] = methods.as_slice() else {
            bail!("--compare takes exactly two methods, e.g. zhu,rk4");
        };
        let ta = propagator(*a, g, c, exec)?.trajectory_with(&ts, exec)?;
        let tb = propagator(*b, g, c, exec)?.trajectory_with(&ts, exec)?;
        summary["compare"] = json!({
            "methods": [a.to_string(), b.to_string()],
            "max_residual": ta.max_distance(&tb)?,
        });
    }

    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    emit(c.out.as_deref(), csv, &serde_json::to_value(&traj)?, summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_evolve(args: &EvolveArgs, exec: Exec) -> anyhow::Result<ExitCode> {
    let c = &args.common;
    let spec = load(&c.spec)?;
    let rho0 = match &spec {
        ProblemSpec::Quantum { rho0: None, problem } => {
            // |0⟩⟨0| when the file gives no initial state.
            let mut d = vec![0.0; problem.system_dim];
            d[0] = 1.0;
            DensityMatrix::new(ComplexMatrix::diag_real(&d))?
        }
        _ => spec.initial_state().context("invalid rho0")?,
    };
    let g = spec.generator();
    let ts = times(c, g)?;
    let p = propagator(c.method, g, c, exec)?;
    let policy = if args.allow_unphysical {
        PhysicalityPolicy::ReportOnly
    } else {
        PhysicalityPolicy::Enforce(PhysicalityTol::TRAJECTORY)
    };
    let states = evolve_state_with(&p, &rho0, &ts, policy, exec)?;
    let traj = &states.trajectory;
    let reports = &states.reports;

    let column = |f: &dyn Fn(usize) -> f64| (0..traj.len()).map(f).collect::<Vec<f64>>();
    let extra = vec![
        ("trace".to_string(), column(&|k| traj.values[k].trace().re)),
        ("trace_defect".to_string(), column(&|k| reports[k].trace_defect)),
        ("min_eigenvalue".to_string(), column(&|k| reports[k].min_eigenvalue)),
        ("hermiticity_defect".to_string(), column(&|k| reports[k].hermiticity_defect)),
    ];
    let mut csv = Vec::new();
    traj.write_csv_with(&mut csv, &extra)?;

    let fold = |f: &dyn Fn(&commuprop::quantum::PhysicalityReport) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        reports.iter().map(f).fold(init, pick)
    };
    let physical = reports.iter().all(|r| r.is_physical(&PhysicalityTol::TRAJECTORY));
    let summary = json!({
        "method": c.method.to_string(),
        "points": traj.len(),
        "physical": physical,
        "max_trace_defect": fold(&|r| r.trace_defect, 0.0, f64::max),
        "min_eigenvalue": fold(&|r| r.min_eigenvalue, f64::INFINITY, f64::min),
        "max_hermiticity_defect": fold(&|r| r.hermiticity_defect, 0.0, f64::max),
    });
    let mut doc = serde_json::to_value(traj)?;
    doc["physicality"] = serde_json::to_value(reports)?;
    emit(c.out.as_deref(), csv, &doc, summary)?;
    if !physical {
        eprintln!("warning: trajectory left the physical state set");
    }
    Ok(ExitCode::SUCCESS)
}
