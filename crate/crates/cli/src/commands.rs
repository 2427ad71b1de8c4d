//! Subcommand definitions and their drivers.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dualwave_core::functionals::{mass, talenti_sobolev_constant};
use dualwave_core::radial_field::FieldRecord;
use dualwave_core::sampling::{random_fields, MixtureSpec};
use dualwave_core::scalings::{mass_project, stretch};
use dualwave_core::solver::{
    build_reference, exp_level_bound, find_a_star, lambda_max, local_minimize_m0, minimize_F, minimize_sigma,
    scan_F_curve, scan_sigma_curve, sobolev_geometry, xi_star, ExpBoundReport, GnCalibration, ResultSummary,
    SobolevGeometry, SolveResult, Status, XiStar,
};
use dualwave_core::{DualMap, FiberProfile, Nonlinearity, NonlinearitySpec, RadialField};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_a_grid, parse_assignment, RunConfig};
use crate::output::{emit_csv, emit_json, fmt_f64, fmt_opt, to_json_bytes, Table};
use crate::suites::{self, SuiteReport};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "dualwave", version, about = "Normalized solutions of the quasilinear Schrodinger equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by the config-driven commands.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat JSON config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set tol_grad=1e-7`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; defaults to stdout for JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MinimizeMode {
    #[value(name = "F")]
    F,
    #[value(name = "sigma")]
    Sigma,
    #[value(name = "m0")]
    M0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveMode {
    #[value(name = "F")]
    F,
    #[value(name = "sigma")]
    Sigma,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate f and f' on [0, tmax] as CSV columns t,f,fprime.
    TransformTable {
        #[arg(long, default_value_t = 64.0)]
        tmax: f64,
        #[arg(long, default_value_t = 4097)]
        samples: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fiber map of one field: CSV columns t,psi_t,dpsi_t,A_t,B_t,split_residual.
    FiberScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        tmin: f64,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Directory for the projected field and its stretches.
        #[arg(long)]
        emit_fields: Option<PathBuf>,
    },
    /// Constrained minimization: F(a), sigma(a) or m0(a).
    Minimize {
        #[arg(long, value_enum)]
        mode: MinimizeMode,
        #[command(flatten)]
        common: Common,
    },
    /// Level curve over a mass grid as CSV columns a,status,psi,lambda,G_residual.
    Curve {
        #[arg(long, value_enum)]
        mode: CurveMode,
        /// `lo:hi:logK` or `lo:hi:linK`.
        #[arg(long)]
        a_grid: String,
        #[command(flatten)]
        common: Common,
    },
    /// Thresholds a_* and a_** for a pure power.
    Threshold {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "N")]
        dim: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Local geometry of the energy for the power plus Sobolev-critical term.
    SobolevGeometry {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Upper bound on the critical-growth level from the power ground state.
    ExpBound {
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite (or `all`).
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::TransformTable { .. } => "transform-table",
            Command::FiberScan { .. } => "fiber-scan",
            Command::Minimize { .. } => "minimize",
            Command::Curve { .. } => "curve",
            Command::Threshold { .. } => "threshold",
            Command::SobolevGeometry { .. } => "sobolev-geometry",
            Command::ExpBound { .. } => "exp-bound",
            Command::Check { .. } => "check",
        }
    }
}

fn load(common: &Common, command: &str, mut extra: Vec<(String, Value)>) -> Result<RunConfig, CliError> {
    let mut overrides = Vec::new();
    for raw in &common.set {
        overrides.push(parse_assignment(raw)?);
    }
    if let Some(seed) = common.seed {
        overrides.push(("seed".into(), json!(seed)));
    }
    overrides.append(&mut extra);
    let cfg = RunConfig::load(common.config.as_deref(), &overrides)?;
    cfg.check_command(command)?;
    Ok(cfg)
}

/// Writes JSON to `out`, or prints it.
fn deliver<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => emit_json(value, path),
        None => {
            let bytes = to_json_bytes(value)?;
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    match cli.command {
        Command::TransformTable { tmax, samples, tol, out } => transform_table(tmax, samples, tol, &out),
        Command::FiberScan { common, tmin, tmax, steps, emit_fields } => {
            fiber_scan(&load(&common, name, vec![])?, tmin, tmax, steps, emit_fields.as_deref(), common.out.as_deref())
        }
        Command::Minimize { mode, common } => minimize(mode, &load(&common, name, vec![])?, common.out.as_deref()),
        Command::Curve { mode, a_grid, common } => {
            curve(mode, &parse_a_grid(&a_grid)?, &load(&common, name, vec![])?, common.out.as_deref())
        }
        Command::Threshold { p, dim, common } => {
            let mut extra = vec![];
            if let Some(p) = p {
                extra.push(("p".into(), json!(p)));
            }
            if let Some(n) = dim {
                extra.push(("N".into(), json!(n)));
            }
            threshold(&load(&common, name, extra)?, common.out.as_deref())
        }
        Command::SobolevGeometry { p, a, common } => {
            let mut extra = vec![];
            if let Some(p) = p {
                extra.push(("p".into(), json!(p)));
            }
            if let Some(a) = a {
                extra.push(("a".into(), json!(a)));
            }
            geometry(&load(&common, name, extra)?, common.out.as_deref())
        }
        Command::ExpBound { common } => exp_bound(&load(&common, name, vec![])?, common.out.as_deref()),
        Command::Check { suite, out } => check(&suite, out.as_deref()),
    }
}

fn transform_table(tmax: f64, samples: usize, tol: f64, out: &Path) -> Result<(), CliError> {
    let map = DualMap::new(tmax, samples, tol)?;
    let mut table = Table::new(&["t", "f", "fprime"]);
    for (t, f) in map.table() {
        table.push(vec![fmt_f64(t), fmt_f64(f), fmt_f64(map.f_prime(t))]);
    }
    emit_csv(&table, out)
}

/// The field named by `field`, or a seeded random mixture; projected to mass `a`.
fn input_field(cfg: &RunConfig) -> Result<RadialField, CliError> {
    let v = match &cfg.extras.field {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("$.field: cannot read {}: {e}", path.display())))?;
            let record: FieldRecord = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("$.field: {}: {e}", path.display())))?;
            RadialField::from_record(&record)?
        }
        None => {
            let grid = cfg.solve.grid()?;
            random_fields(&grid, &MixtureSpec::default(), 1, cfg.solve.seed).remove(0)
        }
    };
    Ok(mass_project(&v, cfg.solve.a)?)
}

fn log_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) || steps < 2 {
        return Err(CliError::Config(format!("need 0 < tmin < tmax and steps >= 2, got [{lo}, {hi}], {steps}")));
    }
    Ok((0..steps).map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (steps - 1) as f64).exp()).collect())
}

fn fiber_scan(
    cfg: &RunConfig,
    tmin: f64,
    tmax: f64,
    steps: usize,
    emit_fields: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let out = out.ok_or_else(|| CliError::Config("fiber-scan needs --out".into()))?;
    let nl = cfg.nonlinearity()?;
    let ts = log_grid(tmin, tmax, steps)?;
    let v = input_field(cfg)?;
    let prof = FiberProfile::new(&v, &nl)?;
    let mut table = Table::new(&["t", "psi_t", "dpsi_t", "A_t", "B_t", "split_residual"]);
    for &t in &ts {
        table.push(vec![
            fmt_f64(t),
            fmt_f64(prof.fiber_psi(t)?),
            fmt_f64(prof.fiber_dpsi(t)?),
            fmt_f64(prof.surplus_A(t)?),
            fmt_f64(prof.surplus_B(t)?),
            fmt_f64(prof.splitting_residual(t)?),
        ]);
    }
    if let Some(dir) = emit_fields {
        std::fs::create_dir_all(dir)?;
        emit_json(&v.to_record(), &dir.join("field.json"))?;
        let mut index = Vec::with_capacity(ts.len());
        for (k, &t) in ts.iter().enumerate() {
            let w = stretch(&v, t)?;
            let file = format!("stretch_{k:04}.json");
            emit_json(&w.to_record(), &dir.join(&file))?;
            index.push(json!({"t": t, "file": file, "mass": mass(&w)}));
        }
        emit_json(&json!({"field": "field.json", "mass": mass(&v), "stretches": index}), &dir.join("index.json"))?;
    }
    emit_csv(&table, out)
}

/// `m0` needs `p`; the constants come from `A`/`B`, from `gn_constant` and
/// `sobolev`, or are calibrated.
fn geometry_for(cfg: &RunConfig, p: f64, a: f64) -> Result<(SobolevGeometry, Option<GnCalibration>), CliError> {
    let ex = &cfg.extras;
    match (ex.A, ex.B) {
        (Some(big_a), Some(big_b)) => return Ok((SobolevGeometry::from_constants(p, a, big_a, big_b)?, None)),
        (None, None) => {}
        _ => return Err(CliError::Config("$.A, $.B: give both or neither".into())),
    }
    let (c, cal) = match ex.gn_constant {
        Some(c) => (c, None),
        None => {
            let cal = GnCalibration::run(3, p, ex.gn_samples.unwrap_or(suites::GN_SAMPLES), cfg.solve.seed)?;
            (cal.constant, Some(cal))
        }
    };
    let s = ex.sobolev.unwrap_or_else(|| talenti_sobolev_constant(2000));
    Ok((sobolev_geometry(p, a, c, s)?, cal))
}

#[derive(Serialize)]
struct FieldOutput<'a> {
    #[serde(flatten)]
    summary: ResultSummary,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    trajectory: &'a [(f64, f64)],
}

fn write_result(res: &SolveResult, cfg: &RunConfig, out: Option<&Path>, trajectory: bool) -> Result<(), CliError> {
    let field_ref = match &cfg.extras.field_out {
        Some(path) => {
            emit_json(&res.field.to_record(), path)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let traj: &[(f64, f64)] = if trajectory { &res.trajectory } else { &[] };
    deliver(&FieldOutput { summary: res.summary(field_ref), trajectory: traj }, out)?;
    if res.status == Status::NonexistenceRegime {
        return Err(CliError::Refused(format!(
            "no ground state with negative multiplier exists for {} in N = {}",
            cfg.nonlinearity().map(|n| n.name()).unwrap_or_default(),
            cfg.solve.dim
        )));
    }
    Ok(())
}

fn minimize(mode: MinimizeMode, cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    match mode {
        MinimizeMode::F => write_result(&minimize_F(cfg.power_exponent()?, &cfg.solve)?, cfg, out, false),
        MinimizeMode::Sigma => write_result(&minimize_sigma(&cfg.nonlinearity()?, &cfg.solve)?, cfg, out, false),
        MinimizeMode::M0 => {
            let p = match (&cfg.extras.nonlinearity, cfg.extras.p) {
                (Some(NonlinearitySpec::PowerSobolev { p, kappa }), _) if *kappa == 1.0 => *p,
                (Some(_), _) => {
                    return Err(CliError::Config("$.nonlinearity: m0 uses power_sobolev with kappa = 1".into()))
                }
                (None, Some(p)) => p,
                (None, None) => return Err(CliError::Config("$.p: required".into())),
            };
            let (geometry, _) = geometry_for(cfg, p, cfg.solve.a)?;
            write_result(&local_minimize_m0(p, &cfg.solve, &geometry)?, cfg, out, true)
        }
    }
}

fn curve(mode: CurveMode, a_list: &[f64], cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let out = out.ok_or_else(|| CliError::Config("curve needs --out".into()))?;
    let curve = match mode {
        CurveMode::F => scan_F_curve(a_list, cfg.power_exponent()?, &cfg.solve)?,
        CurveMode::Sigma => scan_sigma_curve(a_list, &cfg.nonlinearity()?, &cfg.solve)?,
    };
    let mut table = Table::new(&["a", "status", "psi", "lambda", "G_residual"]);
    for r in &curve.rows {
        table.push(vec![fmt_f64(r.a), r.status_str().to_string(), fmt_opt(r.psi), fmt_opt(r.lambda), fmt_opt(r.G_residual)]);
    }
    emit_csv(&table, out)?;
    let errors: Vec<Value> = curve
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| json!({"a": r.a, "error": e})))
        .collect();
    deliver(&json!({"rows": curve.rows.len(), "monotonicity_violations": curve.monotonicity_violations, "errors": errors}), None)
}

fn threshold(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let ex = &cfg.extras;
    let th = find_a_star(
        cfg.power_exponent()?,
        &cfg.solve,
        ex.a_lo.unwrap_or(0.01),
        ex.a_hi.unwrap_or(100.0),
        ex.scan_points.unwrap_or(9),
        ex.bisection_tol.unwrap_or(0.05),
    )?;
    deliver(&th, out)
}

#[derive(Serialize)]
struct GeometryReport {
    geometry: SobolevGeometry,
    rho_max_closed_form: f64,
    closed_form_gap: f64,
    first_order_gap: f64,
    /// Smallest `Ψ - K ρ_a(K)` over 100 random fields of mass `a`.
    lower_bound_margin: f64,
    calibration: Option<GnCalibration>,
}

fn geometry(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let p = cfg.extras.p.ok_or_else(|| CliError::Config("$.p: required".into()))?;
    let (g, calibration) = geometry_for(cfg, p, cfg.solve.a)?;
    let report = GeometryReport {
        geometry: g,
        rho_max_closed_form: g.rho_max_closed_form(),
        closed_form_gap: (g.rho_max - g.rho_max_closed_form()).abs(),
        first_order_gap: (g.t_star - g.t_star_foc).abs(),
        lower_bound_margin: suites::lower_bound_margin(&g, cfg.solve.seed)?,
        calibration,
    };
    deliver(&report, out)
}

#[derive(Serialize)]
struct ExpBoundOutput {
    reference: ResultSummary,
    xi_star: XiStar,
    report: ExpBoundReport,
    /// `(ξ, Λ_max(ξ))` for `ξ ∈ {ξ*, 10ξ*, 100ξ*}`.
    lambda_max_sweep: Vec<(f64, f64)>,
}

fn exp_bound(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let ex = &cfg.extras;
    let (zeta0, p, xi) = match &ex.nonlinearity {
        Some(NonlinearitySpec::ExpCritical { zeta0, xi, p }) => (*zeta0, *p, Some(*xi)),
        Some(_) => return Err(CliError::Config("$.nonlinearity: exp-bound needs exp_critical".into())),
        None => (ex.zeta0.unwrap_or(1.0), ex.p.unwrap_or(8.0), ex.xi),
    };
    let reference = build_reference(p, &cfg.solve)?;
    if reference.status != Status::Converged {
        return Err(CliError::Numeric(format!("reference ground state ended as {}", reference.status.as_str())));
    }
    let bd = &reference.breakdown;
    let xs = xi_star(p, zeta0, bd.psi, bd.kinetic, p * bd.potential);
    let xi = xi.unwrap_or(ex.xi_factor.unwrap_or(2.0) * xs.value);
    let report = exp_level_bound(&Nonlinearity::exp_critical(zeta0, xi, p)?, &reference)?;
    let lambda_max_sweep = [1.0, 10.0, 100.0].iter().map(|&k| (k * xs.value, lambda_max(p, k * xs.value))).collect();
    deliver(&ExpBoundOutput { reference: reference.summary(None), xi_star: xs, report, lambda_max_sweep }, out)
}

fn check(suite: &str, out: Option<&Path>) -> Result<(), CliError> {
    let selected: Vec<&suites::Suite> = if suite == "all" {
        suites::SUITES.iter().collect()
    } else {
        vec![suites::find(suite).ok_or_else(|| {
            CliError::Config(format!("unknown suite {suite:?}; expected all or one of {}", suites::names().join(", ")))
        })?]
    };
    let reports: Vec<SuiteReport> = selected.iter().map(|s| s.run()).collect();
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.suite).collect();
    if reports.len() == 1 {
        deliver(&reports[0], out)?;
    } else {
        deliver(&reports, out)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("failed: {}", failed.join(", "))))
    }
}
