//! The verification suites behind `dualwave check`. Every suite has fixed
//! inputs and seeds, so its report is reproducible.

use std::sync::Arc;
use std::time::Duration;

use dualwave_core::dual_transform::{check_f_properties, FOURTH_ROOT_2};
use dualwave_core::functionals::{
    dual_density, gn_check, gn_check_l1, mass, psi, talenti_sobolev_constant, tm_integral,
};
use dualwave_core::nonlinearity::GrowthRegime;
use dualwave_core::radial_field::RadialGrid;
use dualwave_core::sampling::{random_fields, MixtureSpec};
use dualwave_core::scalings::{mass_project, stretch};
use dualwave_core::solver::{
    build_reference, calibration_mixture, classify_and_guard, exp_level_bound, find_a_star, lambda_max,
    local_minimize_m0, minimize_F, minimize_sigma, sobolev_geometry, xi_star, GnCalibration, SobolevGeometry,
    SolveConfig, SolveResult, Status,
};
use dualwave_core::{DualMap, FiberProfile, Nonlinearity};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::to_json_bytes;
use crate::CliError;

const FIELD_SEED: u64 = 20_240_611;
const CALIBRATION_SEED: u64 = 1;
const FRESH_SEED: u64 = 2;
pub const GN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, relation: &'static str, limit: f64, passed: bool) -> Self {
        Check { name: name.into(), value, relation, limit, passed }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, "<=", limit, value <= limit)
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, ">=", limit, value >= limit)
    }

    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, "<", limit, value < limit)
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, ">", limit, value > limit)
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, "==", 1.0, ok)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub criterion: u8,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub details: Value,
}

type Outcome = Result<(Vec<Check>, Value), CliError>;

pub struct Suite {
    pub name: &'static str,
    pub criterion: u8,
    pub runtime_limit: Duration,
    body: fn() -> Outcome,
}

impl Suite {
    pub fn run(&self) -> SuiteReport {
        let (checks, details, error) = match (self.body)() {
            Ok((checks, details)) => (checks, details, None),
            Err(e) => (Vec::new(), Value::Null, Some(e.to_string())),
        };
        SuiteReport {
            suite: self.name,
            criterion: self.criterion,
            passed: error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.passed),
            checks,
            error,
            details,
        }
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub const SUITES: &[Suite] = &[
    Suite { name: "f-properties", criterion: 1, runtime_limit: secs(1), body: f_properties },
    Suite { name: "identities", criterion: 2, runtime_limit: secs(30), body: identities },
    Suite { name: "stretch", criterion: 3, runtime_limit: secs(30), body: stretch_invariance },
    Suite { name: "trichotomy", criterion: 4, runtime_limit: secs(300), body: trichotomy },
    Suite { name: "threshold", criterion: 5, runtime_limit: secs(600), body: threshold },
    Suite { name: "ground-state", criterion: 6, runtime_limit: secs(600), body: ground_state },
    Suite { name: "nonexistence", criterion: 7, runtime_limit: secs(30), body: nonexistence },
    Suite { name: "sobolev-geometry", criterion: 8, runtime_limit: secs(10), body: geometry },
    Suite { name: "local-minimum", criterion: 9, runtime_limit: secs(300), body: local_minimum },
    Suite { name: "gn-tm", criterion: 10, runtime_limit: secs(120), body: gn_tm },
    Suite { name: "exp-bound", criterion: 11, runtime_limit: secs(600), body: exp_bound },
    Suite { name: "determinism", criterion: 12, runtime_limit: secs(600), body: determinism },
];

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

pub fn names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.name).collect()
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Numeric(e.to_string()))
}

fn grid(dim: usize, radius: f64, points: usize) -> Result<Arc<RadialGrid>, CliError> {
    Ok(Arc::new(RadialGrid::new(dim, radius, points)?))
}

fn f_properties() -> Outcome {
    let map = DualMap::shared();
    let report = check_f_properties(map, 10_000);
    let mut checks = Vec::new();
    for item in [2u8, 3, 6, 7, 8, 10] {
        let c = report.item(item).ok_or_else(|| CliError::Numeric(format!("property {item} missing")))?;
        checks.push(Check::at_least(c.statement, c.worst_margin, -1e-9));
    }
    let t = 1e-4;
    checks.push(Check::at_most("|f(t)/t - 1| at t = 1e-4", (map.f(t) / t - 1.0).abs(), 1e-6));
    let t = 1e6;
    checks.push(Check::at_most("|f(t)/sqrt(t) - 2^(1/4)| at t = 1e6", (map.f(t) / t.sqrt() - FOURTH_ROOT_2).abs(), 0.01));
    Ok((checks, to_value(&report)?))
}

fn supercritical_cases() -> Result<[(Nonlinearity, usize); 2], CliError> {
    Ok([(Nonlinearity::power(7.0)?, 2), (Nonlinearity::power(6.0)?, 3)])
}

fn identities() -> Outcome {
    let ts = [0.25, 0.5, 2.0, 4.0];
    let mut checks = Vec::new();
    let mut details = Vec::new();
    for (nl, dim) in supercritical_cases()? {
        let g = grid(dim, 10.0, 2001)?;
        let (mut split, mut min_a, mut min_b, mut fd_err) = (0.0_f64, f64::INFINITY, f64::INFINITY, 0.0_f64);
        for v in random_fields(&g, &MixtureSpec::default(), 20, FIELD_SEED) {
            let prof = FiberProfile::new(&v, &nl)?;
            for &t in &ts {
                let (sa, sb) = (prof.surplus_A(t)?, prof.surplus_B(t)?);
                let c = (1.0 - t.powi(dim as i32 + 2)) / (dim as f64 + 2.0);
                let scale = prof.psi().abs() + prof.fiber_psi(t)?.abs() + (c * prof.g()).abs() + sa.abs() + sb.abs();
                split = split.max(prof.splitting_residual(t)? / scale);
                min_a = min_a.min(sa);
                min_b = min_b.min(sb);
                let h = 1e-4 * t;
                let fd = (prof.fiber_psi(t + h)? - prof.fiber_psi(t - h)?) / (2.0 * h);
                let d = prof.fiber_dpsi(t)?;
                let size = d.abs() + (prof.kinetic_at(t) + prof.potential_at(t)?.abs()) / t;
                fd_err = fd_err.max((fd - d).abs() / size);
            }
        }
        let tag = format!("{}, N = {dim}", nl.name());
        checks.push(Check::at_most(format!("{tag}: relative splitting residual"), split, 1e-8));
        checks.push(Check::at_least(format!("{tag}: min A(t, v)"), min_a, -1e-10));
        checks.push(Check::at_least(format!("{tag}: min B(t, v)"), min_b, -1e-10));
        checks.push(Check::at_most(format!("{tag}: fiber derivative vs central difference"), fd_err, 1e-5));
        details.push(json!({"nonlinearity": nl.name(), "N": dim, "fields": 20, "t": ts}));
    }
    Ok((checks, Value::Array(details)))
}

const STRETCH_RADIUS: f64 = 13.0;

fn stretch_invariance() -> Outcome {
    let ts = [0.125, 0.5, 2.0, 8.0];
    // t = 1/8 needs the field well inside R/8; t = 8 needs it wide in units of 8h
    let spec = MixtureSpec { min_width: 0.5, max_width: 0.52, ..MixtureSpec::default() };
    let mut checks = Vec::new();
    for (nl, dim) in supercritical_cases()? {
        let g = grid(dim, STRETCH_RADIUS, 4001)?;
        let (mut mass_err, mut psi_err) = (0.0_f64, 0.0_f64);
        for v in random_fields(&g, &spec, 10, FIELD_SEED) {
            let m = mass(&v);
            let prof = FiberProfile::new(&v, &nl)?;
            for &t in &ts {
                let w = stretch(&v, t)?;
                mass_err = mass_err.max((mass(&w) - m).abs() / m);
                let closed = prof.fiber_psi(t)?;
                let size = 0.5 * prof.kinetic_at(t) + prof.potential_at(t)?.abs();
                psi_err = psi_err.max((psi(&w, &nl)? - closed).abs() / size);
            }
        }
        let tag = format!("{}, N = {dim}", nl.name());
        checks.push(Check::at_most(format!("{tag}: relative mass change under stretch"), mass_err, 1e-4));
        checks.push(Check::at_most(format!("{tag}: closed-form vs resampled fiber energy"), psi_err, 1e-3));
    }
    Ok((checks, json!({"M": 4001, "R": STRETCH_RADIUS, "t": ts, "fields": 10})))
}

fn summary_value(p: f64, res: &SolveResult) -> Value {
    json!({"p": p, "result": res.summary(None)})
}

fn trichotomy() -> Outcome {
    let base = SolveConfig::default();
    let cases = [(3.0, 1.0), (5.0, 0.01), (5.0, 100.0), (7.0, 1.0)];
    let results: Vec<SolveResult> =
        cases.par_iter().map(|&(p, a)| minimize_F(p, &base.with_a(a))).collect::<Result<_, _>>()?;
    let [r3, r5s, r5l, r7] = [&results[0], &results[1], &results[2], &results[3]];
    let checks = vec![
        Check::holds("p = 3, a = 1: converged", r3.status == Status::Converged),
        Check::below("p = 3, a = 1: F(a)", r3.level, -1e-3),
        Check::at_most("p = 5, a = 0.01: |F(a)|", r5s.level.abs(), 1e-3),
        Check::holds("p = 5, a = 0.01: no converged minimizer", r5s.status != Status::Converged),
        Check::below("p = 5, a = 100: F(a)", r5l.level, -1e-3),
        Check::holds("p = 7, a = 1: unbounded below", r7.status == Status::UnboundedBelow),
    ];
    let details = cases.iter().zip(&results).map(|(&(p, _), r)| summary_value(p, r)).collect();
    Ok((checks, Value::Array(details)))
}

fn threshold() -> Outcome {
    let th = find_a_star(5.0, &SolveConfig::default(), 0.01, 100.0, 9, 0.05)?;
    let checks = vec![
        Check::holds("F nonincreasing within 1e-6 along the scan", th.nonincreasing),
        Check::below("a_* < a_**", th.a_star, th.a_star_star),
        Check::holds("|F| <= 1e-3 below a_*", th.zero_below),
    ];
    Ok((checks, to_value(&th)?))
}

pub const GROUND_STATE_MASSES: [f64; 4] = [0.0625, 0.25, 1.0, 4.0];

/// Grid radius `0.25 a^{3/2}`, which follows the ground-state width for
/// `p = 7` in the plane.
pub fn ground_state_config() -> SolveConfig {
    SolveConfig { radius: 0.25, radius_mass_exponent: 1.5, ..SolveConfig::default() }
}

pub fn ground_states() -> Result<Vec<SolveResult>, CliError> {
    let nl = Nonlinearity::power(7.0)?;
    let cfg = ground_state_config();
    Ok(GROUND_STATE_MASSES.par_iter().map(|&a| minimize_sigma(&nl, &cfg.with_a(a))).collect::<Result<_, _>>()?)
}

fn ground_state() -> Outcome {
    let results = ground_states()?;
    let mut checks = Vec::new();
    for r in &results {
        let a = r.a;
        checks.push(Check::holds(format!("a = {a}: converged"), r.status == Status::Converged));
        checks.push(Check::below(format!("a = {a}: lambda"), r.breakdown.lambda.unwrap_or(f64::NAN), 0.0));
        checks.push(Check::at_most(format!("a = {a}: |G| / (1 + kinetic)"), r.g_residual(), 1e-6));
        checks.push(Check::at_most(format!("a = {a}: Pohozaev residual / (1 + kinetic)"), r.relative_pohozaev_residual(), 1e-3));
    }
    for w in results.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        checks.push(Check::at_least(
            format!("sigma({}) - sigma({})", lo.a, hi.a),
            lo.breakdown.psi - hi.breakdown.psi,
            -1e-6,
        ));
        checks.push(Check::at_least(format!("sigma({}) / sigma({})", lo.a, hi.a), lo.breakdown.psi / hi.breakdown.psi, 1.5));
    }
    let details = results.iter().map(|r| to_value(&r.summary(None))).collect::<Result<_, _>>()?;
    Ok((checks, Value::Array(details)))
}

fn nonexistence() -> Outcome {
    let nl = Nonlinearity::power(12.0)?;
    let guard = classify_and_guard(&nl, 3)?;
    let res = minimize_sigma(&nl, &SolveConfig { dim: 3, ..SolveConfig::default() })?;
    let checks = vec![
        Check::holds("Power(12), N = 3 classified as nonexistence", guard.regime == GrowthRegime::Nonexistence),
        Check::holds("ground-state solver refused", !guard.sigma_permitted && res.status == Status::NonexistenceRegime),
        Check::at_most("recombination identity residual", guard.identity_residual.unwrap_or(f64::NAN), 1e-8),
        Check::at_most("max of mu1 H - h f (relative)", guard.max_sign_term.unwrap_or(f64::NAN), 1e-12),
    ];
    Ok((checks, to_value(&guard)?))
}

/// Smallest `Ψ(v) - K ρ_a(K)` over 100 random fields of mass `geometry.a`.
pub fn lower_bound_margin(geometry: &SobolevGeometry, seed: u64) -> Result<f64, CliError> {
    let fields = random_fields(&grid(3, 20.0, 2001)?, &MixtureSpec::default(), 100, seed);
    Ok(geometry.lower_bound_margin(&fields)?)
}

fn geometry() -> Outcome {
    let g = SobolevGeometry::from_constants(3.0, 1.0, 1.0, 1.0)?;
    let margin = lower_bound_margin(&g, FIELD_SEED)?;
    let checks = vec![
        Check::at_most("|t_star - 0.39685|", (g.t_star - 0.39685).abs(), 1e-6),
        Check::at_most("|max rho + 0.91741|", (g.rho_max + 0.91741).abs(), 1e-5),
        Check::at_most("|a_tilde0 - 0.20952|", (g.a_tilde0 - 0.20952).abs(), 1e-4),
        Check::at_most("|golden max - (1/2 - K0 a^(2/3))|", (g.rho_max - g.rho_max_closed_form()).abs(), 1e-10),
        Check::at_most("|t_star - first-order root (8B)|", (g.t_star - g.t_star_foc).abs(), 1e-6),
        Check::at_least("min Psi - K rho_a(K) over 100 fields", margin, -1e-10),
    ];
    Ok((checks, json!({"geometry": to_value(&g)?, "lower_bound_margin": margin})))
}

/// Geometry for `p = 3`, `N = 3` from the calibrated `C_{3,3}` and the
/// Talenti constant, at mass `ã₀/4`.
pub fn calibrated_geometry() -> Result<(GnCalibration, SobolevGeometry), CliError> {
    let cal = GnCalibration::run(3, 3.0, GN_SAMPLES, CALIBRATION_SEED)?;
    let s = talenti_sobolev_constant(2000);
    let unit = sobolev_geometry(3.0, 1.0, cal.constant, s)?;
    Ok((cal, sobolev_geometry(3.0, unit.a_tilde0 / 4.0, cal.constant, s)?))
}

/// `Ψ` on mass-`a` fields stretched until their kinetic energy is `level`.
fn boundary_energies(g: &SobolevGeometry, level: f64, count: usize) -> Result<Vec<f64>, CliError> {
    let nl = Nonlinearity::power_sobolev(g.p, 1.0)?;
    let fields = random_fields(&grid(3, 60.0, 2001)?, &MixtureSpec { min_width: 2.0, max_width: 8.0, ..MixtureSpec::default() }, count, FIELD_SEED);
    let mut out = Vec::with_capacity(count);
    for v in fields {
        let prof = FiberProfile::new(&mass_project(&v, g.a)?, &nl)?;
        // kinetic_at is increasing in t
        let (mut lo, mut hi) = (1e-6_f64, 1e6_f64);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if prof.kinetic_at(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(prof.fiber_psi((lo * hi).sqrt())?);
    }
    Ok(out)
}

/// Box radius for the local minimum; the minimizer is wide at small masses.
pub const LOCAL_MIN_RADIUS: f64 = 300.0;

fn local_minimum() -> Outcome {
    let (cal, g) = calibrated_geometry()?;
    let cfg = SolveConfig { dim: 3, radius: LOCAL_MIN_RADIUS, a: g.a, ..SolveConfig::default() };
    let res = local_minimize_m0(3.0, &cfg, &g)?;
    let near_cap: Vec<&(f64, f64)> = res.trajectory.iter().filter(|(k, _)| *k >= 0.99 * g.t_star0).collect();
    let boundary = boundary_energies(&g, 0.99 * g.t_star0, 100)?;
    let boundary_min = boundary.iter().copied().fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::holds("converged", res.status == Status::Converged),
        Check::below("m0(a)", res.breakdown.psi, 0.0),
        Check::below("kinetic at the minimizer (limit t*0)", res.breakdown.kinetic, g.t_star0),
        Check::holds("no trajectory point with kinetic >= 0.99 t*0 has psi <= 0", near_cap.iter().all(|(_, p)| *p > 0.0)),
        Check::above("min Psi over 100 fields at kinetic 0.99 t*0", boundary_min, 0.0),
    ];
    let details = json!({
        "calibration": to_value(&cal)?,
        "geometry": to_value(&g)?,
        "R": LOCAL_MIN_RADIUS,
        "result": to_value(&res.summary(None))?,
        "trajectory_points": res.trajectory.len(),
        "trajectory_points_near_cap": near_cap.len(),
    });
    Ok((checks, details))
}

fn gn_tm() -> Outcome {
    let mut checks = Vec::new();
    let mut details = Vec::new();
    for dim in [2usize, 3] {
        let g = grid(dim, 20.0, 2001)?;
        let fresh = random_fields(&g, &calibration_mixture(), GN_SAMPLES, FRESH_SEED);
        let cal = GnCalibration::run(dim, 4.0, GN_SAMPLES, CALIBRATION_SEED)?;
        let mut violations = 0usize;
        for u in &fresh {
            violations += usize::from(gn_check(u, 4.0, cal.constant)? < 0.0);
        }
        checks.push(Check::at_most(format!("N = {dim}: L^4 inequality violations"), violations as f64, 0.0));
        let cal1 = GnCalibration::run_l1(dim, 4.0, GN_SAMPLES, CALIBRATION_SEED)?;
        let mut violations1 = 0usize;
        for v in &fresh {
            violations1 += usize::from(gn_check_l1(&dual_density(v), 4.0, cal1.constant)? < 0.0);
        }
        checks.push(Check::at_most(format!("N = {dim}: L^1 inequality on f(v)^2 violations"), violations1 as f64, 0.0));
        details.push(json!({"N": dim, "L4": to_value(&cal)?, "L1": to_value(&cal1)?}));
    }
    let beta = 2.0 * std::f64::consts::PI;
    let g = grid(2, 20.0, 2001)?;
    let fresh = random_fields(&g, &calibration_mixture(), GN_SAMPLES, FRESH_SEED);
    let mut all_finite = true;
    for u in &fresh {
        all_finite &= tm_integral(u, beta).is_ok_and(f64::is_finite);
    }
    checks.push(Check::holds("exponential integral finite on every test field", all_finite));
    let mut admissible_max: f64 = 0.0;
    for u in random_fields(&g, &calibration_mixture(), 100, FIELD_SEED) {
        let scale = u.kinetic().max(u.l2_squared()).sqrt();
        let w = u.with_values(u.values().iter().map(|x| x / scale).collect())?;
        admissible_max = admissible_max.max(tm_integral(&w, beta)?);
    }
    checks.push(Check::at_most("max exponential integral over 100 admissible fields", admissible_max, TM_BOUND));
    details.push(json!({"beta": beta, "admissible_max": admissible_max}));
    Ok((checks, Value::Array(details)))
}

/// Uniform bound asserted for `∫(e^{2πu²} - 1)` when `‖∇u‖² ≤ 1`, `‖u‖² ≤ 1`.
pub const TM_BOUND: f64 = 100.0;

/// The reference ground state for `p = 8` has width of order one at `a = 1`.
pub fn exp_reference_config() -> SolveConfig {
    SolveConfig { radius: 2.0, ..SolveConfig::default() }
}

fn exp_bound() -> Outcome {
    let p = 8.0;
    let reference = build_reference(p, &exp_reference_config())?;
    let bd = &reference.breakdown;
    let xs = xi_star(p, 1.0, bd.psi, bd.kinetic, p * bd.potential);
    let report = exp_level_bound(&Nonlinearity::exp_critical(1.0, 2.0 * xs.value, p)?, &reference)?;
    let sweep: Vec<(f64, f64)> = [1.0, 10.0, 100.0].iter().map(|&k| (k * xs.value, lambda_max(p, k * xs.value))).collect();
    let checks = vec![
        Check::holds("reference converged with lambda < 0", reference.status == Status::Converged && bd.lambda.is_some_and(|l| l < 0.0)),
        Check::above("m*(a)", bd.psi, 0.0),
        Check::at_least("4p/(p-6) m* - int |f|^p", report.lp_slack, 0.0),
        Check::holds("Lambda_max(8, 1) = 0.03515625", lambda_max(8.0, 1.0) == 0.035_156_25),
        Check::below("bound at xi = 2 xi* (limit pi/zeta0)", report.bound, report.threshold),
        Check::holds("Lambda_max decreasing over xi*, 10 xi*, 100 xi*", sweep[0].1 > sweep[1].1 && sweep[1].1 > sweep[2].1),
    ];
    let details = json!({
        "reference": to_value(&reference.summary(None))?,
        "report": to_value(&report)?,
        "lambda_max_sweep": sweep,
    });
    Ok((checks, details))
}

/// The criterion-6 outputs as they would be written to disk.
pub fn ground_state_bytes() -> Result<Vec<u8>, CliError> {
    let results = ground_states()?;
    let records: Vec<Value> = results
        .iter()
        .map(|r| Ok(json!({"result": to_value(&r.summary(None))?, "field": to_value(&r.field.to_record())?})))
        .collect::<Result<_, CliError>>()?;
    to_json_bytes(&records)
}

fn determinism() -> Outcome {
    let first = ground_state_bytes()?;
    let second = ground_state_bytes()?;
    let checks = vec![Check::holds("two runs give byte-identical result JSON", first == second)];
    Ok((checks, json!({"bytes": first.len()})))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_are_unique_and_cover_every_criterion() {
        let mut names = names();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SUITES.len());
        let crit: Vec<u8> = SUITES.iter().map(|s| s.criterion).collect();
        assert_eq!(crit, (1..=12).collect::<Vec<u8>>());
    }

    #[test]
    fn checks_compare_as_labelled() {
        assert!(Check::at_most("x", 1.0, 1.0).passed && !Check::below("x", 1.0, 1.0).passed);
        assert!(!Check::at_least("x", f64::NAN, 0.0).passed);
        assert!(Check::holds("x", true).passed && !Check::holds("x", false).passed);
    }

    #[test]
    fn fast_suites_pass() {
        for name in ["f-properties", "sobolev-geometry"] {
            let r = find(name).unwrap().run();
            assert!(r.passed, "{r:?}");
        }
    }
}
