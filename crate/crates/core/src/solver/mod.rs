//! Constrained minimization of `Ψ`: the global level `F(a)` over the mass
//! sphere, the ground-state level `σ(a)` over the Pohozaev manifold, the local
//! minimum `m₀(a)` below the kinetic cap, and the threshold, geometry and
//! level-bound procedures built on them.

pub mod descent;
pub mod exp_bound;
pub mod geometry;
pub mod guard;
pub mod precond;
pub mod scan;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{breakdown, pohozaev_residual, DualState, EnergyBreakdown, FiberProfile};
use crate::nonlinearity::{validate_hypotheses, default_samples, GrowthRegime, HypothesisSet, Nonlinearity};
use crate::radial_field::{RadialField, RadialGrid};
use crate::sampling::{gaussian_mixture, random_terms, rng, MixtureSpec};
use crate::scalings::{find_tv, mass_project};

use descent::{descend, polish_pohozaev, Constraint, DescentOptions, DescentStatus};
use precond::H1Preconditioner;

pub use exp_bound::{build_reference, exp_level_bound, lambda_max, upsilon, xi_star, ExpBoundReport, XiStar};
pub use geometry::{calibration_mixture, local_minimize_m0, sobolev_geometry, GnCalibration, SobolevGeometry};
pub use guard::{classify_and_guard, GuardReport};
pub use scan::{find_a_star, scan_F_curve, scan_sigma_curve, Curve, CurveRow, Thresholds};

fn default_dim() -> usize {
    2
}
fn default_radius() -> f64 {
    20.0
}
fn default_points() -> usize {
    2001
}
fn default_a() -> f64 {
    1.0
}
fn default_step0() -> f64 {
    1.0
}
fn default_shrink() -> f64 {
    0.5
}
fn default_max_outer() -> usize {
    4000
}
fn default_max_inner() -> usize {
    40
}
fn default_tol() -> f64 {
    1e-6
}
fn default_restarts() -> usize {
    3
}
fn default_shift() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(rename = "N", default = "default_dim")]
    pub dim: usize,
    #[serde(rename = "R", default = "default_radius")]
    pub radius: f64,
    #[serde(rename = "M", default = "default_points")]
    pub points: usize,
    /// The grid radius used for mass `a` is `R a^e`.
    #[serde(default)]
    pub radius_mass_exponent: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_step0")]
    pub step0: f64,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default = "default_max_inner")]
    pub max_inner: usize,
    #[serde(default = "default_tol")]
    pub tol_grad: f64,
    #[serde(rename = "tol_G", default = "default_tol")]
    pub tol_g: f64,
    /// Defaults to `-1e6 (1 + |Ψ(seed)|)` per seed.
    #[serde(default)]
    pub unbounded_floor: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Weight of the mass term in the `H¹` preconditioner.
    #[serde(default = "default_shift")]
    pub precond_shift: f64,
    /// Allow `minimize_sigma` for nonlinearities outside the validated band.
    #[serde(default)]
    pub experimental: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            dim: default_dim(),
            radius: default_radius(),
            points: default_points(),
            radius_mass_exponent: 0.0,
            a: default_a(),
            step0: default_step0(),
            shrink: default_shrink(),
            max_outer: default_max_outer(),
            max_inner: default_max_inner(),
            tol_grad: default_tol(),
            tol_g: default_tol(),
            unbounded_floor: None,
            seed: 0,
            restarts: default_restarts(),
            precond_shift: default_shift(),
            experimental: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dim != 2 && self.dim != 3 {
            return bad(format!("N: dimension must be 2 or 3, got {}", self.dim));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad(format!("R: radius must be positive, got {}", self.radius));
        }
        if !self.radius_mass_exponent.is_finite() {
            return bad(format!("radius_mass_exponent: must be finite, got {}", self.radius_mass_exponent));
        }
        if self.points < 8 {
            return bad(format!("M: need at least 8 grid points, got {}", self.points));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return bad(format!("a: mass must be positive, got {}", self.a));
        }
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            return bad(format!("step0: must be positive, got {}", self.step0));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad(format!("shrink: must lie in (0, 1), got {}", self.shrink));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("max_outer, max_inner: must be positive".into());
        }
        if !(self.tol_grad > 0.0) || !(self.tol_g > 0.0) {
            return bad("tol_grad, tol_G: tolerances must be positive".into());
        }
        if let Some(floor) = self.unbounded_floor {
            if !(floor < 0.0) {
                return bad(format!("unbounded_floor: must be negative, got {floor}"));
            }
        }
        if self.restarts == 0 {
            return bad("restarts: need at least one seed".into());
        }
        if !(self.precond_shift > 0.0 && self.precond_shift.is_finite()) {
            return bad(format!("precond_shift: must be positive, got {}", self.precond_shift));
        }
        Ok(())
    }

    pub fn effective_radius(&self) -> f64 {
        self.radius * self.a.powf(self.radius_mass_exponent)
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::new(self.dim, self.effective_radius(), self.points)?))
    }

    /// Threshold below which a level counts as negative.
    pub fn eps_neg(&self) -> f64 {
        10.0 * self.tol_grad
    }

    pub fn with_a(&self, a: f64) -> Self {
        SolveConfig { a, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    UnboundedBelow,
    NonexistenceRegime,
    MaxIters,
    /// The box minimizer has a nonnegative level: minimizing sequences
    /// spread out and the level is approached only in the limit.
    Vanishing,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::UnboundedBelow => "unbounded_below",
            Status::NonexistenceRegime => "nonexistence_regime",
            Status::MaxIters => "max_iters",
            Status::Vanishing => "vanishing",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub a: f64,
    pub field: RadialField,
    pub breakdown: EnergyBreakdown,
    /// Estimate of the level (`F`, `σ` or `m₀`); equals `breakdown.psi`
    /// unless the status says otherwise.
    pub level: f64,
    /// `|t_v - 1|` for ground states.
    pub t_v_residual: Option<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    /// `|mass - a| / a`.
    pub mass_err: f64,
    pub pohozaev_residual: f64,
    /// Index of the seed that produced the result.
    pub restart: usize,
    /// `(kinetic, psi)` of every evaluated point, when recorded.
    pub trajectory: Vec<(f64, f64)>,
}

impl SolveResult {
    fn assemble(
        status: Status,
        a: f64,
        field: RadialField,
        nl: &Nonlinearity,
        iterations: usize,
        grad_norm: f64,
        restart: usize,
    ) -> Result<Self> {
        let bd = breakdown(&field, nl, Some(a))?;
        let lambda = bd.lambda.unwrap_or(0.0);
        let pr = pohozaev_residual(&field, nl, lambda)?;
        Ok(SolveResult {
            status,
            a,
            mass_err: (bd.mass - a).abs() / a,
            level: bd.psi,
            breakdown: bd,
            field,
            t_v_residual: None,
            iterations,
            grad_norm,
            pohozaev_residual: pr,
            restart,
            trajectory: Vec::new(),
        })
    }

    fn refused(a: f64, grid: Arc<RadialGrid>) -> Self {
        let field = RadialField::zeros(grid);
        let breakdown = EnergyBreakdown {
            mass: 0.0,
            kinetic: 0.0,
            dual_kinetic: 0.0,
            potential: 0.0,
            psi: 0.0,
            g: 0.0,
            lambda: None,
        };
        SolveResult {
            status: Status::NonexistenceRegime,
            a,
            field,
            breakdown,
            level: f64::NAN,
            t_v_residual: None,
            iterations: 0,
            grad_norm: f64::NAN,
            mass_err: f64::NAN,
            pohozaev_residual: f64::NAN,
            restart: 0,
            trajectory: Vec::new(),
        }
    }

    /// `|G| / (1 + kinetic)`.
    pub fn g_residual(&self) -> f64 {
        self.breakdown.g.abs() / (1.0 + self.breakdown.kinetic)
    }

    pub fn relative_pohozaev_residual(&self) -> f64 {
        self.pohozaev_residual.abs() / (1.0 + self.breakdown.kinetic)
    }

    pub fn summary(&self, field_ref: Option<String>) -> ResultSummary {
        let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
        ResultSummary {
            status: self.status,
            a: self.a,
            psi: finite(self.level),
            lambda: self.breakdown.lambda,
            mass_err: finite(self.mass_err),
            G_residual: finite(self.g_residual()),
            pohozaev_residual: finite(self.relative_pohozaev_residual()),
            iterations: self.iterations,
            field_ref,
            kinetic: self.breakdown.kinetic,
            grad_norm: finite(self.grad_norm),
            t_v_residual: self.t_v_residual,
        }
    }
}

/// The JSON form of a solve. Residuals are relative to `1 + kinetic`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub status: Status,
    pub a: f64,
    pub psi: Option<f64>,
    pub lambda: Option<f64>,
    pub mass_err: Option<f64>,
    pub G_residual: Option<f64>,
    pub pohozaev_residual: Option<f64>,
    pub iterations: usize,
    pub field_ref: Option<String>,
    pub kinetic: f64,
    pub grad_norm: Option<f64>,
    pub t_v_residual: Option<f64>,
}

fn descent_options(cfg: &SolveConfig, constraint: Constraint) -> DescentOptions {
    DescentOptions {
        constraint,
        a: cfg.a,
        step0: cfg.step0,
        shrink: cfg.shrink,
        max_outer: cfg.max_outer,
        max_inner: cfg.max_inner,
        tol_grad: cfg.tol_grad,
        tol_g: cfg.tol_g,
        floor: cfg.unbounded_floor,
        kinetic_cap: None,
        record_trajectory: false,
        precond_shift: cfg.precond_shift,
    }
}

/// Mixture coefficients `(c_k, s_k)` for seed `index`: seed 0 is a single
/// Gaussian, later seeds are random mixtures drawn from `cfg.seed`.
fn seed_terms(cfg: &SolveConfig, index: usize, width: f64, signed: bool) -> Vec<(f64, f64)> {
    if index == 0 {
        return vec![(1.0, width)];
    }
    let mut r = rng(cfg.seed.wrapping_add(index as u64));
    let spec = MixtureSpec { min_width: 0.4 * width, max_width: 2.0 * width, signed, ..MixtureSpec::default() };
    random_terms(&spec, &mut r)
}

fn check_power_range(p: f64, dim: usize) -> Result<()> {
    let upper = if dim == 3 { 12.0 } else { f64::INFINITY };
    if !(p > 2.0 && p < upper) {
        return Err(Error::Config(format!("p must lie in (2, {upper}) for N = {dim}, got {p}")));
    }
    Ok(())
}

/// `F(a) = inf_{S_a} Ψ` for `h(t) = |t|^{p-2} t`.
#[allow(non_snake_case)]
pub fn minimize_F(p: f64, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    check_power_range(p, cfg.dim)?;
    let nl = Nonlinearity::power(p)?;
    minimize_on_sphere(&nl, cfg, None)
}

/// Restarted descent of `Ψ` on the mass sphere, optionally below a kinetic cap.
pub(crate) fn minimize_on_sphere(nl: &Nonlinearity, cfg: &SolveConfig, cap: Option<f64>) -> Result<SolveResult> {
    let grid = cfg.grid()?;
    let mut best: Option<SolveResult> = None;
    let mut trajectory = Vec::new();
    let base_width = match cap {
        None => cfg.effective_radius() / 8.0,
        Some(_) => cfg.effective_radius() / 4.0,
    };
    for index in 0..cfg.restarts {
        let terms = seed_terms(cfg, index, base_width, true);
        let v0 = mass_project(&gaussian_mixture(&grid, &terms), cfg.a)?;
        let st = DualState::new(&v0);
        let psi0 = st.psi(nl)?;
        if let Some(c) = cap {
            if st.kinetic() >= 0.999 * c {
                continue;
            }
        }
        let floor = cfg.unbounded_floor.unwrap_or(-1e6 * (1.0 + psi0.abs()));
        if cap.is_none() {
            let prof = FiberProfile::from_state(&st, nl)?;
            if let Some(t) = fiber_below(&prof, floor) {
                let mut res = SolveResult::assemble(Status::UnboundedBelow, cfg.a, v0, nl, 0, f64::NAN, index)?;
                res.level = prof.fiber_psi(t)?;
                return Ok(res);
            }
        }
        let mut opts = descent_options(cfg, Constraint::Mass);
        opts.floor = Some(floor);
        opts.kinetic_cap = cap;
        opts.record_trajectory = cap.is_some();
        let out = descend(v0, nl, &opts)?;
        trajectory.extend_from_slice(&out.trajectory);
        let status = match out.status {
            DescentStatus::Converged => Status::Converged,
            DescentStatus::UnboundedBelow => Status::UnboundedBelow,
            DescentStatus::MaxIters | DescentStatus::Stalled => Status::MaxIters,
        };
        let res = SolveResult::assemble(status, cfg.a, out.field, nl, out.iterations, out.grad_norm, index)?;
        if status == Status::UnboundedBelow {
            return Ok(res);
        }
        let better = match &best {
            None => true,
            Some(b) => res.breakdown.psi < b.breakdown.psi,
        };
        if better {
            best = Some(res);
        }
    }
    let mut res = best.ok_or_else(|| Error::Precondition("every seed violates the kinetic cap".into()))?;
    res.trajectory = trajectory;
    let eps = cfg.eps_neg();
    if res.breakdown.psi >= -eps {
        // the descent cannot certify a negative level; the level is the
        // infimum along the fiber towards t -> 0, where the field spreads
        let prof = FiberProfile::new(&res.field, nl)?;
        let mut level = res.breakdown.psi;
        for k in 0..=60 {
            let t = 10f64.powf(-6.0 + 0.1 * k as f64);
            level = level.min(prof.fiber_psi(t)?);
        }
        res.level = level;
        if cap.is_none() {
            res.status = Status::Vanishing;
        }
    }
    Ok(res)
}

/// First `t` on a log grid over `[1, 1e6]` with `Ψ(v_t)` below `floor`.
fn fiber_below(prof: &FiberProfile, floor: f64) -> Option<f64> {
    for k in 0..=120 {
        let t = 10f64.powf(0.05 * k as f64);
        match prof.fiber_psi(t) {
            Ok(x) if x < floor => return Some(t),
            Ok(_) => {}
            Err(_) => return None,
        }
    }
    None
}

/// Rescales the mixture widths until the fiber maximum sits at `t ≈ 1`:
/// bisection in `ln s` on `ln t_v(s)`, which increases with the scale `s`.
fn seat_on_fiber(
    grid: &Arc<RadialGrid>,
    terms: &[(f64, f64)],
    nl: &Nonlinearity,
    a: f64,
) -> Result<RadialField> {
    let field_at = |ln_s: f64| -> Result<RadialField> {
        let s = ln_s.exp();
        let scaled: Vec<(f64, f64)> = terms.iter().map(|&(c, w)| (c, w * s)).collect();
        mass_project(&gaussian_mixture(grid, &scaled), a)
    };
    let ln_t = |ln_s: f64| -> Result<(f64, RadialField)> {
        let v = field_at(ln_s)?;
        let root = find_tv(&v, nl, 2.0, 1e-10)?;
        Ok((root.t.ln(), v))
    };
    let (mut x0, (mut y0, mut v)) = (0.0, ln_t(0.0)?);
    if y0.abs() < 1e-4 {
        return Ok(v);
    }
    // the first correction is usually close, then bracket outwards from it
    let mut x1 = -y0;
    let mut y1 = ln_t(x1)?.0;
    let mut step = 0.5;
    while y0.signum() == y1.signum() {
        x0 = x1;
        y0 = y1;
        x1 = x0 - y0.signum() * step;
        y1 = ln_t(x1)?.0;
        step *= 2.0;
        if step > 64.0 {
            return Err(Error::NoFiberRoot { lo: 1e-6, hi: 1e6 });
        }
    }
    for _ in 0..60 {
        let xm = 0.5 * (x0 + x1);
        let (ym, vm) = ln_t(xm)?;
        v = vm;
        if ym.abs() < 1e-4 || (x1 - x0).abs() < 1e-12 {
            break;
        }
        if ym.signum() == y0.signum() {
            x0 = xm;
            y0 = ym;
        } else {
            x1 = xm;
        }
    }
    Ok(v)
}

/// `σ(a) = inf Ψ` over the mass sphere intersected with `G = 0`.
pub fn minimize_sigma(nl: &Nonlinearity, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let regime = crate::nonlinearity::growth_classify(nl, cfg.dim)?;
    match regime {
        GrowthRegime::Nonexistence => return Ok(SolveResult::refused(cfg.a, grid)),
        GrowthRegime::MassSupercritical => {}
        GrowthRegime::ExpCritical if cfg.experimental => {}
        other => {
            return Err(Error::Config(format!(
                "minimize_sigma needs a mass-supercritical nonlinearity, got {}",
                other.as_str()
            )))
        }
    }
    let set = if cfg.experimental { HypothesisSet::BigHSet } else { HypothesisSet::HSet };
    let report = validate_hypotheses(nl, set, cfg.dim, &default_samples())?;
    if !report.passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(Error::Config(format!("hypotheses fail for {}: {}", nl.name(), failed.join(", "))));
    }
    let pre = H1Preconditioner::new(&grid, cfg.precond_shift);
    let opts = descent_options(cfg, Constraint::MassAndPohozaev);
    let mut best: Option<SolveResult> = None;
    for index in 0..cfg.restarts {
        let terms = seed_terms(cfg, index, cfg.effective_radius() / 8.0, false);
        let seated = match seat_on_fiber(&grid, &terms, nl, cfg.a) {
            Ok(v) => v,
            Err(Error::NoFiberRoot { .. }) | Err(Error::FiberRootNotUnique { .. }) if index > 0 => continue,
            Err(e) => return Err(e),
        };
        let v0 = polish_pohozaev(&seated, nl, cfg.a, 1e-3 * cfg.tol_g, &pre)?;
        let out = descend(v0, nl, &opts)?;
        let status = match out.status {
            DescentStatus::Converged => Status::Converged,
            DescentStatus::UnboundedBelow => Status::UnboundedBelow,
            DescentStatus::MaxIters | DescentStatus::Stalled => Status::MaxIters,
        };
        let res = SolveResult::assemble(status, cfg.a, out.field, nl, out.iterations, out.grad_norm, index)?;
        let rank = |r: &SolveResult| (r.status != Status::Converged, r.breakdown.psi);
        let better = match &best {
            None => true,
            Some(b) => {
                let (x, y) = (rank(&res), rank(b));
                x.0 < y.0 || (x.0 == y.0 && x.1 < y.1)
            }
        };
        if better {
            best = Some(res);
        }
    }
    let mut res = best.ok_or(Error::NoFiberRoot { lo: 1e-6, hi: 1e6 })?;
    res.t_v_residual = find_tv(&res.field, nl, 2.0, 1e-12).ok().map(|r| (r.t - 1.0).abs());
    if res.status == Status::Converged && res.breakdown.lambda.is_none_or(|l| !(l < 0.0)) {
        return Err(Error::Numeric(format!(
            "ground state has nonnegative multiplier {:?}",
            res.breakdown.lambda
        )));
    }
    Ok(res)
}
