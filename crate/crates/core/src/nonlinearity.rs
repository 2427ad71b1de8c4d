//! Nonlinearities `h` with primitive `H`, hypothesis validators and the
//! growth-regime classifier.
//!
//! Every variant can be evaluated in scaled form `value = scaled * e^{L(t)}`,
//! where `L(t) = ζ₀t⁴` for the exponential model and `0` otherwise. The
//! validators work with the scaled form so that ratios such as `t h / H` can
//! be sampled far beyond the double-precision range of `e^{ζ₀t⁴}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible exponent `ζ₀t⁴` before `exp` is considered to overflow.
pub const EXP_CAP: f64 = 700.0;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied `h`, `H` pair. Hypothesis constants are optional and only
/// used by the validators and the classifier.
#[derive(Clone)]
pub struct CustomNonlinearity {
    pub name: String,
    pub h: ScalarFn,
    pub big_h: ScalarFn,
    pub mu: Option<(f64, f64)>,
    pub zeta0: Option<f64>,
}

impl CustomNonlinearity {
    pub fn new(
        name: impl Into<String>,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        big_h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomNonlinearity {
            name: name.into(),
            h: Arc::new(h),
            big_h: Arc::new(big_h),
            mu: None,
            zeta0: None,
        }
    }

    pub fn with_mu(mut self, mu1: f64, mu2: f64) -> Self {
        self.mu = Some((mu1, mu2));
        self
    }
}

impl fmt::Debug for CustomNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNonlinearity")
            .field("name", &self.name)
            .field("mu", &self.mu)
            .field("zeta0", &self.zeta0)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Nonlinearity {
    /// `h = |t|^{p-2} t`.
    Power { p: f64 },
    /// `h = κ|t|^{p-2} t + |t|^{10} t`.
    PowerPlusSobolevCritical { p: f64, kappa: f64 },
    /// `H = ξ|t|^p e^{ζ₀t⁴}`.
    ExpCriticalModel { zeta0: f64, xi: f64, p: f64 },
    Custom(CustomNonlinearity),
}

/// JSON form, e.g. `{"variant":"power","p":7}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Power {
        p: f64,
    },
    PowerSobolev {
        p: f64,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
    ExpCritical {
        zeta0: f64,
        xi: f64,
        p: f64,
    },
}

fn default_kappa() -> f64 {
    1.0
}

impl TryFrom<NonlinearitySpec> for Nonlinearity {
    type Error = Error;

    fn try_from(spec: NonlinearitySpec) -> Result<Self> {
        match spec {
            NonlinearitySpec::Power { p } => Nonlinearity::power(p),
            NonlinearitySpec::PowerSobolev { p, kappa } => Nonlinearity::power_sobolev(p, kappa),
            NonlinearitySpec::ExpCritical { zeta0, xi, p } => {
                Nonlinearity::exp_critical(zeta0, xi, p)
            }
        }
    }
}

/// Sign and log-magnitude of a possibly huge value.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogValue {
    sign: f64,
    ln_abs: f64,
}

impl LogValue {
    fn new(scaled: f64, ln_scale: f64) -> Self {
        if scaled == 0.0 {
            LogValue { sign: 0.0, ln_abs: f64::NEG_INFINITY }
        } else {
            LogValue { sign: scaled.signum(), ln_abs: scaled.abs().ln() + ln_scale }
        }
    }

    fn le(self, other: LogValue, rel_slack: f64) -> bool {
        let key = |v: LogValue| (v.sign, if v.sign < 0.0 { -v.ln_abs } else { v.ln_abs });
        let (sa, la) = key(self);
        let (sb, lb) = key(other);
        if sa != sb {
            return sa < sb;
        }
        if sa == 0.0 {
            return true;
        }
        la <= lb + rel_slack
    }
}

impl Nonlinearity {
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 2.0) {
            return Err(Error::Config(format!("power exponent must exceed 2, got {p}")));
        }
        Ok(Nonlinearity::Power { p })
    }

    pub fn power_sobolev(p: f64, kappa: f64) -> Result<Self> {
        if !(p.is_finite() && p > 2.0 && p < 12.0) {
            return Err(Error::Config(format!("subcritical exponent must lie in (2, 12), got {p}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Nonlinearity::PowerPlusSobolevCritical { p, kappa })
    }

    pub fn exp_critical(zeta0: f64, xi: f64, p: f64) -> Result<Self> {
        if !(zeta0.is_finite() && zeta0 > 0.0) {
            return Err(Error::Config(format!("zeta0 must be positive, got {zeta0}")));
        }
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::Config(format!("xi must be positive, got {xi}")));
        }
        if !(p.is_finite() && p > 6.0) {
            return Err(Error::Config(format!("exponential model needs p > 6, got {p}")));
        }
        Ok(Nonlinearity::ExpCriticalModel { zeta0, xi, p })
    }

    pub fn spec(&self) -> Option<NonlinearitySpec> {
        match *self {
            Nonlinearity::Power { p } => Some(NonlinearitySpec::Power { p }),
            Nonlinearity::PowerPlusSobolevCritical { p, kappa } => {
                Some(NonlinearitySpec::PowerSobolev { p, kappa })
            }
            Nonlinearity::ExpCriticalModel { zeta0, xi, p } => {
                Some(NonlinearitySpec::ExpCritical { zeta0, xi, p })
            }
            Nonlinearity::Custom(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Nonlinearity::Power { p } => format!("power(p={p})"),
            Nonlinearity::PowerPlusSobolevCritical { p, kappa } => {
                format!("power_sobolev(p={p}, kappa={kappa})")
            }
            Nonlinearity::ExpCriticalModel { zeta0, xi, p } => {
                format!("exp_critical(zeta0={zeta0}, xi={xi}, p={p})")
            }
            Nonlinearity::Custom(c) => format!("custom({})", c.name),
        }
    }

    /// Ambrosetti-Rabinowitz pinch `μ₁ H ≤ t h ≤ μ₂ H`.
    pub fn mu_bounds(&self) -> Option<(f64, f64)> {
        match self {
            Nonlinearity::Power { p } => Some((*p, *p)),
            Nonlinearity::PowerPlusSobolevCritical { p, .. } => Some((*p, 12.0)),
            Nonlinearity::ExpCriticalModel { p, .. } => Some((*p, f64::INFINITY)),
            Nonlinearity::Custom(c) => c.mu,
        }
    }

    pub fn zeta0(&self) -> Option<f64> {
        match self {
            Nonlinearity::ExpCriticalModel { zeta0, .. } => Some(*zeta0),
            Nonlinearity::Custom(c) => c.zeta0,
            _ => None,
        }
    }

    /// `(L₀, t₀)` with `H ≤ L₀|h|` for `|t| ≥ t₀`, exponential model only.
    /// `t₀ = 1` and `L₀ = max_{t ≥ 1} t / (p + 4ζ₀t⁴)`.
    pub fn h4_constants(&self) -> Option<(f64, f64)> {
        match *self {
            Nonlinearity::ExpCriticalModel { zeta0, p, .. } => {
                let t_peak = (p / (12.0 * zeta0)).powf(0.25).max(1.0);
                Some((t_peak / (p + 4.0 * zeta0 * t_peak.powi(4)), 1.0))
            }
            _ => None,
        }
    }

    /// Largest `|t|` at which `h` and `H` can be evaluated.
    pub fn max_argument(&self) -> f64 {
        match *self {
            Nonlinearity::ExpCriticalModel { zeta0, .. } => (EXP_CAP / zeta0).powf(0.25),
            _ => f64::INFINITY,
        }
    }

    /// Range error when `|t|` exceeds [`max_argument`](Self::max_argument).
    pub fn check_range(&self, max_abs: f64) -> Result<()> {
        if !max_abs.is_finite() {
            return Err(Error::Range(format!("non-finite argument {max_abs}")));
        }
        if max_abs > self.max_argument() {
            return Err(Error::Range(format!(
                "argument {max_abs:e} exceeds the exponential cap |t| <= {:e}; rescale the field",
                self.max_argument()
            )));
        }
        Ok(())
    }

    fn ln_scale(&self, t: f64) -> f64 {
        match *self {
            Nonlinearity::ExpCriticalModel { zeta0, .. } => zeta0 * t.powi(4),
            _ => 0.0,
        }
    }

    /// `(h, H)` divided by `e^{L(t)}`.
    fn scaled(&self, t: f64) -> (f64, f64) {
        let a = t.abs();
        match self {
            Nonlinearity::Power { p } => {
                let ap = a.powf(*p);
                (div_t(ap, t), ap / p)
            }
            Nonlinearity::PowerPlusSobolevCritical { p, kappa } => {
                let ap = a.powf(*p);
                let a12 = a.powi(12);
                (div_t(kappa * ap + a12, t), kappa * ap / p + a12 / 12.0)
            }
            Nonlinearity::ExpCriticalModel { zeta0, xi, p } => {
                let ap = a.powf(*p);
                let h = div_t(xi * ap * (p + 4.0 * zeta0 * a.powi(4)), t);
                (h, xi * ap)
            }
            Nonlinearity::Custom(c) => ((c.h)(t), (c.big_h)(t)),
        }
    }

    pub fn h(&self, t: f64) -> f64 {
        let (h, _) = self.scaled(t);
        match self {
            Nonlinearity::ExpCriticalModel { .. } => h * self.ln_scale(t).exp(),
            _ => h,
        }
    }

    #[allow(non_snake_case)]
    pub fn H(&self, t: f64) -> f64 {
        let (_, big_h) = self.scaled(t);
        match self {
            Nonlinearity::ExpCriticalModel { .. } => big_h * self.ln_scale(t).exp(),
            _ => big_h,
        }
    }

    /// `(h(t), H(t))` in one pass.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let (h, big_h) = self.scaled(t);
        match self {
            Nonlinearity::ExpCriticalModel { .. } => {
                let e = self.ln_scale(t).exp();
                (h * e, big_h * e)
            }
            _ => (h, big_h),
        }
    }

    pub fn try_h(&self, t: f64) -> Result<f64> {
        self.check_range(t.abs())?;
        Ok(self.h(t))
    }

    #[allow(non_snake_case)]
    pub fn try_H(&self, t: f64) -> Result<f64> {
        self.check_range(t.abs())?;
        Ok(self.H(t))
    }

    /// `h'(t)`; central differences for custom variants.
    pub fn h_prime(&self, t: f64) -> f64 {
        let a = t.abs();
        match *self {
            Nonlinearity::Power { p } => (p - 1.0) * a.powf(p - 2.0),
            Nonlinearity::PowerPlusSobolevCritical { p, kappa } => {
                kappa * (p - 1.0) * a.powf(p - 2.0) + 11.0 * a.powi(10)
            }
            Nonlinearity::ExpCriticalModel { zeta0, xi, p } => {
                let a4 = a.powi(4);
                xi * (zeta0 * a4).exp()
                    * a.powf(p - 2.0)
                    * (p * (p - 1.0)
                        + 4.0 * zeta0 * (2.0 * p + 3.0) * a4
                        + 16.0 * zeta0 * zeta0 * a4 * a4)
            }
            Nonlinearity::Custom(ref c) => {
                let eps = 1e-6 * a.max(1.0);
                ((c.h)(t + eps) - (c.h)(t - eps)) / (2.0 * eps)
            }
        }
    }
}

/// `num / t`, zero at the origin.
fn div_t(num: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        num / t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisSet {
    HSet,
    BigHSet,
    ExpGrowth,
}

impl std::str::FromStr for HypothesisSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h-set" => Ok(HypothesisSet::HSet),
            "H-set" => Ok(HypothesisSet::BigHSet),
            "exp-growth" => Ok(HypothesisSet::ExpGrowth),
            other => Err(Error::Config(format!("unknown hypothesis set {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub nonlinearity: String,
    pub set: HypothesisSet,
    pub dim: usize,
    pub sample_count: usize,
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `count` log-spaced samples in `[lo, hi]`.
pub fn log_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if count == 1 {
                lo
            } else {
                (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default validation samples: 200 points log-spaced over `[1e-4, 1e3]`.
pub fn default_samples() -> Vec<f64> {
    log_samples(1e-4, 1e3, 200)
}

const MONOTONE_SLACK: f64 = 1e-12;

/// Checks one hypothesis set on positive samples and their negatives.
pub fn validate_hypotheses(
    nl: &Nonlinearity,
    set: HypothesisSet,
    dim: usize,
    samples: &[f64],
) -> Result<ValidationReport> {
    if dim != 2 && dim != 3 {
        return Err(Error::Config(format!("dimension must be 2 or 3, got {dim}")));
    }
    let mut pos: Vec<f64> = samples.iter().map(|t| t.abs()).filter(|&t| t > 0.0).collect();
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    if pos.len() < 2 {
        return Err(Error::Config("need at least two nonzero samples".into()));
    }
    let checks = match set {
        HypothesisSet::HSet => vec![check_h1(nl, &pos), check_h2(nl, dim, &pos), check_h3(nl, dim, &pos)],
        HypothesisSet::BigHSet => vec![
            check_big_h1(nl, &pos),
            check_big_h2(nl, &pos),
            check_big_h3(nl, &pos),
            check_big_h4(nl, &pos),
        ],
        HypothesisSet::ExpGrowth => vec![check_exp_growth(nl)],
    };
    Ok(ValidationReport {
        nonlinearity: nl.name(),
        set,
        dim,
        sample_count: pos.len(),
        checks,
    })
}

fn both_signs(pos: &[f64]) -> impl Iterator<Item = f64> + '_ {
    pos.iter().flat_map(|&t| [t, -t])
}

/// `t h(t) / H(t)` with the exponential factor cancelled.
fn pinch_ratio(nl: &Nonlinearity, t: f64) -> f64 {
    let (h, big_h) = nl.scaled(t);
    t * h / big_h
}

fn vanishing_check(name: &str, nl: &Nonlinearity, pos: &[f64], power: i32) -> HypothesisCheck {
    // h(t)/t^power along the smallest decade of samples
    let small: Vec<f64> = pos.iter().copied().filter(|&t| t <= pos[0] * 10.0).collect();
    let ratios: Vec<f64> = small
        .iter()
        .map(|&t| (nl.h(t) / t.powi(power)).abs().max((nl.h(-t) / t.powi(power)).abs()))
        .collect();
    let first = *ratios.last().unwrap();
    let last = ratios[0];
    let finite = ratios.iter().all(|r| r.is_finite());
    let passed = finite && last < first && last < 1.0;
    HypothesisCheck {
        name: name.into(),
        passed,
        detail: format!(
            "|h(t)/t^{power}| = {last:e} at t = {:e}, {first:e} at t = {:e}",
            small[0],
            small[small.len() - 1]
        ),
        min: Some(last),
        max: Some(first),
    }
}

fn check_h1(nl: &Nonlinearity, pos: &[f64]) -> HypothesisCheck {
    vanishing_check("h1", nl, pos, 1)
}

fn check_h2(nl: &Nonlinearity, dim: usize, pos: &[f64]) -> HypothesisCheck {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut positive = true;
    for t in both_signs(pos) {
        let (_, big_h) = nl.scaled(t);
        positive &= big_h > 0.0;
        let r = pinch_ratio(nl, t);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let lower = 4.0 + 4.0 / dim as f64;
    let upper = if dim == 3 { 12.0 } else { f64::INFINITY };
    let (mu1, mu2) = nl.mu_bounds().unwrap_or((lo, hi));
    let tol = 1e-9 * mu1.abs().max(1.0);
    let within = lo >= mu1 - tol && (hi <= mu2 + tol * hi.abs().max(1.0));
    let band = mu1 > lower && mu2 < upper && mu1 <= mu2;
    HypothesisCheck {
        name: "h2".into(),
        passed: positive && within && band,
        detail: format!(
            "t h/H in [{lo}, {hi}]; declared mu in [{mu1}, {mu2}]; required {lower} < mu1 <= mu2 < {upper}"
        ),
        min: Some(lo),
        max: Some(hi),
    }
}

/// `(h t - 2H) / (|t|^{3+4/N} t)` in log form.
fn h3_ratio(nl: &Nonlinearity, dim: usize, t: f64) -> LogValue {
    let (h, big_h) = nl.scaled(t);
    let num = h * t - 2.0 * big_h;
    let den_exp = 3.0 + 4.0 / dim as f64;
    let mut v = LogValue::new(num, nl.ln_scale(t));
    v.ln_abs -= t.abs().ln() * (den_exp + 1.0);
    if t < 0.0 {
        v.sign = -v.sign;
    }
    v
}

fn check_h3(nl: &Nonlinearity, dim: usize, pos: &[f64]) -> HypothesisCheck {
    let mut violations = 0;
    let mut worst = 0.0_f64;
    for side in [1.0, -1.0] {
        let mut ts: Vec<f64> = pos.iter().map(|t| side * t).collect();
        ts.sort_by(f64::total_cmp);
        let vals: Vec<LogValue> = ts.iter().map(|&t| h3_ratio(nl, dim, t)).collect();
        for w in vals.windows(2) {
            if !w[0].le(w[1], MONOTONE_SLACK) {
                violations += 1;
                if w[0].sign == w[1].sign {
                    worst = worst.max((w[0].ln_abs - w[1].ln_abs).abs());
                } else {
                    worst = f64::INFINITY;
                }
            }
        }
    }
    HypothesisCheck {
        name: "h3".into(),
        passed: violations == 0,
        detail: format!(
            "(h t - 2H)/(|t|^(3+4/N) t) monotonicity violations: {violations}, worst log drop {worst:e}"
        ),
        min: None,
        max: None,
    }
}

fn check_big_h1(nl: &Nonlinearity, pos: &[f64]) -> HypothesisCheck {
    vanishing_check("H1", nl, pos, 5)
}

fn check_big_h2(nl: &Nonlinearity, pos: &[f64]) -> HypothesisCheck {
    let (xi, p) = match *nl {
        Nonlinearity::ExpCriticalModel { xi, p, .. } => (xi, p),
        _ => {
            return HypothesisCheck {
                name: "H2".into(),
                passed: false,
                detail: "no (xi, p) lower bound declared for this nonlinearity".into(),
                min: None,
                max: None,
            }
        }
    };
    // ln H - ln(xi |t|^p) >= 0
    let mut worst = f64::INFINITY;
    for t in both_signs(pos) {
        let (_, big_h) = nl.scaled(t);
        let gap = big_h.ln() + nl.ln_scale(t) - xi.ln() - p * t.abs().ln();
        worst = worst.min(gap);
    }
    HypothesisCheck {
        name: "H2".into(),
        passed: p > 6.0 && worst >= -1e-12,
        detail: format!("min ln(H/(xi |t|^p)) = {worst:e}, p = {p}"),
        min: Some(worst),
        max: None,
    }
}

fn check_big_h3(nl: &Nonlinearity, pos: &[f64]) -> HypothesisCheck {
    let mut lo = f64::INFINITY;
    let mut positive = true;
    for t in both_signs(pos) {
        positive &= nl.scaled(t).1 > 0.0;
        lo = lo.min(pinch_ratio(nl, t));
    }
    HypothesisCheck {
        name: "H3".into(),
        passed: positive && lo >= 8.0 * (1.0 - 1e-12),
        detail: format!("min t h/H = {lo}; required >= 8 and H > 0"),
        min: Some(lo),
        max: None,
    }
}

fn check_big_h4(nl: &Nonlinearity, pos: &[f64]) -> HypothesisCheck {
    let Some((l0, t0)) = nl.h4_constants() else {
        return HypothesisCheck {
            name: "H4".into(),
            passed: false,
            detail: "no (L0, t0) declared for this nonlinearity".into(),
            min: None,
            max: None,
        };
    };
    let mut worst = 0.0_f64;
    for t in both_signs(pos).filter(|t| t.abs() >= t0) {
        let (h, big_h) = nl.scaled(t);
        worst = worst.max(big_h / h.abs());
    }
    HypothesisCheck {
        name: "H4".into(),
        passed: worst <= l0 * (1.0 + 1e-12),
        detail: format!("max H/|h| over |t| >= {t0} is {worst:e}; L0 = {l0:e}"),
        min: None,
        max: Some(worst),
    }
}

/// `ln(|h(t)| / e^{ζ t⁴})`.
pub fn ln_growth_ratio(nl: &Nonlinearity, t: f64, zeta: f64) -> f64 {
    let (h, _) = nl.scaled(t);
    h.abs().ln() + nl.ln_scale(t) - zeta * t.powi(4)
}

fn check_exp_growth(nl: &Nonlinearity) -> HypothesisCheck {
    let Some(zeta0) = nl.zeta0() else {
        return HypothesisCheck {
            name: "exp-growth".into(),
            passed: false,
            detail: "no zeta0 declared for this nonlinearity".into(),
            min: None,
            max: None,
        };
    };
    let above = [5.0, 6.0].map(|t| ln_growth_ratio(nl, t, 1.1 * zeta0));
    let below = [5.0, 6.0].map(|t| ln_growth_ratio(nl, t, 0.9 * zeta0));
    // |h|/e^{ζt⁴} must decay toward 0 above ζ₀ and blow up below it
    let decays = above[1] < above[0] && above[1] < -10.0;
    let grows = below[1] > below[0] && below[1] > 10.0;
    HypothesisCheck {
        name: "exp-growth".into(),
        passed: decays && grows,
        detail: format!(
            "ln ratio at t=5,6: zeta=1.1 zeta0 -> ({:.3e}, {:.3e}); zeta=0.9 zeta0 -> ({:.3e}, {:.3e})",
            above[0], above[1], below[0], below[1]
        ),
        min: Some(above[1]),
        max: Some(below[1]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthRegime {
    MassSubcritical,
    MassCriticalBand,
    MassSupercritical,
    SobolevCritical,
    ExpCritical,
    Nonexistence,
    UnsupportedBoundary,
}

impl GrowthRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthRegime::MassSubcritical => "mass-subcritical",
            GrowthRegime::MassCriticalBand => "mass-critical-band",
            GrowthRegime::MassSupercritical => "mass-supercritical",
            GrowthRegime::SobolevCritical => "sobolev-critical",
            GrowthRegime::ExpCritical => "exp-critical",
            GrowthRegime::Nonexistence => "nonexistence",
            GrowthRegime::UnsupportedBoundary => "unsupported-boundary",
        }
    }
}

/// Growth regime from the exponents `2 + 4/N`, `4 + 4/N` and `2·2* = 12`.
pub fn growth_classify(nl: &Nonlinearity, dim: usize) -> Result<GrowthRegime> {
    if dim != 2 && dim != 3 {
        return Err(Error::Config(format!("dimension must be 2 or 3, got {dim}")));
    }
    let n = dim as f64;
    let mass_critical = 2.0 + 4.0 / n;
    let l2_critical = 4.0 + 4.0 / n;
    let classify_power = |p: f64| {
        if dim == 3 && p >= 12.0 {
            GrowthRegime::Nonexistence
        } else if p < mass_critical {
            GrowthRegime::MassSubcritical
        } else if p < l2_critical {
            GrowthRegime::MassCriticalBand
        } else if p == l2_critical {
            GrowthRegime::UnsupportedBoundary
        } else {
            GrowthRegime::MassSupercritical
        }
    };
    match nl {
        Nonlinearity::Power { p } => Ok(classify_power(*p)),
        Nonlinearity::PowerPlusSobolevCritical { .. } => Ok(GrowthRegime::SobolevCritical),
        Nonlinearity::ExpCriticalModel { .. } => Ok(GrowthRegime::ExpCritical),
        Nonlinearity::Custom(c) => {
            let (mu1, mu2) = c.mu.ok_or_else(|| {
                Error::Config(format!("custom nonlinearity {} declares no mu bounds", c.name))
            })?;
            if dim == 3 && mu1 >= 12.0 {
                return Ok(GrowthRegime::Nonexistence);
            }
            let lo = classify_power(mu1);
            let hi = classify_power(mu2);
            if mu1 > l2_critical && hi != GrowthRegime::Nonexistence {
                Ok(GrowthRegime::MassSupercritical)
            } else if lo == hi {
                Ok(lo)
            } else {
                Ok(GrowthRegime::UnsupportedBoundary)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_variants() -> Vec<Nonlinearity> {
        vec![
            Nonlinearity::power(3.0).unwrap(),
            Nonlinearity::power(7.0).unwrap(),
            Nonlinearity::power(2.5).unwrap(),
            Nonlinearity::power_sobolev(3.0, 1.0).unwrap(),
            Nonlinearity::power_sobolev(3.0, 0.4).unwrap(),
            Nonlinearity::exp_critical(1.0, 1.0, 8.0).unwrap(),
            Nonlinearity::Custom(CustomNonlinearity::new(
                "cubic+quintic",
                |t| t * t * t + t.powi(5),
                |t| t.powi(4) / 4.0 + t.powi(6) / 6.0,
            )),
        ]
    }

    #[test]
    fn evaluation_examples() {
        let p3 = Nonlinearity::power(3.0).unwrap();
        assert_eq!(p3.h(2.0), 4.0);
        assert!((p3.H(2.0) - 8.0 / 3.0).abs() < 1e-15);
        let s = Nonlinearity::power_sobolev(3.0, 1.0).unwrap();
        assert_eq!(s.h(1.0), 2.0);
        assert!((s.H(1.0) - 5.0 / 12.0).abs() < 1e-15);
        let e = Nonlinearity::exp_critical(1.0, 1.0, 8.0).unwrap();
        assert!((e.H(1.0) - std::f64::consts::E).abs() < 1e-15);
        assert!((e.h(1.0) - 12.0 * std::f64::consts::E).abs() < 1e-13);
        assert!(e.try_H(5.2).is_err());
        assert!(e.try_H(5.1).is_ok());
        assert_eq!(p3.h(0.0), 0.0);
        assert_eq!(e.H(0.0), 0.0);
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(Nonlinearity::power(2.0).unwrap_err().is_config());
        assert!(Nonlinearity::exp_critical(1.0, 1.0, 6.0).is_err());
        assert!(Nonlinearity::exp_critical(0.0, 1.0, 8.0).is_err());
        assert!(Nonlinearity::power_sobolev(3.0, 0.0).is_err());
    }

    #[test]
    fn parity_is_exact() {
        for nl in all_variants() {
            for t in [1e-3, 0.3, 1.0, 1.7, 4.0] {
                assert_eq!(nl.h(-t), -nl.h(t), "{}", nl.name());
                assert_eq!(nl.H(-t), nl.H(t), "{}", nl.name());
                assert!(nl.H(t) > 0.0);
            }
        }
    }

    #[test]
    fn primitive_derivative_matches_h() {
        for nl in all_variants() {
            let ts: &[f64] = if matches!(nl, Nonlinearity::ExpCriticalModel { .. }) {
                &[0.2, 0.5, 1.0, 1.5, -1.2]
            } else {
                &[0.2, 0.5, 1.0, 1.5, 3.0, -2.0]
            };
            for &t in ts {
                let eps = 1e-6 * t.abs().max(1.0);
                let fd = (nl.H(t + eps) - nl.H(t - eps)) / (2.0 * eps);
                let rel = (fd - nl.h(t)).abs() / nl.h(t).abs();
                assert!(rel < 1e-5, "{} t={t} rel={rel}", nl.name());
                let fd2 = (nl.h(t + eps) - nl.h(t - eps)) / (2.0 * eps);
                let rel2 = (fd2 - nl.h_prime(t)).abs() / nl.h_prime(t).abs();
                assert!(rel2 < 1e-5, "{} h' t={t} rel={rel2}", nl.name());
            }
        }
    }

    #[test]
    fn power_pinch_is_exact() {
        let nl = Nonlinearity::power(7.0).unwrap();
        for t in [0.01, 0.5, 2.0, 30.0] {
            assert!((t * nl.h(t) / nl.H(t) - 7.0).abs() < 1e-13);
        }
    }

    #[test]
    fn validation_examples() {
        let s = default_samples();
        let p7 = Nonlinearity::power(7.0).unwrap();
        let r = validate_hypotheses(&p7, HypothesisSet::HSet, 2, &s).unwrap();
        assert!(r.passed(), "{r:?}");
        let h2 = r.check("h2").unwrap();
        assert!((h2.min.unwrap() - 7.0).abs() < 1e-12 && (h2.max.unwrap() - 7.0).abs() < 1e-12);

        let p3 = Nonlinearity::power(3.0).unwrap();
        let r = validate_hypotheses(&p3, HypothesisSet::HSet, 2, &s).unwrap();
        assert!(!r.check("h2").unwrap().passed);
        assert!(!r.check("h3").unwrap().passed);

        let e = Nonlinearity::exp_critical(1.0, 1.0, 8.0).unwrap();
        for t in [0.5_f64, 1.0, 2.0] {
            let expect = 8.0 + 4.0 * t.powi(4);
            assert!((t * e.h(t) / e.H(t) - expect).abs() < 1e-12 * expect);
        }
        let r = validate_hypotheses(&e, HypothesisSet::BigHSet, 2, &s).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = validate_hypotheses(&e, HypothesisSet::ExpGrowth, 2, &s).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = validate_hypotheses(&e, HypothesisSet::HSet, 2, &s).unwrap();
        assert!(r.check("h3").unwrap().passed, "{r:?}");

        let p6 = Nonlinearity::power(6.0).unwrap();
        assert!(validate_hypotheses(&p6, HypothesisSet::HSet, 3, &s).unwrap().passed());
        let p12 = Nonlinearity::power(12.0).unwrap();
        assert!(!validate_hypotheses(&p12, HypothesisSet::HSet, 3, &s).unwrap().passed());
        assert!(!validate_hypotheses(&p7, HypothesisSet::ExpGrowth, 2, &s).unwrap().passed());
    }

    #[test]
    fn classification_examples() {
        let c = |p: f64, n| growth_classify(&Nonlinearity::power(p).unwrap(), n).unwrap();
        assert_eq!(c(3.0, 2), GrowthRegime::MassSubcritical);
        assert_eq!(c(5.0, 2), GrowthRegime::MassCriticalBand);
        assert_eq!(c(4.0, 2), GrowthRegime::MassCriticalBand);
        assert_eq!(c(6.0, 2), GrowthRegime::UnsupportedBoundary);
        assert_eq!(c(7.0, 2), GrowthRegime::MassSupercritical);
        assert_eq!(c(6.0, 3), GrowthRegime::MassSupercritical);
        assert_eq!(c(12.0, 3), GrowthRegime::Nonexistence);
        assert_eq!(c(12.0, 2), GrowthRegime::MassSupercritical);
        let s = Nonlinearity::power_sobolev(3.0, 1.0).unwrap();
        assert_eq!(growth_classify(&s, 3).unwrap(), GrowthRegime::SobolevCritical);
        let e = Nonlinearity::exp_critical(1.0, 1.0, 8.0).unwrap();
        assert_eq!(growth_classify(&e, 2).unwrap(), GrowthRegime::ExpCritical);
        let custom = CustomNonlinearity::new("c", |t| t, |t| t * t / 2.0);
        assert!(growth_classify(&Nonlinearity::Custom(custom.clone()), 2).is_err());
        let custom = Nonlinearity::Custom(custom.with_mu(13.0, 14.0));
        assert_eq!(growth_classify(&custom, 3).unwrap(), GrowthRegime::Nonexistence);
    }

    #[test]
    fn spec_round_trip() {
        let json = r#"{"variant":"power","p":7}"#;
        let spec: NonlinearitySpec = serde_json::from_str(json).unwrap();
        let nl = Nonlinearity::try_from(spec.clone()).unwrap();
        assert_eq!(nl.spec(), Some(spec));
        let spec: NonlinearitySpec =
            serde_json::from_str(r#"{"variant":"power_sobolev","p":3}"#).unwrap();
        assert_eq!(spec, NonlinearitySpec::PowerSobolev { p: 3.0, kappa: 1.0 });
        assert!(serde_json::from_str::<NonlinearitySpec>(r#"{"variant":"power","q":7}"#).is_err());
    }
}
