//! Mass-preserving stretch, mass projection, plain dilation and the fiber
//! root `t_v`.

use serde::Serialize;

use crate::dual_transform::{f_inverse, DualMap};
use crate::error::{Error, Result};
use crate::functionals::{mass, FiberProfile};
use crate::nonlinearity::Nonlinearity;
use crate::radial_field::RadialField;

fn map_dual(v: &RadialField, scale: f64) -> Result<RadialField> {
    let map = DualMap::shared();
    let mut values = Vec::with_capacity(v.values().len());
    for &x in v.values() {
        values.push(f_inverse(scale * map.f(x))?);
    }
    v.with_values(values)
}

/// `v_t(r) = f^{-1}(t^{N/2} f(v(t r)))`, zero where `t r > R`.
pub fn stretch(v: &RadialField, t: f64) -> Result<RadialField> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("stretch factor must be positive, got {t}")));
    }
    if t == 1.0 {
        return Ok(v.clone());
    }
    let inner = v.resample(t)?;
    map_dual(&inner, t.powf(0.5 * v.grid().dim() as f64))
}

/// `f^{-1}(sqrt(a / mass(v)) f(v))`, which has mass exactly `a` up to rounding.
pub fn mass_project(v: &RadialField, a: f64) -> Result<RadialField> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain(format!("target mass must be positive, got {a}")));
    }
    let m = mass(v);
    if !(m > 0.0) {
        return Err(Error::Domain("cannot project the zero field onto a mass sphere".into()));
    }
    if m == a {
        return Ok(v.clone());
    }
    map_dual(v, (a / m).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dilation {
    pub field: RadialField,
    /// Part of the support of `v(θ^{-1/N} ·)` lies beyond `R` and was cut off.
    pub truncated: bool,
}

/// `w(r) = v(θ^{-1/N} r)`, so `mass(w) = θ mass(v)`.
pub fn dilate(v: &RadialField, theta: f64) -> Result<Dilation> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::Domain(format!("dilation factor must be positive, got {theta}")));
    }
    let factor = theta.powf(-1.0 / v.grid().dim() as f64);
    let field = v.resample(factor)?;
    let peak = v.max_abs();
    let support = v
        .grid()
        .nodes()
        .iter()
        .zip(v.values())
        .filter(|(_, x)| x.abs() > 1e-12 * peak)
        .map(|(r, _)| *r)
        .fold(0.0_f64, f64::max);
    let truncated = peak > 0.0 && support / factor > v.grid().radius() * (1.0 - 1e-12);
    Ok(Dilation { field, truncated })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberRoot {
    pub t: f64,
    /// `dΨ(v_t)/dt` at the root.
    pub residual: f64,
    pub evaluations: usize,
}

pub const DEFAULT_TV_TOL: f64 = 1e-10;
const T_MIN: f64 = 1e-6;
const T_MAX: f64 = 1e6;

/// Root of `t ↦ dΨ(v_t)/dt` (the fiber maximum).
pub fn find_tv(v: &RadialField, nl: &Nonlinearity, bracket_growth: f64, tol: f64) -> Result<FiberRoot> {
    let prof = FiberProfile::new(v, nl)?;
    find_tv_profile(&prof, bracket_growth, tol)
}

pub fn find_tv_profile(prof: &FiberProfile, bracket_growth: f64, tol: f64) -> Result<FiberRoot> {
    if !(bracket_growth > 1.0) {
        return Err(Error::Config(format!("bracket growth must exceed 1, got {bracket_growth}")));
    }
    if prof.kinetic() == 0.0 {
        return Err(Error::NoFiberRoot { lo: T_MIN, hi: T_MAX });
    }
    let target = tol * (1.0 + prof.kinetic());
    let mut evals = 0;
    let mut d = |t: f64| {
        evals += 1;
        prof.fiber_dpsi(t)
    };
    let d1 = d(1.0)?;
    if d1.abs() <= target {
        let evaluations = evals;
        return Ok(FiberRoot { t: 1.0, residual: d1, evaluations });
    }
    let (mut lo, mut hi) = (1.0 / bracket_growth, bracket_growth);
    let mut dlo = if d1 > 0.0 { d1 } else { d(lo)? };
    if d1 > 0.0 {
        lo = 1.0;
    }
    while dlo <= 0.0 {
        if lo <= T_MIN {
            return Err(Error::NoFiberRoot { lo: T_MIN, hi: T_MAX });
        }
        hi = lo;
        lo = (lo / bracket_growth).max(T_MIN);
        dlo = d(lo)?;
    }
    let mut dhi = if d1 < 0.0 && hi > 1.0 { d1 } else { d(hi)? };
    if d1 < 0.0 && hi > 1.0 {
        hi = 1.0;
    }
    while dhi >= 0.0 {
        if hi >= T_MAX {
            return Err(Error::NoFiberRoot { lo: T_MIN, hi: T_MAX });
        }
        lo = hi;
        dlo = dhi;
        hi = (hi * bracket_growth).min(T_MAX);
        dhi = match d(hi) {
            Ok(x) => x,
            Err(Error::Range(_)) => return Err(Error::NoFiberRoot { lo, hi }),
            Err(e) => return Err(e),
        };
    }
    // Illinois regula falsi in log t with bisection fallback
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (mut fa, mut fb) = (dlo, dhi);
    let mut side = 0;
    let mut best = (lo, dlo);
    for _ in 0..200 {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = d(x.exp())?;
        if fx.abs() < best.1.abs() {
            best = (x.exp(), fx);
        }
        if fx.abs() <= target || (b - a) < 1e-15 {
            break;
        }
        if (fx > 0.0) == (fa > 0.0) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a) < 1e-14 {
            let mid = 0.5 * (a + b);
            let fm = d(mid.exp())?;
            if fm.abs() < best.1.abs() {
                best = (mid.exp(), fm);
            }
            break;
        }
    }
    let (t, residual) = best;
    // a single sign change on a log scan around the root
    let changes = sign_changes(prof, t / 16.0, t * 16.0, 64)?;
    let evaluations = evals + 64;
    if changes != 1 {
        return Err(Error::FiberRootNotUnique { t, count: changes });
    }
    Ok(FiberRoot { t, residual, evaluations })
}

/// Sign changes of `dΨ(v_t)/dt` over `count` log-spaced points; points past
/// the exponential cap are skipped.
pub fn sign_changes(prof: &FiberProfile, lo: f64, hi: f64, count: usize) -> Result<usize> {
    let mut prev: Option<f64> = None;
    let mut changes = 0;
    for i in 0..count {
        let t = lo * (hi / lo).powf(i as f64 / (count - 1) as f64);
        let x = match prof.fiber_dpsi(t) {
            Ok(x) => x,
            Err(Error::Range(_)) => break,
            Err(e) => return Err(e),
        };
        if x == 0.0 {
            continue;
        }
        if let Some(p) = prev {
            if (p > 0.0) != (x > 0.0) {
                changes += 1;
            }
        }
        prev = Some(x);
    }
    Ok(changes)
}
