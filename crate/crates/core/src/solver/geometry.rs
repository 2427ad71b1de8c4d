//! Local geometry of `Ψ` on the mass sphere for `h = |t|^{p-2}t + |t|^{10}t`
//! in dimension 3, and the local minimum `m₀(a)` below the kinetic cap.
//!
//! `ρ_a(t) = 1/2 - A a^{(6-p)/4} t^{(3p-10)/4} - B t²` bounds `Ψ(v) / K` from
//! below at `K = ‖∇v‖²`, with `A = C^p_{p,3}/p` and `B = 2/(3S³)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{dual_density, dual_field, gn_ratio, gn_ratio_l1, DualState};
use crate::nonlinearity::Nonlinearity;
use crate::radial_field::{RadialField, RadialGrid};
use crate::sampling::{random_fields, MixtureSpec};
use crate::scalings::mass_project;

use super::{minimize_on_sphere, SolveConfig, SolveResult, Status};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevGeometry {
    pub p: f64,
    pub a: f64,
    pub big_a: f64,
    pub big_b: f64,
    /// Sobolev constant, when the geometry was built from `(C_{p,3}, S)`.
    pub sobolev: Option<f64>,
    pub gn_constant: Option<f64>,
    /// Maximizer of `ρ_a` by golden-section search.
    pub t_star: f64,
    pub rho_max: f64,
    /// Root of the first-order condition with the `8B` denominator.
    pub t_star_foc: f64,
    pub k0: f64,
    pub a_tilde0: f64,
    /// `t*` at the mass `ã₀`, the kinetic cap for `m₀`.
    pub t_star0: f64,
}

impl SobolevGeometry {
    /// Geometry directly from `A` and `B`.
    pub fn from_constants(p: f64, a: f64, big_a: f64, big_b: f64) -> Result<Self> {
        if !(p > 2.0 && p < 10.0 / 3.0) {
            return Err(Error::Config(format!("p must lie in (2, 10/3), got {p}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("mass must be positive, got {a}")));
        }
        if !(big_a > 0.0 && big_b > 0.0 && big_a.is_finite() && big_b.is_finite()) {
            return Err(Error::Config(format!("A and B must be positive, got A = {big_a}, B = {big_b}")));
        }
        let rho = |t: f64| rho_value(p, a, big_a, big_b, t);
        let t_star = golden_max(&rho);
        let t_star_foc =
            (big_a * (10.0 - 3.0 * p) * a.powf((6.0 - p) / 4.0) / (8.0 * big_b)).powf(4.0 / (18.0 - 3.0 * p));
        let k0 = (big_a * (10.0 - 3.0 * p) / (8.0 * big_b)).powf((3.0 * p - 10.0) / (18.0 - 3.0 * p))
            * (big_a * (18.0 - 3.0 * p) / 8.0);
        let a_tilde0 = (1.0 / (2.0 * k0)).powf(1.5);
        let t_star0 = golden_max(&|t: f64| rho_value(p, a_tilde0, big_a, big_b, t));
        Ok(SobolevGeometry {
            p,
            a,
            big_a,
            big_b,
            sobolev: None,
            gn_constant: None,
            t_star,
            rho_max: rho(t_star),
            t_star_foc,
            k0,
            a_tilde0,
            t_star0,
        })
    }

    pub fn rho(&self, t: f64) -> f64 {
        rho_value(self.p, self.a, self.big_a, self.big_b, t)
    }

    pub fn rho_at_mass(&self, a: f64, t: f64) -> f64 {
        rho_value(self.p, a, self.big_a, self.big_b, t)
    }

    /// `1/2 - K₀ a^{2/3}`, the closed form of `max ρ_a`.
    pub fn rho_max_closed_form(&self) -> f64 {
        0.5 - self.k0 * self.a.powf(2.0 / 3.0)
    }

    /// Smallest `Ψ(v) - K ρ_a(K)` over the given fields after projection to
    /// mass `a`; nonnegative when the lower bound holds.
    pub fn lower_bound_margin(&self, fields: &[RadialField]) -> Result<f64> {
        let nl = Nonlinearity::power_sobolev(self.p, 1.0)?;
        let mut worst = f64::INFINITY;
        for v in fields {
            let v = mass_project(v, self.a)?;
            let st = DualState::new(&v);
            let k = st.kinetic();
            let psi = st.psi(&nl)?;
            worst = worst.min(psi - k * self.rho(k));
        }
        Ok(worst)
    }
}

fn rho_value(p: f64, a: f64, big_a: f64, big_b: f64, t: f64) -> f64 {
    0.5 - big_a * a.powf((6.0 - p) / 4.0) * t.powf((3.0 * p - 10.0) / 4.0) - big_b * t * t
}

/// Maximizer of a unimodal function on `(0, ∞)`: coarse scan in `ln t`, then
/// golden-section search until the bracket in `ln t` is below `1e-13`.
fn golden_max(f: &dyn Fn(f64) -> f64) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=480 {
        let s = -24.0 + 0.1 * k as f64;
        let val = f(s.exp());
        if val > best.0 {
            best = (val, s);
        }
    }
    let (mut lo, mut hi) = (best.1 - 0.1, best.1 + 0.1);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1.exp()), f(x2.exp()));
    while hi - lo > 1e-13 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2.exp());
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1.exp());
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// `A = C^p/p`, `B = 2/(3S³)`.
pub fn sobolev_geometry(p: f64, a: f64, c_p3: f64, s: f64) -> Result<SobolevGeometry> {
    if !(c_p3 > 0.0 && s > 0.0) {
        return Err(Error::Config(format!("constants must be positive, got C = {c_p3}, S = {s}")));
    }
    let mut g = SobolevGeometry::from_constants(p, a, c_p3.powf(p) / p, 2.0 / (3.0 * s.powi(3)))?;
    g.sobolev = Some(s);
    g.gn_constant = Some(c_p3);
    Ok(g)
}

/// Empirical Gagliardo-Nirenberg constant: a safety factor times the largest
/// `s`-th root of the ratio over random fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GnCalibration {
    pub dim: usize,
    pub s: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub safety: f64,
    pub constant: f64,
}

pub const GN_SAFETY: f64 = 1.05;

impl GnCalibration {
    pub fn run(dim: usize, s: f64, samples: usize, seed: u64) -> Result<Self> {
        Self::run_on(dim, s, samples, seed, |v| gn_ratio(v, s))
    }

    /// Calibration applied to `f(v)` instead of `v`.
    pub fn run_dual(dim: usize, s: f64, samples: usize, seed: u64) -> Result<Self> {
        Self::run_on(dim, s, samples, seed, |v| gn_ratio(&dual_field(v), s))
    }

    /// Calibration of the `L¹` form applied to `f(v)²`.
    pub fn run_l1(dim: usize, t: f64, samples: usize, seed: u64) -> Result<Self> {
        Self::run_on(dim, t, samples, seed, |v| gn_ratio_l1(&dual_density(v), t))
    }

    fn run_on(
        dim: usize,
        s: f64,
        samples: usize,
        seed: u64,
        ratio: impl Fn(&RadialField) -> Result<f64>,
    ) -> Result<Self> {
        let grid = Arc::new(RadialGrid::new(dim, 20.0, 2001)?);
        let mut max_ratio: f64 = 0.0;
        for v in random_fields(&grid, &calibration_mixture(), samples, seed) {
            max_ratio = max_ratio.max(ratio(&v)?);
        }
        Ok(GnCalibration {
            dim,
            s,
            samples,
            max_ratio,
            safety: GN_SAFETY,
            constant: GN_SAFETY * max_ratio.powf(1.0 / s),
        })
    }
}

/// Fields used for calibration and for fresh validation samples.
pub fn calibration_mixture() -> MixtureSpec {
    MixtureSpec { amplitude: 3.0, min_width: 0.3, max_width: 4.0, ..MixtureSpec::default() }
}

/// `m₀(a)`: descent for `h = |t|^{p-2}t + |t|^{10}t` over the mass sphere with
/// every trial of kinetic energy `≥ 0.999 t*₀` rejected.
pub fn local_minimize_m0(p: f64, cfg: &SolveConfig, geometry: &SobolevGeometry) -> Result<SolveResult> {
    cfg.validate()?;
    if cfg.dim != 3 {
        return Err(Error::Precondition(format!("the local minimum lives in N = 3, got N = {}", cfg.dim)));
    }
    if !(p > 2.0 && p < 10.0 / 3.0) {
        return Err(Error::Precondition(format!("p must lie in (2, 10/3), got {p}")));
    }
    if !(cfg.a < geometry.a_tilde0) {
        return Err(Error::Precondition(format!("mass {} is not below a~0 = {}", cfg.a, geometry.a_tilde0)));
    }
    let nl = Nonlinearity::power_sobolev(p, 1.0)?;
    let res = minimize_on_sphere(&nl, cfg, Some(geometry.t_star0))?;
    if res.status == Status::Converged && !(res.breakdown.psi < 0.0 && res.breakdown.kinetic < geometry.t_star0) {
        return Err(Error::Numeric(format!(
            "local minimum at psi = {:e}, kinetic = {:e} violates the cap geometry",
            res.breakdown.psi, res.breakdown.kinetic
        )));
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harness_units() {
        let g = SobolevGeometry::from_constants(3.0, 1.0, 1.0, 1.0).unwrap();
        // a flat maximum pins its location only to about sqrt(eps)
        assert!((g.t_star - 8f64.powf(-4.0 / 9.0)).abs() < 1e-7, "{}", g.t_star);
        assert!((g.t_star - g.t_star_foc).abs() < 1e-7);
        assert!((g.k0 - 1.41741).abs() < 1e-5);
        assert!((g.rho_max - g.rho_max_closed_form()).abs() < 1e-10);
        assert!((g.a_tilde0 - 0.20952).abs() < 1e-5);
        let at = SobolevGeometry::from_constants(3.0, g.a_tilde0, 1.0, 1.0).unwrap();
        assert!(at.rho_max.abs() < 1e-10);
    }

    #[test]
    fn rho_tends_to_minus_infinity() {
        let g = SobolevGeometry::from_constants(3.0, 0.5, 0.3, 0.2).unwrap();
        assert!(g.rho(1e-12) < -1e2 && g.rho(1e6) < -1e10);
        assert!(g.rho(g.t_star) >= g.rho(g.t_star * 1.001) && g.rho(g.t_star) >= g.rho(g.t_star / 1.001));
    }

    #[test]
    fn out_of_range_exponent_is_rejected() {
        assert!(SobolevGeometry::from_constants(3.5, 1.0, 1.0, 1.0).unwrap_err().is_config());
    }
}
