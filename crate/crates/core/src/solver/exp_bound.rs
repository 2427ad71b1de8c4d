//! Upper bound for the critical-growth level in the plane, built from the
//! ground state of the pure power problem.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

use super::{minimize_sigma, SolveConfig, SolveResult, Status};

/// `max_{t∈[0,1]} Λ(t)` for `Λ(t) = (p-2)t²/(2p) - ξ t^{p-4}`, attained at
/// `t = ((p-2)/(p(p-4)ξ))^{1/(p-6)}`.
pub fn lambda_max(p: f64, xi: f64) -> f64 {
    let base = (p - 2.0) / (p * (p - 4.0) * xi);
    base.powf(2.0 / (p - 6.0)) * (p - 2.0) * (p - 6.0) / (2.0 * p * (p - 4.0))
}

/// The two lower bounds on `ξ` and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiStar {
    /// `(p-2)/(p(p-4)) [ζ₀(p-2)m*/(2π(p-4))]^{(p-6)/2}`.
    pub level_term: f64,
    /// `‖∇v̂‖² / (2∫|f(v̂)|^p)`, which makes `Υ(1) < 0`.
    pub shape_term: f64,
    pub value: f64,
}

pub fn xi_star(p: f64, zeta0: f64, m_star: f64, kinetic: f64, lp_integral: f64) -> XiStar {
    let level_term =
        (p - 2.0) / (p * (p - 4.0)) * (zeta0 * (p - 2.0) * m_star / (2.0 * PI * (p - 4.0))).powf(0.5 * (p - 6.0));
    let shape_term = kinetic / (2.0 * lp_integral);
    XiStar { level_term, shape_term, value: level_term.max(shape_term) }
}

/// `m*(a)` and the ground state `v̂_a` of `h(t) = |t|^{p-2}t` in the plane.
pub fn build_reference(p: f64, cfg: &SolveConfig) -> Result<SolveResult> {
    if cfg.dim != 2 {
        return Err(Error::Config(format!("the reference problem lives in N = 2, got N = {}", cfg.dim)));
    }
    if !(p > 6.0) {
        return Err(Error::Config(format!("the reference problem needs p > 6, got {p}")));
    }
    minimize_sigma(&Nonlinearity::power(p)?, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpBoundReport {
    pub a: f64,
    pub p: f64,
    pub zeta0: f64,
    pub xi: f64,
    pub m_star: f64,
    pub kinetic: f64,
    pub dual_kinetic: f64,
    /// `∫|f(v̂)|^p`.
    pub lp_integral: f64,
    /// `4p/(p-6) m*`, which must dominate `lp_integral`.
    pub lp_bound: f64,
    pub lp_slack: f64,
    pub xi_star: XiStar,
    pub lambda_max: f64,
    pub lambda_argmax: f64,
    /// `4p/(p-6) m* Λ_max`.
    pub bound: f64,
    /// `π / ζ₀`.
    pub threshold: f64,
    pub margin: f64,
    pub bound_below_threshold: bool,
    /// `max_t Υ(t)` on a log grid.
    pub upsilon_max: f64,
    pub upsilon_argmax: f64,
    /// Smallest `ξ` for which the bound falls below `π/ζ₀`.
    pub xi_for_threshold: f64,
}

/// `Υ(t) = t²/2 (K - D) + t⁴/2 D - ξ t^{p-2} ∫|f|^p` for the reference field.
pub fn upsilon(t: f64, kinetic: f64, dual_kinetic: f64, xi: f64, p: f64, lp_integral: f64) -> f64 {
    0.5 * t * t * (kinetic - dual_kinetic) + 0.5 * t.powi(4) * dual_kinetic - xi * t.powf(p - 2.0) * lp_integral
}

pub fn exp_level_bound(nl_exp: &Nonlinearity, reference: &SolveResult) -> Result<ExpBoundReport> {
    let (zeta0, xi, p) = match *nl_exp {
        Nonlinearity::ExpCriticalModel { zeta0, xi, p } => (zeta0, xi, p),
        _ => return Err(Error::Config(format!("expected the exponential model, got {}", nl_exp.name()))),
    };
    if reference.status != Status::Converged {
        return Err(Error::Precondition(format!(
            "reference ground state did not converge ({})",
            reference.status.as_str()
        )));
    }
    let bd = &reference.breakdown;
    let m_star = bd.psi;
    let lp_integral = p * bd.potential;
    let xs = xi_star(p, zeta0, m_star, bd.kinetic, lp_integral);
    if !(xi > xs.value) {
        return Err(Error::Precondition(format!("xi = {xi} does not exceed xi* = {}", xs.value)));
    }
    let lp_bound = 4.0 * p / (p - 6.0) * m_star;
    let lm = lambda_max(p, xi);
    let bound = lp_bound * lm;
    let threshold = PI / zeta0;
    let (mut upsilon_max, mut upsilon_argmax) = (0.0, 0.0);
    for k in 0..=4000 {
        let t = 10f64.powf(-4.0 + 1e-3 * k as f64);
        let u = upsilon(t, bd.kinetic, bd.dual_kinetic, xi, p, lp_integral);
        if u > upsilon_max {
            upsilon_max = u;
            upsilon_argmax = t;
        }
    }
    // Λ_max scales like ξ^{-2/(p-6)}
    let xi_for_threshold = xi * (bound / threshold).powf(0.5 * (p - 6.0));
    Ok(ExpBoundReport {
        a: reference.a,
        p,
        zeta0,
        xi,
        m_star,
        kinetic: bd.kinetic,
        dual_kinetic: bd.dual_kinetic,
        lp_integral,
        lp_bound,
        lp_slack: lp_bound - lp_integral,
        xi_star: xs,
        lambda_max: lm,
        lambda_argmax: ((p - 2.0) / (p * (p - 4.0) * xi)).powf(1.0 / (p - 6.0)),
        bound,
        threshold,
        margin: threshold - bound,
        bound_below_threshold: bound < threshold,
        upsilon_max,
        upsilon_argmax,
        xi_for_threshold,
    })
}
