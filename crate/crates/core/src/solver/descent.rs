//! Preconditioned nonlinear conjugate gradients on the mass sphere, optionally
//! intersected with the Pohozaev manifold `G = 0`.
//!
//! Gradients are taken in the `P = K_h + σW` metric and projected onto the
//! tangent space of the active constraints; iterates are pulled back by the
//! mass projection and, on the Pohozaev manifold, a few Newton steps on `G`
//! along the `P`-gradient of `G` kept tangent to the mass sphere.

use crate::error::{Error, Result};
use crate::functionals::DualState;
use crate::nonlinearity::Nonlinearity;
use crate::radial_field::RadialField;
use crate::scalings::{find_tv, mass_project, stretch};

use super::precond::{dot, H1Preconditioner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Mass,
    MassAndPohozaev,
}

#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    pub constraint: Constraint,
    pub a: f64,
    pub step0: f64,
    pub shrink: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub tol_grad: f64,
    pub tol_g: f64,
    pub floor: Option<f64>,
    /// Reject trial points whose kinetic energy reaches this value.
    pub kinetic_cap: Option<f64>,
    pub record_trajectory: bool,
    /// Lower bound for the mass weight of the preconditioner; the weight
    /// follows `|λ|` of the current iterate.
    pub precond_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStatus {
    Converged,
    MaxIters,
    Stalled,
    UnboundedBelow,
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub field: RadialField,
    pub status: DescentStatus,
    pub iterations: usize,
    pub grad_norm: f64,
    /// `(kinetic, psi)` at every evaluated point.
    pub trajectory: Vec<(f64, f64)>,
}

fn pin(mut x: Vec<f64>) -> Vec<f64> {
    if let Some(last) = x.last_mut() {
        *last = 0.0;
    }
    x
}

fn axpy(v: &[f64], tau: f64, d: &[f64]) -> Vec<f64> {
    v.iter().zip(d).map(|(a, b)| a + tau * b).collect()
}

/// Solves the (at most 2x2) Gram system `S c = rhs`.
fn gram_solve(s: &[[f64; 2]; 2], rhs: &[f64; 2], n: usize) -> [f64; 2] {
    if n == 1 {
        return [rhs[0] / s[0][0], 0.0];
    }
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if det.abs() <= 1e-300 {
        return [rhs[0] / s[0][0], 0.0];
    }
    [(rhs[0] * s[1][1] - rhs[1] * s[0][1]) / det, (s[0][0] * rhs[1] - s[1][0] * rhs[0]) / det]
}

struct Tangent {
    cons: Vec<Vec<f64>>,
    zc: Vec<Vec<f64>>,
    gram: [[f64; 2]; 2],
}

impl Tangent {
    fn new(cons: Vec<Vec<f64>>, pre: &H1Preconditioner) -> Self {
        let zc: Vec<Vec<f64>> = cons.iter().map(|c| pre.solve(c)).collect();
        let mut gram = [[0.0; 2]; 2];
        for i in 0..cons.len() {
            for j in 0..cons.len() {
                gram[i][j] = dot(&cons[i], &zc[j]);
            }
        }
        Tangent { cons, zc, gram }
    }

    /// `P`-orthogonal projection of `x` onto `{y : cᵢᵀ y = 0}`.
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let n = self.cons.len();
        let mut rhs = [0.0; 2];
        for i in 0..n {
            rhs[i] = dot(&self.cons[i], x);
        }
        let c = gram_solve(&self.gram, &rhs, n);
        let mut out = x.to_vec();
        for i in 0..n {
            for (o, z) in out.iter_mut().zip(&self.zc[i]) {
                *o -= c[i] * z;
            }
        }
        out
    }
}

/// Pulls `G` back to zero along directions tangent to the mass sphere.
pub fn polish_pohozaev(
    v: &RadialField,
    nl: &Nonlinearity,
    a: f64,
    tol: f64,
    pre: &H1Preconditioner,
) -> Result<RadialField> {
    let mut v = mass_project(v, a)?;
    for _ in 0..16 {
        let st = DualState::new(&v);
        let g = st.pohozaev_g(nl)?;
        let k = st.kinetic();
        if g.abs() <= tol * (1.0 + k) {
            return Ok(v);
        }
        let q = pin(st.pohozaev_gradient(nl)?);
        let m = pin(st.mass_gradient());
        let tangent = Tangent::new(vec![m], pre);
        let d = tangent.project(&pre.solve(&q));
        let slope = dot(&q, &d);
        if !(slope.abs() > 0.0) {
            break;
        }
        let mut step = -g / slope;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = v.with_values(pin(axpy(v.values(), step, &d)));
            if let Ok(trial) = trial {
                if let Ok(trial) = mass_project(&trial, a) {
                    let gt = DualState::new(&trial).pohozaev_g(nl);
                    if let Ok(gt) = gt {
                        if gt.abs() < g.abs() {
                            v = trial;
                            accepted = true;
                            break;
                        }
                    }
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let st = DualState::new(&v);
    let g = st.pohozaev_g(nl)?;
    if g.abs() <= tol * (1.0 + st.kinetic()) {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("Pohozaev retraction stalled at G = {g:e}")))
    }
}

/// Mass projection, then for the Pohozaev manifold the fiber stretch to
/// `t_v` followed by a Newton polish of `G`.
pub fn retract(
    w: &RadialField,
    nl: &Nonlinearity,
    constraint: Constraint,
    a: f64,
    tol_g: f64,
    pre: &H1Preconditioner,
) -> Result<RadialField> {
    let v = mass_project(w, a)?;
    match constraint {
        Constraint::Mass => Ok(v),
        Constraint::MassAndPohozaev => {
            let root = find_tv(&v, nl, 1.5, 1e-12)?;
            let v = if (root.t - 1.0).abs() > 1e-12 { mass_project(&stretch(&v, root.t)?, a)? } else { v };
            polish_pohozaev(&v, nl, a, 1e-3 * tol_g, pre)
        }
    }
}

/// Minimizes `Ψ` from `v0`, which must already satisfy the constraints.
pub fn descend(
    v0: RadialField,
    nl: &Nonlinearity,
    opts: &DescentOptions,
) -> Result<DescentOutcome> {
    let grid = v0.grid_arc().clone();
    let mut shift = opts.precond_shift;
    let mut pre = H1Preconditioner::new(&grid, shift);
    let mut v = v0;
    let mut trajectory = Vec::new();
    let mut tau = opts.step0;
    let mut prev: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None; // (r, z, d)
    let mut grad_norm = f64::INFINITY;
    let mut cap_streak = 0;
    for iter in 0..opts.max_outer {
        let st = DualState::new(&v);
        let psi = st.psi(nl)?;
        let kinetic = st.kinetic();
        if opts.record_trajectory && iter == 0 {
            trajectory.push((kinetic, psi));
        }
        if let Some(floor) = opts.floor {
            if psi < floor {
                return Ok(DescentOutcome {
                    field: v,
                    status: DescentStatus::UnboundedBelow,
                    iterations: iter,
                    grad_norm,
                    trajectory,
                });
            }
        }
        let lambda = (kinetic + st.dual_kinetic() - st.work(nl)?) / opts.a;
        let wanted = lambda.abs().max(opts.precond_shift);
        if wanted > 2.0 * shift || wanted < 0.5 * shift {
            shift = wanted;
            pre = H1Preconditioner::new(&grid, shift);
            prev = None;
        }
        let pre = &pre;
        let g = pin(st.energy_gradient(nl)?);
        let mut cons = vec![pin(st.mass_gradient())];
        let g_value = if opts.constraint == Constraint::MassAndPohozaev {
            cons.push(pin(st.pohozaev_gradient(nl)?));
            st.pohozaev_g(nl)?
        } else {
            0.0
        };
        let tangent = Tangent::new(cons, pre);
        let z = tangent.project(&pre.solve(&g));
        let n = tangent.cons.len();
        let mut rhs = [0.0; 2];
        for i in 0..n {
            rhs[i] = dot(&tangent.cons[i], &pre.solve(&g));
        }
        let coef = gram_solve(&tangent.gram, &rhs, n);
        let mut r = g.clone();
        for i in 0..n {
            for (ri, ci) in r.iter_mut().zip(&tangent.cons[i]) {
                *ri -= coef[i] * ci;
            }
        }
        let rz = dot(&r, &z).max(0.0);
        let v_norm = dot(v.values(), &pre.apply(v.values())).max(0.0).sqrt();
        grad_norm = rz.sqrt() / (1.0 + v_norm);
        let g_ok = g_value.abs() <= opts.tol_g * (1.0 + kinetic);
        if grad_norm <= opts.tol_grad && g_ok {
            return Ok(DescentOutcome {
                field: v,
                status: DescentStatus::Converged,
                iterations: iter,
                grad_norm,
                trajectory,
            });
        }
        // Polak-Ribiere+ direction, reset when it is not a descent direction
        let mut d: Vec<f64> = z.iter().map(|x| -x).collect();
        if let Some((r_old, z_old, d_old)) = &prev {
            let denom = dot(r_old, z_old);
            if denom > 0.0 {
                let num = dot(&r, &z) - dot(&r, z_old);
                let beta = (num / denom).max(0.0);
                if beta > 0.0 {
                    let carried = tangent.project(d_old);
                    let cand: Vec<f64> = d.iter().zip(&carried).map(|(a, b)| a + beta * b).collect();
                    if dot(&g, &cand) < 0.0 {
                        d = cand;
                    }
                }
            }
        }
        let mut accepted = None;
        let mut tried_reset = false;
        let mut slope = dot(&g, &d);
        // keep each trial within a fixed fraction of the current amplitude
        let v_max = v.max_abs();
        let trust = |d: &[f64]| {
            let d_max = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if d_max > 0.0 { 0.25 * v_max / d_max } else { f64::INFINITY }
        };
        let mut t = (tau * 2.0).min(trust(&d));
        let mut inner = 0;
        while inner < opts.max_inner {
            inner += 1;
            let trial = v
                .with_values(pin(axpy(v.values(), t, &d)))
                .and_then(|w| retract(&w, nl, opts.constraint, opts.a, opts.tol_g, pre));
            let trial = match trial {
                Ok(x) => x,
                Err(Error::Range(_))
                | Err(Error::Numeric(_))
                | Err(Error::Domain(_))
                | Err(Error::NoFiberRoot { .. })
                | Err(Error::FiberRootNotUnique { .. }) => {
                    t *= opts.shrink;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let ts = DualState::new(&trial);
            let trial_k = ts.kinetic();
            let trial_psi = match ts.psi(nl) {
                Ok(x) => x,
                Err(Error::Range(_)) => {
                    t *= opts.shrink;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if opts.record_trajectory {
                trajectory.push((trial_k, trial_psi));
            }
            if let Some(cap) = opts.kinetic_cap {
                if trial_k >= 0.999 * cap {
                    cap_streak += 1;
                    if cap_streak > opts.max_inner {
                        return Err(Error::CapSaturated { steps: cap_streak });
                    }
                    t *= opts.shrink;
                    continue;
                }
            }
            // on the Pohozaev manifold compare Lagrangian values, so that the
            // residual G left by the retraction does not masquerade as descent
            let merit_gap = if n == 2 { -coef[1] * (ts.pohozaev_g(nl)? - g_value) } else { 0.0 };
            if trial_psi + merit_gap <= psi + 1e-4 * t * slope {
                accepted = Some((trial, t));
                break;
            }
            // minimizer of the quadratic through psi, the slope and the trial
            let curvature = trial_psi + merit_gap - psi - t * slope;
            let t_quad = if curvature > 0.0 { -slope * t * t / (2.0 * curvature) } else { t * opts.shrink };
            t = t_quad.clamp(0.1 * t, opts.shrink.max(0.1) * t);
            if inner == opts.max_inner && !tried_reset && prev.is_some() {
                // retry once along the plain preconditioned gradient
                tried_reset = true;
                inner = 0;
                d = z.iter().map(|x| -x).collect();
                slope = dot(&g, &d);
                t = tau.min(trust(&d));
            }
        }
        match accepted {
            Some((next, t_ok)) => {
                cap_streak = 0;
                tau = t_ok;
                prev = Some((r, z, d));
                v = next;
            }
            None => {
                return Ok(DescentOutcome {
                    field: v,
                    status: DescentStatus::Stalled,
                    iterations: iter,
                    grad_norm,
                    trajectory,
                });
            }
        }
    }
    Ok(DescentOutcome {
        field: v,
        status: DescentStatus::MaxIters,
        iterations: opts.max_outer,
        grad_norm,
        trajectory,
    })
}
