//! Scalar functionals of a field `v` through `u = f(v)`.
//!
//! With `φ = 2f²/(1+2f²)` the quantities used throughout are
//!
//! ```text
//! K = ∫|∇v|²,  D = ∫ φ |∇v|²,  Ψ = K/2 - ∫H(f(v)),
//! G = K + (N/2) D - (N/2) ∫[h(f)f - 2H(f)].
//! ```
//!
//! Gradient terms live on the staggered midpoints, where `φ` is the average
//! of its two nodal values. Fiber quantities `Ψ(v_t)` along the
//! mass-preserving stretch are evaluated from closed formulas over the
//! original field, so no resampling enters the `t`-dependence.

use serde::{Deserialize, Serialize};

use crate::dual_transform::DualMap;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::radial_field::RadialField;

/// Nodal and midpoint data derived from one field.
#[derive(Debug, Clone)]
pub struct DualState<'a> {
    pub field: &'a RadialField,
    /// `f(v_i)`.
    pub f: Vec<f64>,
    /// `f'(v_i)`.
    pub fp: Vec<f64>,
    /// Staggered gradient `g_m`.
    pub grad: Vec<f64>,
    /// `φ` averaged onto midpoints.
    pub phi_mid: Vec<f64>,
}

fn phi(s: f64) -> f64 {
    let s2 = 2.0 * s * s;
    s2 / (1.0 + s2)
}

impl<'a> DualState<'a> {
    pub fn new(field: &'a RadialField) -> Self {
        let map = DualMap::shared();
        let n = field.values().len();
        let mut f = Vec::with_capacity(n);
        let mut fp = Vec::with_capacity(n);
        for &v in field.values() {
            let (s, d) = map.f_and_prime(v);
            f.push(s);
            fp.push(d);
        }
        let grad = field.grid().gradient(field.values());
        let phi_mid = f.windows(2).map(|w| 0.5 * (phi(w[0]) + phi(w[1]))).collect();
        DualState { field, f, fp, grad, phi_mid }
    }

    pub fn dim(&self) -> usize {
        self.field.grid().dim()
    }

    pub fn weights(&self) -> &[f64] {
        self.field.grid().weights()
    }

    pub fn kinetic(&self) -> f64 {
        let c = self.field.grid().mid_weights();
        self.grad.iter().zip(c).map(|(g, c)| c * g * g).sum()
    }

    pub fn dual_kinetic(&self) -> f64 {
        let c = self.field.grid().mid_weights();
        self.grad.iter().zip(c).zip(&self.phi_mid).map(|((g, c), p)| c * p * g * g).sum()
    }

    pub fn mass(&self) -> f64 {
        self.weights().iter().zip(&self.f).map(|(w, s)| w * s * s).sum()
    }

    pub fn max_abs_f(&self) -> f64 {
        self.f.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    /// `∫ H(f(v))`.
    pub fn potential(&self, nl: &Nonlinearity) -> Result<f64> {
        nl.check_range(self.max_abs_f())?;
        Ok(self.weights().iter().zip(&self.f).map(|(w, &s)| w * nl.H(s)).sum())
    }

    /// `∫ h(f(v)) f(v)`.
    pub fn work(&self, nl: &Nonlinearity) -> Result<f64> {
        nl.check_range(self.max_abs_f())?;
        Ok(self.weights().iter().zip(&self.f).map(|(w, &s)| w * nl.h(s) * s).sum())
    }

    /// `∫ [h(f)f - 2H(f)]`.
    pub fn pohozaev_bracket(&self, nl: &Nonlinearity) -> Result<f64> {
        nl.check_range(self.max_abs_f())?;
        Ok(self
            .weights()
            .iter()
            .zip(&self.f)
            .map(|(w, &s)| {
                let (h, big_h) = nl.eval(s);
                w * (h * s - 2.0 * big_h)
            })
            .sum())
    }

    pub fn psi(&self, nl: &Nonlinearity) -> Result<f64> {
        Ok(0.5 * self.kinetic() - self.potential(nl)?)
    }

    pub fn pohozaev_g(&self, nl: &Nonlinearity) -> Result<f64> {
        let n = self.dim() as f64;
        Ok(self.kinetic() + 0.5 * n * self.dual_kinetic() - 0.5 * n * self.pohozaev_bracket(nl)?)
    }

    /// `(c_{i-1} g_{i-1} - c_i g_i) / h`, the gradient of `K/2`.
    fn half_kinetic_gradient(&self, weights_mid: impl Fn(usize) -> f64) -> Vec<f64> {
        let n = self.f.len();
        let c = self.field.grid().mid_weights();
        let inv_h = 1.0 / self.field.grid().spacing();
        let mut out = vec![0.0; n];
        for m in 0..n - 1 {
            let flux = c[m] * weights_mid(m) * self.grad[m] * inv_h;
            out[m] -= flux;
            out[m + 1] += flux;
        }
        out
    }

    /// `∂Ψ/∂v_i` of the discrete energy.
    pub fn energy_gradient(&self, nl: &Nonlinearity) -> Result<Vec<f64>> {
        nl.check_range(self.max_abs_f())?;
        let mut out = self.half_kinetic_gradient(|_| 1.0);
        for (i, o) in out.iter_mut().enumerate() {
            *o -= self.weights()[i] * nl.h(self.f[i]) * self.fp[i];
        }
        Ok(out)
    }

    /// `∂(mass)/∂v_i = 2 w_i f f'`.
    pub fn mass_gradient(&self) -> Vec<f64> {
        self.weights().iter().zip(&self.f).zip(&self.fp).map(|((w, s), d)| 2.0 * w * s * d).collect()
    }

    /// `∂D/∂v_i`.
    pub fn dual_kinetic_gradient(&self) -> Vec<f64> {
        let mut out = self.half_kinetic_gradient(|m| self.phi_mid[m]);
        out.iter_mut().for_each(|o| *o *= 2.0);
        let c = self.field.grid().mid_weights();
        for (m, (&g, &cm)) in self.grad.iter().zip(c).enumerate() {
            let e = 0.5 * cm * g * g;
            out[m] += e * dphi_dv(self.f[m], self.fp[m]);
            out[m + 1] += e * dphi_dv(self.f[m + 1], self.fp[m + 1]);
        }
        out
    }

    /// `∂G/∂v_i`.
    pub fn pohozaev_gradient(&self, nl: &Nonlinearity) -> Result<Vec<f64>> {
        nl.check_range(self.max_abs_f())?;
        let half_n = 0.5 * self.dim() as f64;
        let k = self.half_kinetic_gradient(|_| 1.0);
        let d = self.dual_kinetic_gradient();
        Ok((0..self.f.len())
            .map(|i| {
                let s = self.f[i];
                let (h, _) = nl.eval(s);
                let bracket = (nl.h_prime(s) * s - h) * self.fp[i];
                2.0 * k[i] + half_n * d[i] - half_n * self.weights()[i] * bracket
            })
            .collect())
    }
}

/// `dφ/dv = 4 f f' / (1 + 2f²)²`.
fn dphi_dv(s: f64, fp: f64) -> f64 {
    let q = 1.0 + 2.0 * s * s;
    4.0 * s * fp / (q * q)
}

/// `∫ f(v)²`.
pub fn mass(v: &RadialField) -> f64 {
    let map = DualMap::shared();
    v.grid().weights().iter().zip(v.values()).map(|(w, &x)| {
        let s = map.f(x);
        w * s * s
    }).sum()
}

pub fn kinetic(v: &RadialField) -> f64 {
    v.kinetic()
}

pub fn dual_kinetic(v: &RadialField) -> f64 {
    DualState::new(v).dual_kinetic()
}

pub fn potential(v: &RadialField, nl: &Nonlinearity) -> Result<f64> {
    DualState::new(v).potential(nl)
}

pub fn psi(v: &RadialField, nl: &Nonlinearity) -> Result<f64> {
    DualState::new(v).psi(nl)
}

#[allow(non_snake_case)]
pub fn pohozaev_G(v: &RadialField, nl: &Nonlinearity) -> Result<f64> {
    DualState::new(v).pohozaev_g(nl)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub mass: f64,
    pub kinetic: f64,
    pub dual_kinetic: f64,
    pub potential: f64,
    pub psi: f64,
    #[serde(rename = "G")]
    pub g: f64,
    /// `None` when the mass is zero.
    pub lambda: Option<f64>,
}

impl EnergyBreakdown {
    /// `‖∇f(v)‖² = K - D`.
    pub fn grad_f_squared(&self) -> f64 {
        self.kinetic - self.dual_kinetic
    }
}

/// All scalar functionals of `v`; `λ` uses the mass `a` (the measured mass
/// when `a` is `None`).
pub fn breakdown(v: &RadialField, nl: &Nonlinearity, a: Option<f64>) -> Result<EnergyBreakdown> {
    let st = DualState::new(v);
    breakdown_of(&st, nl, a)
}

pub fn breakdown_of(st: &DualState<'_>, nl: &Nonlinearity, a: Option<f64>) -> Result<EnergyBreakdown> {
    let mass = st.mass();
    let kinetic = st.kinetic();
    let dual_kinetic = st.dual_kinetic();
    let potential = st.potential(nl)?;
    let g = st.pohozaev_g(nl)?;
    let a = a.unwrap_or(mass);
    let lambda = if a > 0.0 { Some((kinetic + dual_kinetic - st.work(nl)?) / a) } else { None };
    Ok(EnergyBreakdown {
        mass,
        kinetic,
        dual_kinetic,
        potential,
        psi: 0.5 * kinetic - potential,
        g,
        lambda,
    })
}

/// `λ = [K + D - ∫h(f)f] / a`, the multiplier obtained by testing the
/// Euler-Lagrange equation with `f(v)/f'(v)`.
pub fn lagrange_lambda(v: &RadialField, nl: &Nonlinearity, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("multiplier needs positive mass, got {a}")));
    }
    let st = DualState::new(v);
    Ok((st.kinetic() + st.dual_kinetic() - st.work(nl)?) / a)
}

/// `((N-2)/2) K - (N/2) λ a - N ∫H`, evaluated with the measured mass.
pub fn pohozaev_residual(v: &RadialField, nl: &Nonlinearity, lambda: f64) -> Result<f64> {
    let st = DualState::new(v);
    let n = st.dim() as f64;
    Ok(0.5 * (n - 2.0) * st.kinetic() - 0.5 * n * lambda * st.mass() - n * st.potential(nl)?)
}

/// Fiber map `t ↦ Ψ(v_t)` for `v_t = f^{-1}(t^{N/2} f(v(t·)))`, from
/// precomputed integrals of `v`.
#[derive(Debug, Clone)]
pub struct FiberProfile {
    dim: usize,
    nl: Nonlinearity,
    kinetic: f64,
    dual_kinetic: f64,
    psi: f64,
    g: f64,
    weights: Vec<f64>,
    f: Vec<f64>,
    max_f: f64,
    /// `c_m g_m²` and `φ̄_m`.
    mid_energy: Vec<f64>,
    phi_mid: Vec<f64>,
}

impl FiberProfile {
    pub fn new(v: &RadialField, nl: &Nonlinearity) -> Result<Self> {
        let st = DualState::new(v);
        Self::from_state(&st, nl)
    }

    pub fn from_state(st: &DualState<'_>, nl: &Nonlinearity) -> Result<Self> {
        let c = st.field.grid().mid_weights();
        Ok(FiberProfile {
            dim: st.dim(),
            nl: nl.clone(),
            kinetic: st.kinetic(),
            dual_kinetic: st.dual_kinetic(),
            psi: st.psi(nl)?,
            g: st.pohozaev_g(nl)?,
            weights: st.weights().to_vec(),
            f: st.f.clone(),
            max_f: st.max_abs_f(),
            mid_energy: st.grad.iter().zip(c).map(|(g, c)| c * g * g).collect(),
            phi_mid: st.phi_mid.clone(),
        })
    }

    pub fn kinetic(&self) -> f64 {
        self.kinetic
    }

    pub fn dual_kinetic(&self) -> f64 {
        self.dual_kinetic
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!("fiber parameter must be positive, got {t}")));
        }
        self.nl.check_range(t.powf(0.5 * self.dim as f64) * self.max_f)
    }

    /// `∫|∇v_t|² = t² [K + (t^N - 1) D]`.
    pub fn kinetic_at(&self, t: f64) -> f64 {
        let tn = t.powi(self.dim as i32);
        t * t * (self.kinetic + (tn - 1.0) * self.dual_kinetic)
    }

    /// `t^{-N} ∫ H(t^{N/2} f)`.
    pub fn potential_at(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let n = self.dim as f64;
        let scale = t.powf(0.5 * n);
        let sum: f64 = self.weights.iter().zip(&self.f).map(|(w, &s)| w * self.nl.H(scale * s)).sum();
        Ok(sum / t.powf(n))
    }

    pub fn fiber_psi(&self, t: f64) -> Result<f64> {
        if t == 1.0 {
            return Ok(self.psi);
        }
        Ok(0.5 * self.kinetic_at(t) - self.potential_at(t)?)
    }

    /// `dΨ(v_t)/dt = G(v_t)/t`.
    pub fn fiber_dpsi(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        if t == 1.0 {
            return Ok(self.g);
        }
        let n = self.dim as f64;
        let tn = t.powi(self.dim as i32);
        let scale = t.powf(0.5 * n);
        let bracket: f64 = self
            .weights
            .iter()
            .zip(&self.f)
            .map(|(w, &s)| {
                let y = scale * s;
                let (h, big_h) = self.nl.eval(y);
                w * (h * y - 2.0 * big_h)
            })
            .sum();
        Ok(t * (self.kinetic + (tn - 1.0) * self.dual_kinetic)
            + 0.5 * n * tn * t * self.dual_kinetic
            - 0.5 * n * bracket / (tn * t))
    }

    /// `A(t, v)`: kinetic part of the splitting, nonnegative for every `t`.
    #[allow(non_snake_case)]
    pub fn surplus_A(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let n = self.dim as f64;
        let tn = t.powi(self.dim as i32);
        let c = (1.0 - tn * t * t) / (n + 2.0);
        Ok(0.5
            * self
                .mid_energy
                .iter()
                .zip(&self.phi_mid)
                .map(|(e, &p)| e * ((1.0 - t * t * (1.0 + (tn - 1.0) * p)) - c * (2.0 + n * p)))
                .sum::<f64>())
    }

    /// `B(t, v)`: potential part of the splitting, nonnegative when the
    /// monotonicity hypothesis on `(h t - 2H)/|t|^{3+4/N} t` holds.
    #[allow(non_snake_case)]
    pub fn surplus_B(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let n = self.dim as f64;
        let tn = t.powi(self.dim as i32);
        let scale = t.powf(0.5 * n);
        let c = 0.5 * n * (1.0 - tn * t * t) / (n + 2.0);
        Ok(self
            .weights
            .iter()
            .zip(&self.f)
            .map(|(w, &s)| {
                let (h, big_h) = self.nl.eval(s);
                w * (-big_h + self.nl.H(scale * s) / tn + c * (h * s - 2.0 * big_h))
            })
            .sum())
    }

    /// `|Ψ(v) - [Ψ(v_t) + (1-t^{N+2})/(N+2) G(v) + A(t,v) + B(t,v)]|`.
    pub fn splitting_residual(&self, t: f64) -> Result<f64> {
        let n = self.dim as f64;
        let c = (1.0 - t.powi(self.dim as i32 + 2)) / (n + 2.0);
        let rhs = self.fiber_psi(t)? + c * self.g + self.surplus_A(t)? + self.surplus_B(t)?;
        Ok((self.psi - rhs).abs())
    }
}

pub fn fiber_psi(v: &RadialField, nl: &Nonlinearity, t: f64) -> Result<f64> {
    FiberProfile::new(v, nl)?.fiber_psi(t)
}

pub fn fiber_dpsi(v: &RadialField, nl: &Nonlinearity, t: f64) -> Result<f64> {
    FiberProfile::new(v, nl)?.fiber_dpsi(t)
}

#[allow(non_snake_case)]
pub fn surplus_A(v: &RadialField, nl: &Nonlinearity, t: f64) -> Result<f64> {
    FiberProfile::new(v, nl)?.surplus_A(t)
}

#[allow(non_snake_case)]
pub fn surplus_B(v: &RadialField, nl: &Nonlinearity, t: f64) -> Result<f64> {
    FiberProfile::new(v, nl)?.surplus_B(t)
}

pub fn splitting_residual(v: &RadialField, nl: &Nonlinearity, t: f64) -> Result<f64> {
    FiberProfile::new(v, nl)?.splitting_residual(t)
}

/// The recombination used to rule out solutions with `λ < 0` when
/// `μ₁ ≥ 12` in dimension 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Recombination {
    /// `((N-2)/(2N) - 2/μ₁) K + (1/μ₁)‖∇f(v)‖² - (1/2 - 1/μ₁) λ a - (1/μ₁) ∫[μ₁H - hf]`.
    pub value: f64,
    /// `-G(v)/N`, which the combination equals identically.
    pub expected: f64,
    /// `|value - expected| / (1 + K + |λ a| + ∫|H| + ∫|hf|)`.
    pub relative_residual: f64,
    /// `max_i [μ₁ H(f_i) - h(f_i) f_i]`, nonpositive when `μ₁ H ≤ h t`.
    pub max_pointwise_gap: f64,
}

pub fn nonexistence_recombination(v: &RadialField, nl: &Nonlinearity, mu1: f64) -> Result<Recombination> {
    let st = DualState::new(v);
    let n = st.dim() as f64;
    let a = st.mass();
    if !(a > 0.0) {
        return Err(Error::Domain("recombination needs a nonzero field".into()));
    }
    let k = st.kinetic();
    let d = st.dual_kinetic();
    let pot = st.potential(nl)?;
    let work = st.work(nl)?;
    let lambda = (k + d - work) / a;
    let value = ((n - 2.0) / (2.0 * n) - 2.0 / mu1) * k + (k - d) / mu1
        - (0.5 - 1.0 / mu1) * lambda * a
        - (mu1 * pot - work) / mu1;
    let expected = -st.pohozaev_g(nl)? / n;
    let scale = 1.0 + k + (lambda * a).abs() + pot.abs() + work.abs();
    let max_pointwise_gap = st
        .f
        .iter()
        .map(|&s| {
            let (h, big_h) = nl.eval(s);
            mu1 * big_h - h * s
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Recombination {
        value,
        expected,
        relative_residual: (value - expected).abs() / scale,
        max_pointwise_gap,
    })
}

fn lp_norm_pow(u: &RadialField, s: f64) -> f64 {
    u.grid().weights().iter().zip(u.values()).map(|(w, x)| w * x.abs().powf(s)).sum()
}

fn critical_exponent_bound(dim: usize) -> f64 {
    if dim == 2 {
        f64::INFINITY
    } else {
        2.0 * dim as f64 / (dim as f64 - 2.0)
    }
}

/// `‖u‖_s^s / (‖u‖₂^{(2s-N(s-2))/2} ‖∇u‖₂^{N(s-2)/2})`, the quantity bounded
/// by `C^s` in the Gagliardo-Nirenberg inequality. Zero for `u = 0`.
pub fn gn_ratio(u: &RadialField, s: f64) -> Result<f64> {
    let n = u.grid().dim() as f64;
    if !(s > 2.0 && s < critical_exponent_bound(u.grid().dim())) {
        return Err(Error::Domain(format!("exponent s = {s} outside (2, 2*)")));
    }
    let lhs = lp_norm_pow(u, s);
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let l2 = u.l2_squared();
    let k = u.kinetic();
    Ok(lhs / (l2.powf((2.0 * s - n * (s - 2.0)) / 4.0) * k.powf(n * (s - 2.0) / 4.0)))
}

/// `C^s ‖u‖₂^{...} ‖∇u‖₂^{...} - ‖u‖_s^s`.
pub fn gn_check(u: &RadialField, s: f64, c: f64) -> Result<f64> {
    let n = u.grid().dim() as f64;
    gn_ratio(u, s)?;
    let l2 = u.l2_squared();
    let k = u.kinetic();
    Ok(c.powf(s) * l2.powf((2.0 * s - n * (s - 2.0)) / 4.0) * k.powf(n * (s - 2.0) / 4.0)
        - lp_norm_pow(u, s))
}

fn l1_exponents(n: f64, t: f64) -> (f64, f64) {
    ((4.0 * n - t * (n - 2.0)) / (2.0 * (n + 2.0)), n * (t - 2.0) / (2.0 * (n + 2.0)))
}

/// `∫|u|^{t/2} / ((∫|u|)^{(4N-t(N-2))/(2(N+2))} (∫|∇u|²)^{N(t-2)/(2(N+2))})`.
pub fn gn_ratio_l1(u: &RadialField, t: f64) -> Result<f64> {
    let n = u.grid().dim() as f64;
    if !(t > 2.0 && t < 2.0 * critical_exponent_bound(u.grid().dim())) {
        return Err(Error::Domain(format!("exponent t = {t} outside (2, 2*2*)")));
    }
    let lhs = lp_norm_pow(u, 0.5 * t);
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let (e1, e2) = l1_exponents(n, t);
    Ok(lhs / (lp_norm_pow(u, 1.0).powf(e1) * u.kinetic().powf(e2)))
}

/// `C^t (∫|u|)^{...} (∫|∇u|²)^{...} - ∫|u|^{t/2}`.
pub fn gn_check_l1(u: &RadialField, t: f64, c: f64) -> Result<f64> {
    let n = u.grid().dim() as f64;
    gn_ratio_l1(u, t)?;
    let (e1, e2) = l1_exponents(n, t);
    Ok(c.powf(t) * lp_norm_pow(u, 1.0).powf(e1) * u.kinetic().powf(e2) - lp_norm_pow(u, 0.5 * t))
}

/// The field `f(v)²`, to which the `L¹` inequality is applied.
pub fn dual_density(v: &RadialField) -> RadialField {
    let map = DualMap::shared();
    let values = v.values().iter().map(|&x| map.f(x).powi(2)).collect();
    v.with_values(values).expect("dual density is finite")
}

/// The field `f(v)`.
pub fn dual_field(v: &RadialField) -> RadialField {
    v.with_values(DualMap::shared().apply(v.values())).expect("dual field is finite")
}

/// `∫ (e^{βu²} - 1)` in dimension 2.
pub fn tm_integral(u: &RadialField, beta: f64) -> Result<f64> {
    if u.grid().dim() != 2 {
        return Err(Error::Domain("the exponential integral is defined on N = 2 grids".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let peak = beta * u.max_abs().powi(2);
    if peak > crate::nonlinearity::EXP_CAP {
        return Err(Error::Range(format!("beta u^2 reaches {peak:e}, beyond the exponential cap")));
    }
    Ok(u.grid().weights().iter().zip(u.values()).map(|(w, x)| w * (beta * x * x).exp_m1()).sum())
}

/// Sobolev constant `S = ‖∇U‖₂² / ‖U‖₆²` in dimension 3 for the profile
/// `U = (1 + r²)^{-1/2}`, computed by Simpson's rule after `r = tan θ`:
/// `∫ r⁴(1+r²)^{-3} dr = ∫ sin⁴θ dθ` and `∫ r²(1+r²)^{-3} dr = ∫ sin²θ cos²θ dθ`.
pub fn talenti_sobolev_constant(panels: usize) -> f64 {
    let n = panels.max(2) & !1;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        let mut s = f(0.0) + f(n as f64 * h);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    };
    let omega = 4.0 * std::f64::consts::PI;
    let grad = omega * simpson(&|x: f64| x.sin().powi(4));
    let l6 = omega * simpson(&|x: f64| (x.sin() * x.cos()).powi(2));
    grad / l6.powf(1.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::CustomNonlinearity;
    use crate::radial_field::RadialGrid;
    use crate::sampling::{random_fields, MixtureSpec};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(dim: usize, r: f64, m: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(dim, r, m).unwrap())
    }

    fn p7() -> Nonlinearity {
        Nonlinearity::power(7.0).unwrap()
    }

    fn zero_h() -> Nonlinearity {
        Nonlinearity::Custom(CustomNonlinearity::new("zero", |_| 0.0, |_| 0.0))
    }

    #[test]
    fn mass_examples() {
        let g = grid(2, 20.0, 2001);
        assert_eq!(mass(&RadialField::zeros(g.clone())), 0.0);
        let v = RadialField::gaussian(g, 1.0, 1.0).unwrap();
        let neg = v.with_values(v.values().iter().map(|x| -x).collect()).unwrap();
        assert_eq!(mass(&v), mass(&neg));
        let fine = RadialField::gaussian(grid(2, 20.0, 20001), 1.0, 1.0).unwrap();
        let rel = (mass(&v) - mass(&fine)).abs() / mass(&fine);
        assert!(mass(&v) > 0.0 && rel < 1e-4, "rel {rel}");
    }

    #[test]
    fn psi_examples() {
        let g = grid(2, 10.0, 501);
        assert_eq!(psi(&RadialField::zeros(g.clone()), &p7()).unwrap(), 0.0);
        let v = RadialField::gaussian(g, 0.8, 1.2).unwrap();
        assert_eq!(psi(&v, &zero_h()).unwrap(), 0.5 * v.kinetic());
        let doubled = Nonlinearity::Custom(CustomNonlinearity::new(
            "2 p7",
            |t| 2.0 * t.abs().powi(5) * t,
            |t| 2.0 * t.powi(7).abs() / 7.0,
        ));
        assert!(psi(&v, &doubled).unwrap() < psi(&v, &p7()).unwrap());
        let b = breakdown(&v, &p7(), None).unwrap();
        assert_eq!(b.psi, 0.5 * b.kinetic - b.potential);
        assert!(b.dual_kinetic >= 0.0 && b.dual_kinetic < b.kinetic);
    }

    #[test]
    fn pohozaev_examples() {
        let g = grid(2, 10.0, 501);
        assert_eq!(pohozaev_G(&RadialField::zeros(g.clone()), &p7()).unwrap(), 0.0);
        let v = RadialField::gaussian(g, 0.8, 1.2).unwrap();
        let quad = Nonlinearity::Custom(CustomNonlinearity::new("quad", |t| t, |t| 0.5 * t * t));
        let st = DualState::new(&v);
        let expect = st.kinetic() + st.dual_kinetic();
        assert!((pohozaev_G(&v, &quad).unwrap() - expect).abs() < 1e-13 * expect);
        let g0 = pohozaev_G(&v, &p7()).unwrap();
        let d1 = fiber_dpsi(&v, &p7(), 1.0).unwrap();
        assert!((g0 - d1).abs() <= 1e-10 * g0.abs());
    }

    #[test]
    fn fiber_examples() {
        let g = grid(2, 20.0, 2001);
        let v = RadialField::gaussian(g.clone(), 1.0, 1.0).unwrap();
        let p3 = Nonlinearity::power(3.0).unwrap();
        let prof = FiberProfile::new(&v, &p3).unwrap();
        assert_eq!(prof.fiber_psi(1.0).unwrap(), psi(&v, &p3).unwrap());
        // leading behaviour is O(t^{N(p-2)/2}) = O(t)
        let small: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&t| prof.fiber_psi(t).unwrap().abs()).collect();
        assert!(small[0] > small[1] && small[1] > small[2]);
        assert!(small[2] <= 1e-4 * prof.psi().abs());

        // a concentrated unit-mass Gaussian, whose fiber peak lies below t = 5
        let narrow = RadialField::gaussian(grid(2, 2.0, 2001), 1.0, 0.05).unwrap();
        let unit = crate::scalings::mass_project(&narrow, 1.0).unwrap();
        let prof = FiberProfile::new(&unit, &p7()).unwrap();
        let (a, b) = (prof.fiber_psi(10.0).unwrap(), prof.fiber_psi(5.0).unwrap());
        assert!(a < b && b < 0.0, "{a} {b}");

        let prof = FiberProfile::new(&v, &p7()).unwrap();
        let eps = 1e-5;
        let fd = (prof.fiber_psi(0.7 + eps).unwrap() - prof.fiber_psi(0.7 - eps).unwrap()) / (2.0 * eps);
        let d = prof.fiber_dpsi(0.7).unwrap();
        assert!((fd - d).abs() <= 1e-5 * d.abs(), "{fd} {d}");

        let zero = FiberProfile::new(&RadialField::zeros(g), &p7()).unwrap();
        assert_eq!(zero.fiber_dpsi(2.0).unwrap(), 0.0);
    }

    #[test]
    fn surplus_terms_vanish_at_one_and_are_nonnegative() {
        let g = grid(2, 15.0, 1201);
        for v in random_fields(&g, &MixtureSpec::default(), 8, 11) {
            let prof = FiberProfile::new(&v, &p7()).unwrap();
            assert!(prof.surplus_A(1.0).unwrap().abs() <= 1e-12);
            assert!(prof.surplus_B(1.0).unwrap().abs() <= 1e-12);
            for t in [0.25, 0.5, 2.0, 4.0] {
                let floor = -1e-10 * (1.0 + prof.kinetic());
                assert!(prof.surplus_A(t).unwrap() >= floor);
                assert!(prof.surplus_B(t).unwrap() >= floor);
                let res = prof.splitting_residual(t).unwrap();
                assert!(res <= 1e-8 * (1.0 + prof.psi().abs()), "t {t} res {res}");
            }
            assert!(prof.splitting_residual(1.0).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let g = grid(3, 6.0, 61);
        let v = crate::sampling::gaussian_mixture(&g, &[(1.3, 1.0), (-0.4, 2.0)]);
        let nl = Nonlinearity::power(6.0).unwrap();
        let st = DualState::new(&v);
        let ge = st.energy_gradient(&nl).unwrap();
        let gm = st.mass_gradient();
        let gg = st.pohozaev_gradient(&nl).unwrap();
        let gd = st.dual_kinetic_gradient();
        let eps = 1e-6;
        for i in [0, 1, 7, 20, 45, 59] {
            let bump = |d: f64| {
                let mut x = v.values().to_vec();
                x[i] += d;
                v.with_values(x).unwrap()
            };
            let (p, m) = (bump(eps), bump(-eps));
            let (sp, sm) = (DualState::new(&p), DualState::new(&m));
            let check = |fd: f64, an: f64, what: &str| {
                assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "{what} i={i} fd={fd} an={an}");
            };
            check((sp.psi(&nl).unwrap() - sm.psi(&nl).unwrap()) / (2.0 * eps), ge[i], "psi");
            check((sp.mass() - sm.mass()) / (2.0 * eps), gm[i], "mass");
            check((sp.dual_kinetic() - sm.dual_kinetic()) / (2.0 * eps), gd[i], "D");
            check((sp.pohozaev_g(&nl).unwrap() - sm.pohozaev_g(&nl).unwrap()) / (2.0 * eps), gg[i], "G");
        }
    }

    #[test]
    fn lambda_examples() {
        let g = grid(2, 10.0, 501);
        let v = RadialField::gaussian(g.clone(), 0.9, 1.1).unwrap();
        let a = mass(&v);
        let st = DualState::new(&v);
        let l0 = lagrange_lambda(&v, &zero_h(), a).unwrap();
        assert!((l0 - (st.kinetic() + st.dual_kinetic()) / a).abs() < 1e-14 * l0);
        let doubled = Nonlinearity::Custom(CustomNonlinearity::new(
            "2 p7",
            |t| 2.0 * t.abs().powi(5) * t,
            |t| 2.0 * t.powi(7).abs() / 7.0,
        ));
        let l1 = lagrange_lambda(&v, &p7(), a).unwrap();
        let l2 = lagrange_lambda(&v, &doubled, a).unwrap();
        let drop = st.work(&p7()).unwrap() / a;
        assert!((l1 - l2 - drop).abs() < 1e-12 * (1.0 + l1.abs()));
        assert!(lagrange_lambda(&v, &p7(), 0.0).is_err());
    }

    #[test]
    fn pohozaev_residual_examples() {
        let g = grid(2, 10.0, 501);
        assert_eq!(pohozaev_residual(&RadialField::zeros(g.clone()), &p7(), 3.0).unwrap(), 0.0);
        let v = RadialField::gaussian(g, 0.9, 1.1).unwrap();
        let lam = lagrange_lambda(&v, &p7(), mass(&v)).unwrap();
        let res = pohozaev_residual(&v, &p7(), lam).unwrap();
        let gv = pohozaev_G(&v, &p7()).unwrap();
        // with the tested multiplier the residual is exactly -G
        assert!((res + gv).abs() < 1e-12 * (1.0 + gv.abs()));
        let st = DualState::new(&v);
        let direct = -lam * st.mass() - 2.0 * st.potential(&p7()).unwrap();
        assert!((res - direct).abs() < 1e-14 * (1.0 + res.abs()));
    }

    #[test]
    fn recombination_identity() {
        let g = grid(3, 10.0, 401);
        let nl = Nonlinearity::power(12.0).unwrap();
        for v in random_fields(&g, &MixtureSpec::default(), 10, 3) {
            let r = nonexistence_recombination(&v, &nl, 12.0).unwrap();
            assert!(r.relative_residual <= 1e-12, "{r:?}");
            assert!(r.max_pointwise_gap <= 1e-12);
        }
    }

    #[test]
    fn gn_examples() {
        let g = grid(2, 20.0, 1001);
        let z = RadialField::zeros(g.clone());
        assert_eq!(gn_check(&z, 4.0, 1.0).unwrap(), 0.0);
        let v = RadialField::gaussian(g.clone(), 1.0, 1.0).unwrap();
        // Gaussian in 2-D: ‖u‖₄⁴ = π/4, ‖u‖₂² = π/2, ‖∇u‖² = π, so ratio = 1/(2π)
        assert!((gn_ratio(&v, 4.0).unwrap() - 0.5 / PI).abs() < 1e-4);
        let c = (1.05 * gn_ratio(&v, 4.0).unwrap()).powf(0.25);
        let m1 = gn_check(&v, 4.0, c).unwrap();
        let v3 = v.with_values(v.values().iter().map(|x| 3.0 * x).collect()).unwrap();
        let m3 = gn_check(&v3, 4.0, c).unwrap();
        assert!(m1 > 0.0 && (m3 / m1 - 81.0).abs() < 1e-9);
        assert!(gn_check(&v, 2.0, c).is_err());
        let g3 = grid(3, 10.0, 201);
        assert!(gn_ratio(&RadialField::gaussian(g3, 1.0, 1.0).unwrap(), 6.0).is_err());
        let u = dual_density(&v);
        assert!(gn_ratio_l1(&u, 4.0).unwrap() > 0.0);
    }

    #[test]
    fn tm_examples() {
        let g = grid(2, 20.0, 1001);
        assert_eq!(tm_integral(&RadialField::zeros(g.clone()), 1.0).unwrap(), 0.0);
        let v = RadialField::gaussian(g.clone(), 1.0, 1.0).unwrap();
        let val = tm_integral(&v, 4.0 * PI).unwrap();
        assert!(val.is_finite() && val > 0.0);
        // β = 1: ∫(e^{e^{-2r²}} - 1) = (π/2) Σ 1/(k·k!)
        let series: f64 = (1..30).map(|k| 1.0 / (k as f64 * (1..=k).map(|j| j as f64).product::<f64>())).sum();
        assert!((tm_integral(&v, 1.0).unwrap() - 0.5 * PI * series).abs() < 1e-6);
        let g3 = grid(3, 5.0, 101);
        assert!(tm_integral(&RadialField::zeros(g3), 1.0).is_err());
    }

    #[test]
    fn talenti_constant() {
        let s = talenti_sobolev_constant(2000);
        assert!((s - 3.0 * (PI / 2.0).powf(4.0 / 3.0)).abs() < 1e-12);
    }
}
