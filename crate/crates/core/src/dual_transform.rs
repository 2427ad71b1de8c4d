//! The dual change of variables `u = f(v)`.
//!
//! `f` solves `f'(t) = 1 / sqrt(1 + 2 f(t)^2)` with `f(0) = 0` and is odd.
//! Its inverse has the closed form
//!
//! ```text
//! f^{-1}(s) = s sqrt(1 + 2 s^2) / 2 + asinh(sqrt(2) s) / (2 sqrt(2))
//! ```
//!
//! (the antiderivative of `sqrt(1 + 2 s^2)`), so `f` itself is evaluated by
//! a safeguarded Newton iteration on that expression. A monotone table of
//! samples on `[0, t_max]` supplies the starting point; outside the table the
//! asymptotic upper bound `2^{1/4} sqrt(t)` is used instead, so evaluation
//! never fails for finite input.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;
/// `2^{1/4}`, the limit of `f(t) / sqrt(t)`.
pub const FOURTH_ROOT_2: f64 = 1.189_207_115_002_721;

const MAX_NEWTON: usize = 200;

/// Closed-form inverse `f^{-1}(s)`.
pub fn f_inverse(s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("f_inverse of non-finite value {s}")));
    }
    Ok(antiderivative(s))
}

/// `F(s) = ∫_0^s sqrt(1 + 2τ²) dτ`, odd by construction.
#[inline]
fn antiderivative(s: f64) -> f64 {
    let x = s.abs();
    let val = 0.5 * x * (1.0 + 2.0 * x * x).sqrt() + (SQRT2 * x).asinh() / (2.0 * SQRT2);
    if s < 0.0 {
        -val
    } else {
        val
    }
}

/// Tabulated dual map with Newton polish.
///
/// Immutable after construction and `Sync`, so a single instance can be
/// shared by any number of workers.
#[derive(Debug, Clone)]
pub struct DualMap {
    t_max: f64,
    n_samples: usize,
    tol: f64,
    step: f64,
    table: Vec<f64>,
}

impl Default for DualMap {
    fn default() -> Self {
        Self::new(64.0, 4097, 1e-12).expect("default dual map parameters are valid")
    }
}

impl DualMap {
    pub fn new(t_max: f64, n_samples: usize, tol: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Config(format!("t_max must be positive, got {t_max}")));
        }
        if n_samples < 2 {
            return Err(Error::Config(format!("n_samples must be >= 2, got {n_samples}")));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {tol}")));
        }
        let step = t_max / (n_samples - 1) as f64;
        let mut map = DualMap { t_max, n_samples, tol, step, table: Vec::new() };
        let mut table = Vec::with_capacity(n_samples);
        table.push(0.0);
        let mut prev = 0.0_f64;
        for i in 1..n_samples {
            let t = i as f64 * step;
            let s = map.newton(t, prev.max(0.0).min(t))?;
            if s <= prev {
                return Err(Error::Numeric(format!("dual map table not increasing at t = {t}")));
            }
            table.push(s);
            prev = s;
        }
        map.table = table;
        Ok(map)
    }

    /// Table sized for fields whose magnitude does not exceed `max_abs`.
    /// Process-wide default map, built on first use.
    pub fn shared() -> &'static DualMap {
        static MAP: OnceLock<DualMap> = OnceLock::new();
        MAP.get_or_init(DualMap::default)
    }

    pub fn for_magnitude(max_abs: f64) -> Result<Self> {
        let t_max = (10.0 * max_abs).max(1.0);
        Self::new(t_max, 4097, 1e-12)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The `(t, f(t))` table rows.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.table.iter().enumerate().map(move |(i, &s)| (i as f64 * self.step, s))
    }

    /// `f(t)`, exactly odd.
    pub fn f(&self, t: f64) -> f64 {
        self.try_f(t).expect("dual map evaluation failed on finite input")
    }

    pub fn try_f(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("f of non-finite value {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let x = t.abs();
        let s = self.newton(x, self.guess(x))?;
        Ok(if t < 0.0 { -s } else { s })
    }

    /// `f'(t) = 1 / sqrt(1 + 2 f(t)^2)`.
    pub fn f_prime(&self, t: f64) -> f64 {
        let s = self.f(t);
        1.0 / (1.0 + 2.0 * s * s).sqrt()
    }

    /// `(f(t), f'(t))` with a single root solve.
    #[inline]
    pub fn f_and_prime(&self, t: f64) -> (f64, f64) {
        let s = self.f(t);
        (s, 1.0 / (1.0 + 2.0 * s * s).sqrt())
    }

    /// `f^{-1}(s)`; same as the free function, provided for symmetry.
    pub fn inverse(&self, s: f64) -> f64 {
        antiderivative(s)
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&t| self.f(t)).collect()
    }

    fn guess(&self, x: f64) -> f64 {
        if x < self.t_max {
            let pos = x / self.step;
            let i = (pos as usize).min(self.n_samples - 2);
            let frac = pos - i as f64;
            self.table[i] + frac * (self.table[i + 1] - self.table[i])
        } else {
            FOURTH_ROOT_2 * x.sqrt()
        }
    }

    /// Solve `F(s) = x` for `x > 0` on the bracket `[0, min(x, 2^{1/4} sqrt x)]`.
    fn newton(&self, x: f64, start: f64) -> Result<f64> {
        let mut lo = 0.0_f64;
        let mut hi = x.min(FOURTH_ROOT_2 * x.sqrt());
        let mut s = start.clamp(lo, hi);
        if s <= 0.0 {
            s = 0.5 * hi;
        }
        for _ in 0..MAX_NEWTON {
            let resid = antiderivative(s) - x;
            if resid > 0.0 {
                hi = s;
            } else if resid < 0.0 {
                lo = s;
            } else {
                return Ok(s);
            }
            let slope = (1.0 + 2.0 * s * s).sqrt();
            let mut next = s - resid / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let delta = (next - s).abs();
            s = next;
            if delta <= self.tol * s || hi - lo <= self.tol * s {
                return Ok(s);
            }
        }
        Err(Error::Numeric(format!("dual map Newton did not converge for t = {x:e}")))
    }
}

/// Outcome of one item of the dual-map property check.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub item: u8,
    pub statement: &'static str,
    /// Worst relative margin over the samples (non-negative when satisfied),
    /// or the deviation for the limit items (4) and (5).
    pub worst_margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub sample_count: usize,
    /// Lower-bound constant of item (9), the infimum over the samples.
    pub lower_bound_constant: f64,
    pub items: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|c| c.passed)
    }

    pub fn item(&self, item: u8) -> Option<&PropertyCheck> {
        self.items.iter().find(|c| c.item == item)
    }
}

/// Margin floor used for the inequality items.
pub const PROPERTY_MARGIN_FLOOR: f64 = -1e-9;

/// Log-spaced samples in `[lo, hi]` together with their negatives.
pub fn symmetric_log_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let frac = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
        let t = (llo + frac * (lhi - llo)).exp();
        out.push(t);
        out.push(-t);
    }
    out
}

/// Evaluate the listed properties of `f` on `sample_count` log-spaced points
/// of `[1e-6, 1e6]` and their negatives.
pub fn check_f_properties(map: &DualMap, sample_count: usize) -> PropertyReport {
    let samples = symmetric_log_samples(1e-6, 1e6, sample_count);
    let mut worst = [f64::INFINITY; 11];
    let mut lower_const = f64::INFINITY;
    let mut monotone_ok = true;
    let mut round_trip_worst = 0.0_f64;

    for &t in &samples {
        let (s, sp) = map.f_and_prime(t);
        let (x, fx) = (t.abs(), s.abs());
        let tfp = x * sp;
        // (2) |f'| <= 1
        worst[2] = worst[2].min(1.0 - sp.abs());
        // (3) |f(t)| <= |t|
        worst[3] = worst[3].min((x - fx) / x);
        // (6) f/2 <= t f' <= f (for negative t in absolute value)
        worst[6] = worst[6].min(((tfp - 0.5 * fx) / fx).min((fx - tfp) / fx));
        // (7) f^2/2 <= t f f' <= f^2
        let tffp = tfp * fx;
        let f2 = fx * fx;
        worst[7] = worst[7].min(((tffp - 0.5 * f2) / f2).min((f2 - tffp) / f2));
        // (8) |f| <= 2^{1/4} |t|^{1/2}
        let cap = FOURTH_ROOT_2 * x.sqrt();
        worst[8] = worst[8].min((cap - fx) / cap);
        // (10) |f f'| <= 1/sqrt 2
        let bound = std::f64::consts::FRAC_1_SQRT_2;
        worst[10] = worst[10].min((bound - fx * sp) / bound);
        // (9) lower bound constant
        let ratio = if x <= 1.0 { fx / x } else { fx / x.sqrt() };
        lower_const = lower_const.min(ratio);
        // (1) invertibility: round trip
        let back = antiderivative(s);
        round_trip_worst = round_trip_worst.max((back - t).abs() / x.max(1.0));
    }
    let mut positives: Vec<f64> = samples.iter().copied().filter(|t| *t > 0.0).collect();
    positives.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut prev = 0.0;
    for &t in &positives {
        let s = map.f(t);
        if s <= prev || map.f(-t) != -s {
            monotone_ok = false;
        }
        prev = s;
    }

    let small = 1e-6;
    let item4 = (map.f(small) / small - 1.0).abs();
    let large = 1e6;
    let item5 = (map.f(large) / large.sqrt() - FOURTH_ROOT_2).abs();

    let ineq = |item: u8, statement: &'static str, m: f64| PropertyCheck {
        item,
        statement,
        worst_margin: m,
        passed: m >= PROPERTY_MARGIN_FLOOR,
    };
    let items = vec![
        PropertyCheck {
            item: 1,
            statement: "f is invertible and strictly increasing",
            worst_margin: -round_trip_worst,
            passed: monotone_ok && round_trip_worst <= 1e-9,
        },
        ineq(2, "|f'(t)| <= 1", worst[2]),
        ineq(3, "|f(t)| <= |t|", worst[3]),
        PropertyCheck {
            item: 4,
            statement: "f(t)/t -> 1 as t -> 0 (deviation at t = 1e-6)",
            worst_margin: item4,
            passed: item4 <= 1e-9,
        },
        PropertyCheck {
            item: 5,
            statement: "f(t)/sqrt(t) -> 2^{1/4} (deviation at t = 1e6)",
            worst_margin: item5,
            passed: item5 <= 0.01,
        },
        ineq(6, "f(t)/2 <= t f'(t) <= f(t)", worst[6]),
        ineq(7, "f(t)^2/2 <= t f(t) f'(t) <= f(t)^2", worst[7]),
        ineq(8, "|f(t)| <= 2^{1/4} |t|^{1/2}", worst[8]),
        PropertyCheck {
            item: 9,
            statement: "|f(t)| >= C min(|t|, |t|^{1/2}) with C > 0",
            worst_margin: lower_const,
            passed: lower_const > 0.0,
        },
        ineq(10, "|f(t) f'(t)| <= 1/sqrt(2)", worst[10]),
    ];
    PropertyReport { sample_count, lower_bound_constant: lower_const, items }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> DualMap {
        DualMap::default()
    }

    #[test]
    fn inverse_values() {
        assert_eq!(f_inverse(0.0).unwrap(), 0.0);
        let oracle = 3f64.sqrt() / 2.0 + (2f64.sqrt()).asinh() / (2.0 * 2f64.sqrt());
        assert!((f_inverse(1.0).unwrap() - 1.271_273_9).abs() < 1e-6);
        assert!((f_inverse(1.0).unwrap() - oracle).abs() < 1e-15);
        let s = 1e-3;
        assert!((f_inverse(s).unwrap() - (s + s * s * s / 3.0)).abs() < 1e-12);
        assert_eq!(f_inverse(-0.3).unwrap(), -f_inverse(0.3).unwrap());
        assert!(f_inverse(f64::NAN).is_err());
        assert!(f_inverse(f64::INFINITY).is_err());
    }

    #[test]
    fn forward_values() {
        let m = map();
        assert_eq!(m.f(0.0), 0.0);
        assert!((m.f(1.271_273_898_522_815_6) - 1.0).abs() < 1e-12);
        // direct bisection on the closed-form inverse as the oracle
        let (mut lo, mut hi) = (0.0_f64, 2000.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if antiderivative(mid) < 1e6 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((m.f(1e6) - lo).abs() < 1e-9 * lo);
        assert!((m.f(1e6) - 1189.207).abs() < 0.5);
        assert!(m.try_f(f64::NAN).is_err());
    }

    #[test]
    fn derivative_values() {
        let m = map();
        assert_eq!(m.f_prime(0.0), 1.0);
        for t in [0.5, 5.0, 500.0] {
            assert!(m.f_prime(t) <= 1.0 && m.f_prime(-t) <= 1.0);
        }
        let eps = 1e-5;
        let fd = (m.f(1.0 + eps) - m.f(1.0 - eps)) / (2.0 * eps);
        assert!((fd - m.f_prime(1.0)).abs() < 1e-6);
    }

    #[test]
    fn table_is_monotone_and_beyond_range_is_exact() {
        let m = DualMap::new(2.0, 5, 1e-12).unwrap();
        let rows: Vec<_> = m.table().collect();
        assert_eq!(rows.len(), 5);
        assert!(rows.windows(2).all(|w| w[1].1 > w[0].1));
        let t = 37.5;
        assert!((antiderivative(m.f(t)) - t).abs() < 1e-12 * t);
        assert!(DualMap::new(0.0, 5, 1e-12).is_err());
        assert!(DualMap::new(1.0, 1, 1e-12).is_err());
    }

    #[test]
    fn named_property_examples() {
        let m = map();
        let t = 2.0;
        let (s, sp) = m.f_and_prime(t);
        assert!(s * s / 2.0 <= t * s * sp && t * s * sp <= s * s);
        let t = 1e3;
        let (s, sp) = m.f_and_prime(t);
        assert!((s * sp).abs() <= std::f64::consts::FRAC_1_SQRT_2);
        assert!((m.f(1e-6) / 1e-6 - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn property_report_passes() {
        let report = check_f_properties(&map(), 2000);
        for item in &report.items {
            assert!(item.passed, "item {} failed: {}", item.item, item.worst_margin);
        }
        assert!(report.lower_bound_constant > 0.0);
    }

    #[test]
    fn small_argument_asinh_is_accurate() {
        // asinh(x) = x - x^3/6 + ...
        let x = 1e-9_f64;
        assert!(((x.asinh() - x) / x).abs() < 1e-15);
    }
}
