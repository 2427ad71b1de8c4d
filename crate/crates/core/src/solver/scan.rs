//! Level curves `a ↦ F(a)`, `a ↦ σ(a)` and the thresholds `a_*`, `a_**`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

use super::{minimize_F, minimize_sigma, SolveConfig, SolveResult, Status};

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub a: f64,
    /// `None` when the solve failed; the message is in `error`.
    pub status: Option<Status>,
    pub psi: Option<f64>,
    pub lambda: Option<f64>,
    pub G_residual: Option<f64>,
    pub error: Option<String>,
}

impl CurveRow {
    fn from_result(a: f64, res: Result<SolveResult>) -> Self {
        match res {
            Ok(r) => CurveRow {
                a,
                status: Some(r.status),
                psi: r.level.is_finite().then_some(r.level),
                lambda: r.breakdown.lambda,
                G_residual: r.status.ne(&Status::NonexistenceRegime).then(|| r.g_residual()),
                error: None,
            },
            Err(e) => CurveRow { a, status: None, psi: None, lambda: None, G_residual: None, error: Some(e.to_string()) },
        }
    }

    pub fn status_str(&self) -> &'static str {
        self.status.map_or("error", Status::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub rows: Vec<CurveRow>,
    /// Adjacent pairs `(a₁, a₂)` with `level(a₂) > level(a₁) + 1e-6`.
    pub monotonicity_violations: Vec<(f64, f64)>,
}

fn check_list(a_list: &[f64]) -> Result<()> {
    if a_list.is_empty() {
        return Err(Error::Config("the mass list is empty".into()));
    }
    if a_list.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::Config("masses must be positive".into()));
    }
    if a_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("the mass list must be strictly increasing".into()));
    }
    Ok(())
}

fn violations(rows: &[CurveRow]) -> Vec<(f64, f64)> {
    rows.windows(2)
        .filter_map(|w| match (w[0].psi, w[1].psi) {
            (Some(x), Some(y)) if y > x + 1e-6 => Some((w[0].a, w[1].a)),
            _ => None,
        })
        .collect()
}

fn scan(a_list: &[f64], solve: impl Fn(f64) -> Result<SolveResult> + Sync) -> Result<Curve> {
    check_list(a_list)?;
    let mut rows: Vec<CurveRow> = a_list.par_iter().map(|&a| CurveRow::from_result(a, solve(a))).collect();
    rows.sort_by(|x, y| x.a.total_cmp(&y.a));
    let monotonicity_violations = violations(&rows);
    Ok(Curve { rows, monotonicity_violations })
}

#[allow(non_snake_case)]
pub fn scan_F_curve(a_list: &[f64], p: f64, cfg: &SolveConfig) -> Result<Curve> {
    scan(a_list, |a| minimize_F(p, &cfg.with_a(a)))
}

pub fn scan_sigma_curve(a_list: &[f64], nl: &Nonlinearity, cfg: &SolveConfig) -> Result<Curve> {
    scan(a_list, |a| minimize_sigma(nl, &cfg.with_a(a)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub p: f64,
    pub dim: usize,
    /// Infimum estimate of `{a : F(a) < 0}`.
    pub a_star: f64,
    /// Smallest evaluated mass with a converged negative minimum.
    pub a_star_star: f64,
    /// Final bisection bracket around `a_*`.
    pub bracket: (f64, f64),
    pub eps_neg: f64,
    /// Every evaluated mass, sorted.
    pub evaluations: Vec<CurveRow>,
    /// `F(a₁) ≥ F(a₂) - 1e-6` for all evaluated `a₁ < a₂`.
    pub nonincreasing: bool,
    /// `|F| ≤ 1e-3` at every evaluated mass below `a_*`.
    pub zero_below: bool,
}

/// Bisection in `ln a` on the predicate `F(a) < -ε_neg`, seeded by a
/// log-spaced scan of `scan_points` masses over `[a_lo, a_hi]`.
pub fn find_a_star(
    p: f64,
    cfg: &SolveConfig,
    a_lo: f64,
    a_hi: f64,
    scan_points: usize,
    tol: f64,
) -> Result<Thresholds> {
    cfg.validate()?;
    let n = cfg.dim as f64;
    if !(p >= 2.0 + 4.0 / n && p < 4.0 + 4.0 / n) {
        return Err(Error::Config(format!(
            "thresholds need 2 + 4/N <= p < 4 + 4/N, got p = {p} with N = {}",
            cfg.dim
        )));
    }
    if !(a_lo > 0.0 && a_lo < a_hi && tol > 0.0) || scan_points < 2 {
        return Err(Error::Config(format!("invalid bracket [{a_lo}, {a_hi}] or tolerance {tol}")));
    }
    let eps = cfg.eps_neg();
    let (l0, l1) = (a_lo.ln(), a_hi.ln());
    let grid: Vec<f64> =
        (0..scan_points).map(|k| (l0 + (l1 - l0) * k as f64 / (scan_points - 1) as f64).exp()).collect();
    let mut rows = scan_F_curve(&grid, p, cfg)?.rows;
    let negative = |r: &CurveRow| r.psi.is_some_and(|x| x < -eps);
    let first_neg = rows.iter().position(negative).ok_or(Error::NoSignChange { lo: a_lo, hi: a_hi })?;
    if first_neg == 0 {
        return Err(Error::NoSignChange { lo: a_lo, hi: a_hi });
    }
    let (mut lo, mut hi) = (rows[first_neg - 1].a, rows[first_neg].a);
    while hi / lo > 1.0 + tol {
        let mid = (lo * hi).sqrt();
        let row = CurveRow::from_result(mid, minimize_F(p, &cfg.with_a(mid)));
        if negative(&row) {
            hi = mid;
        } else {
            lo = mid;
        }
        rows.push(row);
    }
    rows.sort_by(|x, y| x.a.total_cmp(&y.a));
    let a_star = (lo * hi).sqrt();
    let a_star_star = rows
        .iter()
        .filter(|r| r.status == Some(Status::Converged) && negative(r))
        .map(|r| r.a)
        .fold(f64::INFINITY, f64::min);
    let levels: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.psi.map(|x| (r.a, x))).collect();
    let nonincreasing = levels.iter().enumerate().all(|(i, &(_, x))| levels[i + 1..].iter().all(|&(_, y)| x >= y - 1e-6));
    let zero_below = rows.iter().filter(|r| r.a < a_star).all(|r| r.psi.is_some_and(|x| x.abs() <= 1e-3));
    Ok(Thresholds {
        p,
        dim: cfg.dim,
        a_star,
        a_star_star,
        bracket: (lo, hi),
        eps_neg: eps,
        evaluations: rows,
        nonincreasing,
        zero_below,
    })
}
