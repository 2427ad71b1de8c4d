//! Regime classification ahead of the ground-state solver, with the
//! nonexistence recombination checked on random fields.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::functionals::{dual_field, nonexistence_recombination};
use crate::nonlinearity::{growth_classify, GrowthRegime, Nonlinearity};
use crate::radial_field::RadialGrid;
use crate::sampling::{random_fields, MixtureSpec};

pub const GUARD_SAMPLES: usize = 100;
const GUARD_SEED: u64 = 0x6e6f6e65;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuardReport {
    pub regime: GrowthRegime,
    /// Whether `minimize_sigma` may run.
    pub sigma_permitted: bool,
    /// Largest relative gap between the recombination and `-G/N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_residual: Option<f64>,
    /// Largest pointwise value of `[μ₁H(f) - h(f)f] / (1 + |h(f)f|)` over all
    /// samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sign_term: Option<f64>,
    pub samples: usize,
}

impl GuardReport {
    /// The identity holds to `1e-8` and the sign term is nonpositive up to
    /// rounding.
    pub fn algebra_verified(&self) -> bool {
        self.identity_residual.is_none_or(|r| r <= 1e-8) && self.max_sign_term.is_none_or(|m| m <= 1e-12)
    }
}

pub fn classify_and_guard(nl: &Nonlinearity, dim: usize) -> Result<GuardReport> {
    let regime = growth_classify(nl, dim)?;
    let sigma_permitted = regime == GrowthRegime::MassSupercritical;
    if regime != GrowthRegime::Nonexistence {
        return Ok(GuardReport { regime, sigma_permitted, identity_residual: None, max_sign_term: None, samples: 0 });
    }
    let mu1 = nl.mu_bounds().map(|(m, _)| m).unwrap_or(12.0);
    let grid = Arc::new(RadialGrid::new(dim, 10.0, 1001)?);
    let spec = MixtureSpec::default();
    let mut identity: f64 = 0.0;
    let mut sign = f64::NEG_INFINITY;
    for v in random_fields(&grid, &spec, GUARD_SAMPLES, GUARD_SEED) {
        let rec = nonexistence_recombination(&v, nl, mu1)?;
        identity = identity.max(rec.relative_residual);
        for &s in dual_field(&v).values() {
            let (h, big_h) = nl.eval(s);
            sign = sign.max((mu1 * big_h - h * s) / (1.0 + (h * s).abs()));
        }
    }
    Ok(GuardReport {
        regime,
        sigma_permitted: false,
        identity_residual: Some(identity),
        max_sign_term: Some(sign),
        samples: GUARD_SAMPLES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_twelve_in_three_dimensions_is_refused() {
        let r = classify_and_guard(&Nonlinearity::power(12.0).unwrap(), 3).unwrap();
        assert_eq!(r.regime, GrowthRegime::Nonexistence);
        assert!(!r.sigma_permitted);
        assert!(r.algebra_verified(), "{r:?}");
    }

    #[test]
    fn power_seven_in_the_plane_is_permitted() {
        let r = classify_and_guard(&Nonlinearity::power(7.0).unwrap(), 2).unwrap();
        assert_eq!(r.regime, GrowthRegime::MassSupercritical);
        assert!(r.sigma_permitted && r.identity_residual.is_none());
    }
}
