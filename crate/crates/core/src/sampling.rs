//! Seeded random radial fields: sums of a few Gaussians.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::radial_field::{RadialField, RadialGrid};

/// Parameters of a random Gaussian mixture `Σ c_k e^{-(r/s_k)^2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    pub max_terms: usize,
    pub amplitude: f64,
    pub min_width: f64,
    pub max_width: f64,
    /// Allow negative coefficients (sign-changing fields).
    pub signed: bool,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        MixtureSpec { max_terms: 3, amplitude: 1.0, min_width: 0.5, max_width: 3.0, signed: true }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_mixture(grid: &Arc<RadialGrid>, terms: &[(f64, f64)]) -> RadialField {
    let mut values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| terms.iter().map(|&(c, s)| c * (-(r / s).powi(2)).exp()).sum())
        .collect();
    *values.last_mut().unwrap() = 0.0;
    RadialField::new(grid.clone(), values).expect("mixture values are finite")
}

/// Coefficients `(c_k, s_k)` of a random mixture; the first term is positive.
pub fn random_terms<R: Rng>(spec: &MixtureSpec, rng: &mut R) -> Vec<(f64, f64)> {
    let n = rng.gen_range(1..=spec.max_terms.max(1));
    let (lw0, lw1) = (spec.min_width.ln(), spec.max_width.ln());
    (0..n)
        .map(|k| {
            let mut c = spec.amplitude * rng.gen_range(0.2..1.0);
            if spec.signed && k > 0 && rng.gen_bool(0.5) {
                c = -c;
            }
            (c, rng.gen_range(lw0..=lw1).exp())
        })
        .collect()
}

pub fn random_mixture<R: Rng>(grid: &Arc<RadialGrid>, spec: &MixtureSpec, rng: &mut R) -> RadialField {
    gaussian_mixture(grid, &random_terms(spec, rng))
}

pub fn random_fields(grid: &Arc<RadialGrid>, spec: &MixtureSpec, count: usize, seed: u64) -> Vec<RadialField> {
    let mut r = rng(seed);
    (0..count).map(|_| random_mixture(grid, spec, &mut r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let g = Arc::new(RadialGrid::new(2, 10.0, 201).unwrap());
        let a = random_fields(&g, &MixtureSpec::default(), 5, 7);
        let b = random_fields(&g, &MixtureSpec::default(), 5, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.has_dirichlet_tail() && !v.is_zero()));
    }
}
