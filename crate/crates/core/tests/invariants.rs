use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use dualwave_core::dual_transform::{f_inverse, FOURTH_ROOT_2};
use dualwave_core::functionals::{mass, psi};
use dualwave_core::sampling::{gaussian_mixture, random_fields, MixtureSpec};
use dualwave_core::scalings::{mass_project, stretch};
use dualwave_core::{DualMap, FiberProfile, Nonlinearity, RadialField, RadialGrid};
use proptest::prelude::*;

/// `∫_0^s sqrt(1 + 2σ²) dσ` by composite Simpson.
fn simpson_inverse(s: f64) -> f64 {
    let n = 4000;
    let h = s / n as f64;
    let g = |x: f64| (1.0 + 2.0 * x * x).sqrt();
    let mut acc = g(0.0) + g(s);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    acc * h / 3.0
}

fn grid(dim: usize, radius: f64, points: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(dim, radius, points).unwrap())
}

#[test]
fn closed_form_inverse_matches_quadrature() {
    for s in [1e-3, 0.1, 0.7, 1.0, 3.0, 25.0] {
        assert_relative_eq!(f_inverse(s).unwrap(), simpson_inverse(s), max_relative = 1e-12);
    }
}

#[test]
fn gaussian_energies_match_closed_forms() {
    for dim in [2usize, 3] {
        let g = grid(dim, 10.0, 4001);
        for (amp, w) in [(1.0, 0.5), (0.3, 1.0), (2.0, 2.0)] {
            let v = RadialField::gaussian(g.clone(), amp, w).unwrap();
            let n = dim as f64;
            let kin = amp * amp * n * (PI / 2.0).powf(n / 2.0) * w.powf(n - 2.0);
            let l2 = amp * amp * (PI * w * w / 2.0).powf(n / 2.0);
            assert_relative_eq!(v.kinetic(), kin, max_relative = 1e-4);
            assert_relative_eq!(v.l2_squared(), l2, max_relative = 1e-4);
        }
    }
}

#[test]
fn seeded_fields_are_reproducible() {
    let g = grid(3, 10.0, 501);
    let a = random_fields(&g, &MixtureSpec::default(), 5, 99);
    let b = random_fields(&g, &MixtureSpec::default(), 5, 99);
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn f_inverts_the_closed_form(s in 1e-6f64..1e3) {
        let t = f_inverse(s).unwrap();
        let map = DualMap::shared();
        prop_assert!((map.f(t) - s).abs() <= 1e-12 * s.max(1.0));
        prop_assert!((map.f(-t) + s).abs() <= 1e-12 * s.max(1.0));
    }

    #[test]
    fn f_is_monotone_and_bounded(a in 0.0f64..1e4, b in 0.0f64..1e4) {
        let map = DualMap::shared();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(map.f(lo) <= map.f(hi));
        prop_assert!(map.f(hi) <= hi);
        prop_assert!(map.f(hi) <= FOURTH_ROOT_2 * hi.sqrt() * (1.0 + 1e-14));
        let (f, fp) = map.f_and_prime(hi);
        prop_assert!((fp - 1.0 / (1.0 + 2.0 * f * f).sqrt()).abs() <= 1e-14);
    }

    #[test]
    fn mass_projection_hits_the_target(
        c in 0.1f64..3.0, w in 0.4f64..2.0, a in 1e-3f64..1e3, dim in 2usize..=3,
    ) {
        let g = grid(dim, 12.0, 801);
        let v = gaussian_mixture(&g, &[(c, w)]);
        let u = mass_project(&v, a).unwrap();
        prop_assert!((mass(&u) / a - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn stretch_keeps_the_mass(c in 0.2f64..2.0, w in 0.6f64..1.5, t in 0.5f64..2.0, dim in 2usize..=3) {
        let g = grid(dim, 20.0, 4001);
        let v = gaussian_mixture(&g, &[(c, w)]);
        let m = mass(&v);
        prop_assert!((mass(&stretch(&v, t).unwrap()) / m - 1.0).abs() <= 1e-4);
    }

    #[test]
    fn fiber_profile_at_one_is_the_field(c in 0.2f64..2.0, w in 0.5f64..2.0, t in 0.2f64..5.0) {
        let g = grid(2, 12.0, 1001);
        let nl = Nonlinearity::power(7.0).unwrap();
        let v = gaussian_mixture(&g, &[(c, w)]);
        let prof = FiberProfile::new(&v, &nl).unwrap();
        let p = psi(&v, &nl).unwrap();
        prop_assert!((prof.fiber_psi(1.0).unwrap() - p).abs() <= 1e-12 * (1.0 + p.abs()));
        prop_assert!((prof.kinetic_at(1.0) - v.kinetic()).abs() <= 1e-12 * v.kinetic());
        prop_assert!(prof.surplus_A(t).unwrap() >= -1e-10);
        prop_assert!(prof.surplus_B(t).unwrap() >= -1e-10);
    }

    #[test]
    fn interpolation_hits_nodes(c in 0.1f64..3.0, w in 0.3f64..3.0, k in 0usize..400) {
        let g = grid(3, 8.0, 401);
        let v = gaussian_mixture(&g, &[(c, w)]);
        let r = g.nodes()[k];
        prop_assert!((v.interpolate(r) - v.values()[k]).abs() <= 1e-12 * c);
    }
}
