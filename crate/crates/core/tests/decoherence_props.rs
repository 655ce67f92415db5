use nvzero::decoherence::{
    bose_occupation, kappa, lifetime_bound, monte_carlo_splitting_spread, splitting_spread_from_strain, strain_broadening,
    strain_from_transition_spread, strained_noise_spread, LifetimeReference, Regime, StrainSampling,
};
use nvzero::hamiltonian::build_ground;
use nvzero::model::{DjtParams, FieldNV, PhysicalConstants, StrainNV};
use nvzero::optics::{dipole_set_nv0, noise_suppression};
use proptest::prelude::*;

fn consts() -> PhysicalConstants {
    PhysicalConstants::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn general_converges_to_large_djt_limit(u in 21.6..200.0f64, a in -180.0..180.0f64, de in 0.1..100.0f64) {
        let c = consts();
        prop_assume!(4.0 * u * u > 100.0 * c.lambda_par * c.lambda_par);
        let d = DjtParams::new(u, a).unwrap();
        let g = strain_broadening(de, &d, &c, Regime::General).unwrap().delta_s;
        let l = strain_broadening(de, &d, &c, Regime::LargeDjt).unwrap().delta_s;
        prop_assert!(((g - l) / l).abs() < 0.01);
    }

    #[test]
    fn spread_never_exceeds_kappa_times_width(u in 0.0..100.0f64, de in 0.0..100.0f64) {
        let c = consts();
        let d = DjtParams::new(u, 0.0).unwrap();
        for regime in [Regime::General, Regime::LargeDjt] {
            let r = strain_broadening(de, &d, &c, regime).unwrap();
            prop_assert!(r.delta_s <= kappa(&c).unwrap() * de + 1e-12);
        }
    }

    #[test]
    fn strain_round_trip_is_twice_the_closed_form(u in 0.0..100.0f64, de in 0.1..100.0f64) {
        // δe back-solved from the optical width, pushed through the
        // splitting-spread expression, lands at exactly twice the
        // closed-form δS
        let c = consts();
        let d = DjtParams::new(u, 30.0).unwrap();
        let delta_e = strain_from_transition_spread(de, &d, &c);
        let direct = splitting_spread_from_strain(delta_e, &c);
        let closed = strain_broadening(de, &d, &c, Regime::General).unwrap().delta_s;
        prop_assert!((direct / closed - 2.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_spread_matches_difference_of_perturbative_factor(u in 1.0..30.0f64, a in -180.0..180.0f64,
                                                                    s in 30.0..300.0f64, frac in 0.01..0.2f64) {
        let c = consts();
        let d = DjtParams::new(u, a).unwrap();
        prop_assume!(d.upsilon_y().abs() > 1e-3);
        let ds = frac * s;
        let first = strained_noise_spread(s, ds, &d, &c).unwrap().delta_p;
        let p = |dc: f64| {
            let shifted = DjtParams::from_components(d.upsilon_x(), d.upsilon_y() + dc);
            strained_noise_spread(s, 0.0, &shifted, &c).unwrap().p
        };
        let fd = 0.5 * (p(0.5 * ds) - p(-0.5 * ds)).abs();
        prop_assert!(((fd - first) / first).abs() < 0.05, "fd {} first {}", fd, first);
    }

    #[test]
    fn first_order_spread_tracks_exact_factor(u in 1.0..30.0f64, a in prop_oneof![20.0..160.0f64, -160.0..-20.0f64],
                                              ratio in 10.0..40.0f64, frac in 0.01..0.1f64) {
        let c = consts();
        let d = DjtParams::new(u, a).unwrap();
        let s0 = (4.0 * u * u + c.lambda_par * c.lambda_par).sqrt();
        let s = ratio * s0;
        let ds = frac * s;
        let first = strained_noise_spread(s, ds, &d, &c).unwrap().delta_p;
        // eigenvector noise factor with C shifted by ±δS/2
        let field = FieldNV::new(s / (2.0 * c.d_perp), 0.0, 0.0);
        let exact = |dc: f64| {
            let shifted = DjtParams::from_components(d.upsilon_x(), d.upsilon_y() + dc);
            let g = build_ground(&shifted, &field, &StrainNV::zero(), &c).eigensystem();
            noise_suppression(&g, &dipole_set_nv0(&c), [1.0, 0.0, 0.0]).unwrap().p
        };
        let fd = 0.5 * (exact(0.5 * ds) - exact(-0.5 * ds)).abs();
        prop_assert!(((fd - first) / first).abs() < 0.05, "fd {} first {}", fd, first);
    }

    #[test]
    fn occupation_is_nonnegative(t in 0.01..100.0f64, s in 0.01..1000.0f64) {
        let n = bose_occupation(t, s, &consts()).unwrap();
        prop_assert!(n >= 0.0 && n.is_finite());
    }
}

#[test]
fn lifetime_bound_is_monotone() {
    let c = consts();
    let r = LifetimeReference::default();
    let temps: Vec<f64> = (0..=40).map(|k| 0.1 * 10f64.powf(k as f64 / 20.0)).collect();
    let splits: Vec<f64> = (0..=40).map(|k| 10f64.powf(k as f64 / 20.0)).collect();
    for &s in &splits {
        for w in temps.windows(2) {
            let a = lifetime_bound(s, w[0], &r, &c).unwrap().tau_min;
            let b = lifetime_bound(s, w[1], &r, &c).unwrap().tau_min;
            assert!(b <= a && b > 0.0, "T {w:?} S {s}");
        }
    }
    for &t in &temps {
        for w in splits.windows(2) {
            let a = lifetime_bound(w[0], t, &r, &c).unwrap().tau_min;
            let b = lifetime_bound(w[1], t, &r, &c).unwrap().tau_min;
            assert!(b <= a, "S {w:?} T {t}");
        }
    }
}

#[test]
fn zero_temperature_uses_empty_modes() {
    let c = consts();
    let r = LifetimeReference::default();
    let zero = lifetime_bound(50.0, 0.0, &r, &c).unwrap();
    let cold = lifetime_bound(50.0, 0.05, &r, &c).unwrap();
    assert_eq!(zero.bose_occupation, 0.0);
    assert!((zero.tau_min - cold.tau_min).abs() < 1e-9 * zero.tau_min);
}

#[test]
fn monte_carlo_matches_isotropic_formula() {
    let c = consts();
    let delta_e = 5e-6;
    for sampling in [StrainSampling::IsotropicModes, StrainSampling::IidComponents] {
        let mc = monte_carlo_splitting_spread(delta_e, 200.0, &DjtParams::zero(), &c, 100_000, 7, sampling).unwrap();
        let rel = (mc.std_splitting - mc.predicted) / mc.predicted;
        assert!(rel.abs() < 0.03, "{sampling:?}: {} vs {}", mc.std_splitting, mc.predicted);
    }
}

#[test]
fn monte_carlo_ignores_thread_count() {
    let c = consts();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_splitting_spread(4e-6, 100.0, &DjtParams::zero(), &c, 5000, 11, StrainSampling::IidComponents).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.std_splitting.to_bits(), b.std_splitting.to_bits());
    assert_eq!(a.mean_splitting.to_bits(), b.mean_splitting.to_bits());
}
