mod common;

use approx::assert_relative_eq;
use cnls_core::criteria::{cond_mixed, h_roots, mu_star, ModelConstants};
use cnls_core::dynamics::{evolve, DynamicsGrid, EvolveConfig, Outcome, WaveField};
use cnls_core::fiber::{energy, pohozaev, scale, FiberMap, FiberTriple};
use cnls_core::gn::{gn_constant, gn_ratio};
use cnls_core::grid::RadialGridSpec;
use cnls_core::params::{Dim, Exponent, ModelParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mixed(a: f64, mu: f64) -> ModelParams<f64> {
    ModelParams::with_ints(1, 8, 3, a, mu).unwrap()
}

fn triple() -> impl Strategy<Value = FiberTriple<f64>> {
    (0.05..5.0f64, 0.05..5.0f64, 0.05..5.0f64, 0.1..4.0f64)
        .prop_map(|(g, mq, mp, m)| FiberTriple::new(g, mq, mp, m).unwrap())
}

fn params() -> impl Strategy<Value = ModelParams<f64>> {
    prop_oneof![
        (0.2..2.0f64, 0.01..5.0f64).prop_map(|(a, mu)| mixed(a, mu)),
        (0.2..2.0f64, -2.0..0.0f64).prop_map(|(a, mu)| ModelParams::with_ints(1, 8, 4, a, mu).unwrap()),
        (0.2..2.0f64, 0.0..2.0f64).prop_map(|(a, mu)| ModelParams::with_ints(3, 4, 3, a, mu).unwrap()),
        (0.2..2.0f64, 0.0..2.0f64).prop_map(|(a, mu)| ModelParams::with_ints(2, 5, 4, a, mu).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fiber_scaling_composes(tr in triple(), p in params(), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let a = scale(&scale(&tr, s, &p), t, &p);
        let b = scale(&tr, s + t, &p);
        assert_relative_eq!(a.grad2, b.grad2, max_relative = 1e-12);
        assert_relative_eq!(a.mq, b.mq, max_relative = 1e-12);
        assert_relative_eq!(a.mp, b.mp, max_relative = 1e-12);
        prop_assert_eq!(a.mass2, tr.mass2);
    }

    #[test]
    fn fiber_derivative_is_pohozaev(tr in triple(), p in params(), s in -1.5..1.5f64) {
        let f = FiberMap::new(tr, &p);
        let moved = scale(&tr, s, &p);
        assert_relative_eq!(f.psi(s), energy(&moved, &p), max_relative = 1e-12, epsilon = 1e-12);
        let pz = pohozaev(&moved, &p);
        prop_assert!((f.psi_prime(s) - pz).abs() <= 1e-12 * (1.0 + pz.abs()));
    }

    #[test]
    fn mixed_condition_matches_radii(la in -1.0..0.5f64, lmu in -3.0..3.0f64) {
        let p = mixed(10f64.powf(la), 10f64.powf(lmu));
        let c = ModelConstants::compute(&p).unwrap();
        prop_assert_eq!(cond_mixed(&p, &c).unwrap().condition_holds, h_roots(&p, &c).unwrap().is_some());
    }

    #[test]
    fn mu_star_is_the_boundary(a in 0.3..2.0f64) {
        let p = mixed(a, 1.0);
        let c = ModelConstants::compute(&p).unwrap();
        let ms = mu_star(&p, &c).unwrap();
        prop_assert!(cond_mixed(&p.with_mu(ms * (1.0 - 1e-6)), &c).unwrap().condition_holds);
        prop_assert!(!cond_mixed(&p.with_mu(ms * (1.0 + 1e-6)), &c).unwrap().condition_holds);
    }

    #[test]
    fn params_round_trip_through_json(p in params()) {
        let s = serde_json::to_string(&p).unwrap();
        let back: ModelParams<f64> = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gn_ratio_below_constant(n in 1u32..=3, seed in any::<u64>(), which in 0usize..4) {
        let dim = Dim::new(n).unwrap();
        let p = [
            Exponent::<f64>::integer(3),
            Exponent::integer(4),
            Exponent::rational(2 * n as i64 + 4, n as i64),
            Exponent::integer(5),
        ][which];
        let c = gn_constant(dim, &p).unwrap().c_np;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = common::random_profile(dim, RadialGridSpec::new(1201, 12.0).unwrap(), &mut rng);
        prop_assert!(gn_ratio(&u, &p) <= c * (1.0 + 1e-6));
    }

    #[test]
    fn dilation_acts_like_fiber_scaling(n in 1u32..=3, seed in any::<u64>(), s in -0.5..0.5f64) {
        let dim = Dim::new(n).unwrap();
        let p = ModelParams::new(dim, Exponent::integer(4), Exponent::integer(3), 1.0, 1.0).unwrap();
        let spec = RadialGridSpec::new(8001, 30.0).unwrap();
        let w = 0.8 + (seed % 100) as f64 / 100.0;
        let u = cnls_core::grid::RadialField::from_fn(dim, spec, |r: f64| (-(r / w).powi(2)).exp());
        let lhs = u.dilate(s).triple(3.0, 4.0);
        let rhs = scale(&u.triple(3.0, 4.0), s, &p);
        assert_relative_eq!(lhs.mass2, rhs.mass2, max_relative = 1e-6);
        assert_relative_eq!(lhs.grad2, rhs.grad2, max_relative = 1e-5);
        assert_relative_eq!(lhs.mq, rhs.mq, max_relative = 1e-6);
        assert_relative_eq!(lhs.mp, rhs.mp, max_relative = 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    /// `ψ(t) ↦ conj ψ(-t)` is a symmetry; the symmetric splitting keeps it.
    #[test]
    fn evolution_is_time_reversible(seed in any::<u64>()) {
        let grid = DynamicsGrid::<f64>::Periodic { half_length: 20.0, points: 1024 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = common::random_gaussian_1d(1024, 20.0, 1.0, &mut rng);
        let u = WaveField::new(grid, v).unwrap();
        let p = mixed(1.0, 0.5);
        let cfg = EvolveConfig { dt: 1e-3, t_end: 0.3, adaptive: false, ..EvolveConfig::default() };
        let fwd = evolve(&u, &p, &cfg, |_, _, _| {}).unwrap();
        prop_assert!(fwd.mass_drift() < 1e-10);
        let conj: Vec<_> = fwd.final_state.values.iter().map(|z| z.conj()).collect();
        let back = evolve(&WaveField::new(grid, conj).unwrap(), &p, &cfg, |_, _, _| {}).unwrap();
        let err = back.final_state.values.iter().zip(&u.values).map(|(x, y)| (x.conj() - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "{err:e}");
    }

    /// Mass below the critical mass with an L²-critical leading power and a
    /// focusing subcritical perturbation: solutions are global.
    #[test]
    fn critical_leading_below_threshold_never_blows_up(seed in any::<u64>(), a in 0.5..1.2f64) {
        let grid = DynamicsGrid::<f64>::default_for(Dim::One);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = common::random_gaussian_1d(grid.points(), 40.0, a, &mut rng);
        let p = ModelParams::with_ints(1, 6, 3, a, 0.5).unwrap();
        let cfg = EvolveConfig { dt: 1e-3, t_end: 2.0, ..EvolveConfig::default() };
        let tr = evolve(&WaveField::new(grid, v).unwrap(), &p, &cfg, |_, _, _| {}).unwrap();
        let blew = matches!(tr.outcome, Outcome::BlowUp { .. });
        prop_assert!(!blew, "blow-up at mass {a}");
    }
}
