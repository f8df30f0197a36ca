use mtlab_core::constants::{aubin_a, sharp_c, xi};
use mtlab_core::thermo::{entropy_legendre_gap, gibbs_measure, monge_ampere_measure, potential_of_measure};
use mtlab_core::*;
use num_rational::BigRational;
use proptest::prelude::*;

fn lin(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn fs(n: usize, eps: f64) -> RadialProfile {
    fs_profile(n, eps, &GridSpec::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_and_energy_are_homogeneous(n in 1usize..=3, eps in 0.05f64..2.0, lambda in 0.2f64..3.0) {
        let p = fs(n, eps);
        let q = p.scaled(lambda).unwrap();
        let m = ma_mass(&p).total;
        prop_assert!((ma_mass(&q).total / (lambda.powi(n as i32) * m) - 1.0).abs() < 1e-9);
        let j = energy(&p).j_raw;
        prop_assert!((energy(&q).j_raw / (lambda.powi(n as i32 + 1) * j) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exp_integral_grows_with_gamma(n in 1usize..=3, eps in 0.05f64..2.0, g1 in 0.0f64..3.0, dg in 0.01f64..2.0) {
        let p = fs(n, eps);
        prop_assert!(exp_integral(&p, g1).unwrap() <= exp_integral(&p, g1 + dg).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn chebyshev_bound(eps in 0.05f64..2.0, s in 0.0f64..10.0, t in 0.0f64..4.0) {
        let p = fs(2, eps);
        let v = volume_function(&p, s);
        prop_assert!(v <= (-s * t).exp() * exp_integral(&p, t).unwrap() * (1.0 + 1e-10));
    }

    #[test]
    fn cone_volume_is_exponential(n in 1usize..=3, slope in 0.2f64..3.0, s in 0.01f64..30.0) {
        let c = cone_profile(n, slope).unwrap();
        let exact = (-(n as f64) * s / slope).exp();
        prop_assert!((volume_function(&c, s) / exact - 1.0).abs() < 1e-9);
    }

    #[test]
    fn legendre_reverses_order(a in 0.2f64..2.0, da in 0.0f64..2.0, b in -1.0f64..1.0) {
        let t = lin(-10.0, 10.0, 2001);
        let f = ConvexGridFunction::from_fn(t.clone(), |x| a * x * x + b * x, Side::T).unwrap();
        let g = ConvexGridFunction::from_fn(t, |x| (a + da) * x * x + b * x, Side::T).unwrap();
        let s = lin(-2.0, 2.0, 41);
        let (fs, gs) = (legendre(&f, &s).unwrap(), legendre(&g, &s).unwrap());
        for (x, y) in fs.values().iter().zip(gs.values()) {
            prop_assert!(*x >= *y - 1e-12);
        }
    }

    #[test]
    fn legendre_is_an_involution(a in 0.3f64..2.0, b in -1.0f64..1.0, c in 0.0f64..0.5) {
        let f_exact = |x: f64| a * x * x + b * x + c * x.exp();
        let t = lin(-6.0, 4.0, 4001);
        let f = ConvexGridFunction::from_fn(t, f_exact, Side::T).unwrap();
        let s = lin(-30.0, 40.0, 8001);
        let ff = legendre(&legendre(&f, &s).unwrap(), &lin(-2.0, 2.0, 41)).unwrap();
        for (x, v) in lin(-2.0, 2.0, 41).iter().zip(ff.values()) {
            prop_assert!((v - f_exact(*x)).abs() < 1e-6, "x={} {} {}", x, v, f_exact(*x));
        }
    }

    #[test]
    fn duality_gap_is_nonnegative(n in 1usize..=3, eps in 0.05f64..2.0, gamma in 0.2f64..4.0) {
        prop_assert!(duality_gap(&fs(n, eps), gamma).unwrap() >= -1e-8);
    }

    #[test]
    fn entropy_gap_is_nonnegative(e1 in 0.1f64..2.0, e2 in 0.1f64..2.0, g1 in 0.3f64..3.0, g2 in 0.3f64..3.0) {
        let mu = gibbs_measure(&fs(2, e1), g1).unwrap();
        prop_assert!(entropy_legendre_gap(&mu, &fs(2, e2), g2).unwrap() >= -1e-8);
    }

    #[test]
    fn potential_inverts_monge_ampere(n in 1usize..=3, eps in 0.1f64..2.0) {
        let p = fs(n, eps);
        let q = potential_of_measure(&monge_ampere_measure(&p).unwrap()).unwrap();
        let err = p.grid_g().iter().zip(q.grid_g()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-6, "{}", err);
    }

    #[test]
    fn alpha_is_at_least_n(n in 1usize..=3, eps in 0.05f64..2.0) {
        let p = fs(n, eps);
        let unit = p.scaled(ma_mass(&p).total.powf(-1.0 / n as f64)).unwrap();
        let profiles = vec![unit, cone_profile(n, 1.0).unwrap()];
        prop_assert!(alpha_lower_bound(n, &profiles).unwrap() >= n as f64 - 1e-9);
    }

    #[test]
    fn table_round_trip(n in 1usize..=3, eps in 0.05f64..2.0) {
        let p = fs(n, eps).labelled("fs");
        let q = RadialProfile::from_table(&p.to_table()).unwrap();
        prop_assert_eq!(p.grid_g(), q.grid_g());
        prop_assert_eq!(p.label(), q.label());
    }
}

#[test]
fn constant_identities_are_exact() {
    for n in 1..=60u32 {
        assert_eq!(aubin_a(n), xi(n));
        let r = sharp_c(n).div(&aubin_a(n));
        let half = BigRational::new((n + 1).into(), (2 * n).into());
        assert_eq!(r.pi_pow, 0);
        assert_eq!(r.coef, num_traits::pow(half, n as usize));
    }
}
