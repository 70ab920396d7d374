use painleve_core::painleve::{v_bessel_tau, v_large_z_asymptote, OdeSolution, Painleve};
use proptest::prelude::*;

#[test]
fn integer_s_routes_agree() {
    for s in 1..=3usize {
        let sol = OdeSolution::for_s(s as f64, 12.0).unwrap();
        for z in [0.3, 1.0, 4.0, 11.0] {
            let b = v_bessel_tau(z, s, 1).unwrap();
            let o = sol.jet(z, 1).unwrap();
            assert!((b.v - o.v).abs() < 1e-9, "s={s} z={z}");
            assert!((b.dv[0] - o.dv[0]).abs() < 1e-9, "s={s} z={z}");
        }
    }
}

#[test]
fn solution_approaches_the_large_z_expansion() {
    let sol = OdeSolution::for_s(0.8, 60.0).unwrap();
    let gap = |z: f64| (sol.value(z) - v_large_z_asymptote(z, 0.8, 6)).abs();
    assert!(gap(60.0) < 0.5 * gap(30.0));
    assert!(gap(60.0) < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn first_integral_holds_along_the_solution(s in -0.45f64..3.0, z in 0.05f64..20.0) {
        let p = Painleve::new(s, 20.0).unwrap();
        let j = p.jet(z, 2).unwrap();
        prop_assert!(j.scaled_residual() < 1e-8, "residual {}", j.scaled_residual());
    }
}
