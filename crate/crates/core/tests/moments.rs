use num_complex::Complex64;
use painleve_core::charfn::build_charfn;
use painleve_core::density::{density_eval, density_moment};
use painleve_core::moments::{f_derivative_branch, f_integral_branch, f_kernel_eps, f_moment, hua_pickrell_moment};
use proptest::prelude::*;

#[test]
fn first_joint_moment_is_one_twelfth() {
    let table = build_charfn(1.0, 50.0, 4).unwrap();
    let r = f_moment(Complex64::new(1.0, 0.0), &table).unwrap();
    assert!((r.value.re - 1.0 / 12.0).abs() < 1e-12);
}

#[test]
fn derivative_and_kernel_branches_agree_at_integer_h() {
    let table = build_charfn(2.0, 50.0, 4).unwrap();
    let d = f_derivative_branch(1, &table).unwrap().value.re;
    let k = f_kernel_eps(Complex64::new(1.0, 0.0), &table).unwrap().value.re;
    assert!((d - k).abs() < 1e-4 * d.abs(), "{d} vs {k}");
}

#[test]
fn density_and_characteristic_moments_agree() {
    for (s, h) in [(0.7, 0.3), (1.5, 0.8), (2.0, 1.2)] {
        let table = build_charfn(s, 50.0, 4).unwrap();
        let a = hua_pickrell_moment(h, &table).unwrap();
        let b = density_moment(&table, 2.0 * h).unwrap();
        assert!((a - b).abs() < 1e-6 * a, "s={s} h={h}: {a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernel_route_tracks_the_integral_route(s in 0.6f64..2.0, frac in 0.1f64..0.7) {
        let h = Complex64::new(frac * (s + 0.5), 0.0);
        let table = build_charfn(s, 50.0, 4).unwrap();
        let a = f_integral_branch(h, &table).unwrap().value.re;
        let k = f_kernel_eps(h, &table).unwrap().value.re;
        prop_assert!((a - k).abs() < 1e-3 * a.abs(), "{} vs {}", a, k);
    }

    #[test]
    fn density_is_a_probability(s in -0.4f64..2.5) {
        let table = build_charfn(s, 50.0, 4).unwrap();
        let xs: Vec<f64> = (0..41).map(|k| -10.0 + 0.5 * k as f64).collect();
        let g = density_eval(&xs, &table).unwrap();
        prop_assert!(g.mass_defect < 1e-8);
        prop_assert!(g.min_value > 0.0);
    }
}
