use num_complex::Complex64;
use painleve_core::finite_n::*;
use painleve_core::painleve::OdeSolution;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn characteristic_route_matches_weyl_quadrature() {
    for (n, s, h, tol) in [(1, 0.5, 0.25, 1e-6), (2, 1.0, 0.5, 1e-4), (2, 1.2, 0.7, 1e-4)] {
        let a = f_finite_n(n, s, Complex64::new(h, 0.0), FiniteNMethod::Characteristic).unwrap();
        let b = f_finite_n(n, s, Complex64::new(h, 0.0), FiniteNMethod::Weyl).unwrap();
        assert!(rel(a.value.re, b.value.re) < tol, "{n} {s} {h}: {} vs {}", a.value.re, b.value.re);
    }
}

#[test]
fn zero_moment_is_selberg_product() {
    let r = f_finite_n(1, 1.0, Complex64::new(0.0, 0.0), FiniteNMethod::Characteristic).unwrap();
    assert!((r.value.re - 2.0).abs() < 1e-14);
    let w = cue_weyl_quadrature(1, 1.0, 0.0).unwrap();
    assert!((w - 2.0).abs() < 1e-12);
}

#[test]
fn second_moment_extrapolates_to_limit() {
    // Richardson in 1/N through N = 4, 8, 12 against F(1,1) = 1/12
    let g: Vec<f64> = [4usize, 8, 12]
        .iter()
        .map(|&n| f_finite_n(n, 1.0, Complex64::new(1.0, 0.0), FiniteNMethod::Characteristic).unwrap().value.re / (n as f64).powi(3))
        .collect();
    assert!(g[0] > g[1] && g[1] > g[2] && g[2] > 1.0 / 12.0);
    let x = [0.25, 0.125, 1.0 / 12.0];
    // quadratic through the three points, evaluated at 1/N = 0
    let l0 = x[1] * x[2] / ((x[0] - x[1]) * (x[0] - x[2]));
    let l1 = x[0] * x[2] / ((x[1] - x[0]) * (x[1] - x[2]));
    let l2 = x[0] * x[1] / ((x[2] - x[0]) * (x[2] - x[1]));
    let extrapolated = l0 * g[0] + l1 * g[1] + l2 * g[2];
    assert!(rel(extrapolated, 1.0 / 12.0) < 0.02, "{extrapolated}");
}

#[test]
fn degeneration_rate_is_one_over_n() {
    for (s, z) in [(1.0, 2.0), (0.7, 1.5)] {
        let v = OdeSolution::for_s(s, 10.0).unwrap().value(z);
        let d20 = (v_finite_n(z, 20, s).unwrap() - v).abs();
        let d40 = (v_finite_n(z, 40, s).unwrap() - v).abs();
        let ratio = d20 / d40;
        assert!((1.7..=2.3).contains(&ratio), "s = {s}: ratio {ratio}");
    }
}

#[test]
fn scaled_error_constant_is_stable() {
    let s = 1.0;
    let sol = OdeSolution::for_s(s, 10.0).unwrap();
    let zs: Vec<f64> = (0..10).map(|k| 0.5 + 0.5 * k as f64).collect();
    let c: Vec<f64> = [10usize, 20, 40]
        .iter()
        .map(|&n| {
            let worst = zs.iter().map(|&z| (v_finite_n(z, n, s).unwrap() - sol.value(z)).abs()).fold(0.0, f64::max);
            worst * n as f64
        })
        .collect();
    assert!(c.iter().all(|&x| (x - c[2]).abs() < 0.1 * c[2]), "{c:?}");
}

#[test]
fn hankel_determinant_is_positive() {
    for n in [1, 3, 5, 8] {
        for s in [-0.4, 0.3, 1.0, 2.5] {
            for xi in [0.05, 0.5, 2.0, 10.0] {
                match w_hankel(n, xi, s) {
                    Ok(job) => assert!(job.logdet.is_finite()),
                    Err(painleve_core::Error::Conditioning { .. }) => {}
                    Err(e) => panic!("{n} {s} {xi}: {e}"),
                }
                let (lw, u) = op_hankel(n, xi, s).unwrap();
                assert!(lw.is_finite() && u.is_finite());
            }
        }
    }
}

#[test]
fn characteristic_function_is_a_decreasing_probability() {
    let data = FiniteNData::new(3, 0.8).unwrap();
    let mut prev = 0.0;
    for k in 1..60 {
        let ln_u = data.ln_u(0.05 * k as f64).unwrap();
        assert!(ln_u < prev, "τ = {}", 0.05 * k as f64);
        prev = ln_u;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transformation_identity_holds(t in 0.2f64..3.0, s in 0.1f64..2.0, n in 1usize..4) {
        let a = hyp_u_hankel(n, t, s).unwrap();
        let b = hyp_u_hankel_direct(n, t, s).unwrap();
        prop_assert!(rel(a, b) < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn confluent_and_weight_forms_agree(xi in 0.1f64..3.0, s in 0.1f64..2.0, n in 1usize..5) {
        let a = j_from_confluent(n, xi, s).unwrap();
        let b = j_from_weight(n, xi, s).unwrap();
        prop_assert!(rel(a, b) < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn laguerre_reduction_holds(t in 0.1f64..3.0, s in 1u32..4, n in 1usize..6) {
        let sf = s as f64;
        let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let gamma_n = painleve_core::specfun::lngamma(sf + n as f64).unwrap();
        let lhs = sign * hyp_u_hankel(n, t, sf).unwrap() * (-(n as f64) * gamma_n).exp();
        let rhs = laguerre_hankel(n, t, s).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-9, "{} vs {}", lhs, rhs);
    }
}
