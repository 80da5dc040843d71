//! Randomized properties of the special functions, the characteristic
//! function and the density evaluators.

use std::f64::consts::PI;

use proptest::prelude::*;

use prodnorm::density::{pdf_sum_integral, pdf_sum_reduced, pdf_sum_series, EvalOptions};
use prodnorm::divisibility::{pdf_divisor, verify_divisibility_cf};
use prodnorm::error::Error;
use prodnorm::specfun::{bessel_i, bessel_k, ln_bessel_k, tricomi_u};
use prodnorm::verify::{pdf_cf_inversion, sample_sum, DensityIntegrator};
use prodnorm::{cf_order, pdf, BivariateParams, GridSpec, McConfig, OrderSpec, QuadOptions};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn params() -> impl Strategy<Value = BivariateParams> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.3..3.0f64, 0.3..3.0f64, -0.9..0.9f64)
        .prop_map(|(mx, my, sx, sy, r)| BivariateParams::new(mx, my, sx, sy, r).unwrap())
}

/// Parameters whose Poisson weight stays small enough for default options.
fn moderate_params() -> impl Strategy<Value = BivariateParams> {
    (-1.5..1.5f64, -1.5..1.5f64, 0.5..2.0f64, 0.5..2.0f64, -0.8..0.8f64)
        .prop_map(|(mx, my, sx, sy, r)| BivariateParams::new(mx, my, sx, sy, r).unwrap())
}

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(2.0), Just(3.5), Just(7.0), 0.2..8.0f64]
}

fn nonzero_x() -> impl Strategy<Value = f64> {
    (0.05..8.0f64, any::<bool>()).prop_map(|(x, neg)| if neg { -x } else { x })
}

/// K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt by the trapezoidal rule, which
/// converges geometrically for this integrand.
fn bessel_k_trapezoid(nu: f64, x: f64) -> f64 {
    let h = 0.01;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let v = (-x * t.cosh() + (nu * t).abs()).exp() * 0.5 * (1.0 + (-2.0 * (nu * t).abs()).exp());
        sum += v;
        if v < 1e-18 * sum && t > 1.0 {
            break;
        }
        t += h;
    }
    sum * h
}

/// I_{n+1/2}(x) in elementary form.
fn bessel_i_half(n: u32, x: f64) -> f64 {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    let mut up = 0.0;
    let mut down = 0.0;
    for j in 0..=n {
        let c = fact(n + j) / (fact(j) * fact(n - j)) / (2.0 * x).powi(j as i32);
        up += if j % 2 == 0 { c } else { -c };
        down += c;
    }
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    (up * x.exp() + sign * down * (-x).exp()) / (2.0 * PI * x).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bessel_k_even_in_order_and_matches_quadrature(nu in -5.0..5.0f64, x in 0.05..50.0f64) {
        let k = bessel_k(nu, x).unwrap();
        prop_assert_eq!(k, bessel_k(-nu, x).unwrap());
        prop_assert!(k > 0.0);
        prop_assert!(rel(k, bessel_k_trapezoid(nu, x)) < 1e-8);
    }

    #[test]
    fn bessel_k_log_is_finite_far_out(nu in 0.0..40.0f64, e in -300.0..300.0f64) {
        let l = ln_bessel_k(nu, 10f64.powf(e)).unwrap();
        prop_assert!(l.is_finite());
    }

    #[test]
    fn tricomi_u_positive(a in -3.0..4.0f64, db in 0.0..5.0f64, x in 0.01..30.0f64) {
        let b = a + 1.0 - db;
        let u = tricomi_u(a, b, x).unwrap();
        prop_assert!(u > 0.0, "U({a}, {b}, {x}) = {u}");
    }

    #[test]
    fn half_integer_bessel_i_is_elementary(n in 0u32..3, x in 0.5..10.0f64) {
        let direct = bessel_i(n as f64 + 0.5, x).unwrap();
        prop_assert!(rel(direct, bessel_i_half(n, x)) < 1e-12);
        let minus_half = (2.0 / (PI * x)).sqrt() * x.cosh();
        prop_assert!(rel(bessel_i(-0.5, x).unwrap(), minus_half) < 1e-12);
    }

    #[test]
    fn series_never_truncates_silently(par in params(), nu in order(), x in nonzero_x(), max_k in 1usize..40) {
        let opts = EvalOptions { max_k, ..EvalOptions::default() };
        match pdf_sum_series(&par, OrderSpec { nu }, x, &opts) {
            Ok(r) => prop_assert!(r.terms_used <= max_k + 1),
            Err(e) => prop_assert!(matches!(e, Error::NonConvergence { .. }), "{e}"),
        }
    }

    #[test]
    fn cf_hermitian_and_bounded(par in params(), nu in order(), t in -20.0..20.0f64) {
        prop_assume!(t != 0.0);
        let o = OrderSpec { nu };
        let a = cf_order(&par, o, t);
        let b = cf_order(&par, o, -t);
        prop_assert!((a - b.conj()).norm() <= 1e-15 * a.norm().max(1e-300));
        prop_assert!(a.norm() < 1.0);
    }

    #[test]
    fn cf_first_moment(par in moderate_params(), nu in order()) {
        let o = OrderSpec { nu };
        let h = 1e-5;
        let d = (cf_order(&par, o, h) - cf_order(&par, o, -h)) / (2.0 * h);
        let mean = nu * par.product_moments().0;
        prop_assert!((d.im - mean).abs() < 1e-6 * mean.abs().max(1.0), "{} {}", d.im, mean);
        prop_assert!(d.re.abs() < 1e-6);
    }

    #[test]
    fn cf_divisor_power(par in params(), m in prop_oneof![Just(2u32), Just(3), Just(7)]) {
        let ts: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.2).collect();
        prop_assert!(verify_divisibility_cf(&par, m, &ts).unwrap() < 1e-12);
    }

    #[test]
    fn series_reflection(par in moderate_params(), nu in order(), x in nonzero_x()) {
        let e = EvalOptions::default();
        let a = pdf_sum_series(&par, OrderSpec { nu }, -x, &e).unwrap();
        let b = pdf_sum_series(&par.reflected(), OrderSpec { nu }, x, &e).unwrap();
        prop_assert!((a.ln_value - b.ln_value).abs() < 1e-11);
        prop_assert!(a.value >= 0.0 && a.ln_value.is_finite());
    }

    #[test]
    fn divisor_nonnegative(par in moderate_params(), m in prop_oneof![Just(1u32), Just(2), Just(3), Just(5), Just(10)], x in -10.0..10.0f64) {
        let v = pdf_divisor(&par, m, x, &EvalOptions::default()).unwrap();
        prop_assert!(v.value >= 0.0);
    }

    #[test]
    fn divisor_grows_towards_zero(par in moderate_params(), m in 2u32..11) {
        let e = EvalOptions::default();
        let vals: Vec<f64> = (2..=6).map(|k| pdf_divisor(&par, m, 10f64.powi(-k), &e).unwrap().value).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn integral_continuous_across_equal_ratio(mx in -1.5..1.5f64, sx in 0.5..2.0f64, sy in 0.5..2.0f64, r in -0.8..0.8f64, nu in order(), x in nonzero_x()) {
        prop_assume!(mx.abs() > 0.1);
        let q = QuadOptions::default();
        let o = OrderSpec { nu };
        let at = |d: f64| {
            let par = BivariateParams::new(mx, mx / sx * sy * (1.0 + d), sx, sy, r).unwrap();
            pdf_sum_integral(&par, o, x, &q).unwrap().value
        };
        let edge = pdf_sum_reduced(&BivariateParams::new(mx, mx / sx * sy, sx, sy, r).unwrap(), o, x, &EvalOptions::default()).unwrap().value;
        let (a, b) = (at(1e-3), at(1e-5));
        prop_assert!((b - edge).abs() < (a - edge).abs() + 1e-12 * edge);
        // density of x/(σXσY), so the bound does not depend on the scale
        prop_assert!((b - edge).abs() * sx * sy < 1e-5);
    }

    #[test]
    fn three_representations_agree(par in moderate_params(), nu in 2.0..8.0f64, x in nonzero_x()) {
        let q = QuadOptions::default();
        let o = OrderSpec { nu };
        let s = pdf_sum_series(&par, o, x, &EvalOptions::default()).unwrap();
        let g = pdf_sum_integral(&par, o, x, &q).unwrap();
        let c = pdf_cf_inversion(&par, o, x, &q).unwrap();
        prop_assert!((s.ln_value - g.ln_value).abs() < 1e-7);
        prop_assert!((s.ln_value - c.ln_value).abs() < 1e-5);
    }

    #[test]
    fn cdf_grid_monotone(par in moderate_params(), nu in order()) {
        let (mean, sd) = par.product_moments();
        let o = OrderSpec { nu };
        let integ = DensityIntegrator::new(|x| pdf(&par, o, x), nu * mean, nu.sqrt() * sd, QuadOptions::default());
        let w = 6.0 * nu.sqrt() * sd;
        let grid = GridSpec::new(nu * mean - w, nu * mean + w, 41).unwrap();
        let cdf = integ.cdf_grid(&grid).unwrap();
        prop_assert!(cdf.windows(2).all(|p| p[1] >= p[0]));
        prop_assert!(cdf[0] >= 0.0 && cdf[cdf.len() - 1] <= 1.0);
    }

    #[test]
    fn sampling_is_a_function_of_the_seed(par in params(), n in 1u32..5, seed in any::<u64>(), batch in 1usize..3000) {
        let a = McConfig { n_samples: 5000, seed, batch: 4096 };
        let b = McConfig { batch, ..a };
        let x = sample_sum(&par, n, &a).unwrap();
        prop_assert_eq!(&x, &sample_sum(&par, n, &a).unwrap());
        prop_assert_eq!(&x, &sample_sum(&par, n, &b).unwrap());
    }
}
