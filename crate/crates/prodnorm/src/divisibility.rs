//! Infinite divisibility of XY: the law of order 1/m is an m-th
//! convolution root of the product law.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfun::cf_order;
use crate::density::{pdf_sum_series, EvalOptions, EvalResult};
use crate::error::{Error, Result};
use crate::method::pdf;
use crate::params::{BivariateParams, OrderSpec};
use crate::quad::{quad_finite, QuadOptions};
use crate::verify::{DensityIntegrator, GridSpec};

/// Cells within this many steps of 0 are integrated directly rather than by
/// Simpson's rule, because of the singularity of the divisor density at 0.
const NEAR_CELLS: i64 = 8;

/// Largest tail mass outside the grid accepted by the convolution check.
pub const MAX_TAIL_MASS: f64 = 1e-8;

/// Density of the m-th divisor, the sum series at order 1/m.
pub fn pdf_divisor(params: &BivariateParams, m: u32, x: f64, opts: &EvalOptions) -> Result<EvalResult> {
    pdf_sum_series(params, OrderSpec::divisor(m)?, x, opts)
}

/// max over the grid of |φ_{1/m}(t)^m − φ₁(t)|.
pub fn verify_divisibility_cf(params: &BivariateParams, m: u32, t_grid: &[f64]) -> Result<f64> {
    params.validate()?;
    let root = OrderSpec::divisor(m)?;
    let one = OrderSpec { nu: 1.0 };
    Ok(t_grid
        .iter()
        .map(|&t| {
            let lhs: Complex64 = cf_order(params, root, t).powi(m as i32);
            (lhs - cf_order(params, one, t)).norm()
        })
        .fold(0.0, f64::max))
}

/// Convolves m copies of the divisor density on the grid and returns the
/// largest relative deviation from the density of XY over the grid points
/// in `window` with |x| ≥ 0.05σXσY.
///
/// The divisor law is discretized into cell masses on the lattice hℤ with h
/// the grid step; the m-fold discrete convolution of those masses, divided
/// by h, approximates the density of XY at the lattice points to O(h²).
pub fn verify_divisibility_convolution(
    params: &BivariateParams,
    m: u32,
    grid: &GridSpec,
    window: (f64, f64),
) -> Result<f64> {
    params.validate()?;
    grid.validate()?;
    if !(1..=3).contains(&m) {
        return Err(Error::InvalidParams(format!("convolution check supports m in 1..=3, got {m}")));
    }
    if m == 1 {
        return Ok(0.0);
    }
    let h = grid.step();
    let kmin = (grid.lo / h).ceil() as i64;
    let kmax = (grid.hi / h).floor() as i64;
    if kmin >= 0 || kmax <= 0 {
        return Err(Error::InvalidParams("convolution grid must contain 0 in its interior".into()));
    }
    let order = OrderSpec::divisor(m)?;
    let opts = EvalOptions::default();
    let q = QuadOptions::default();
    let f = |x: f64| pdf_sum_series(params, order, x, &opts);
    let (mean, sd) = params.product_moments();
    let integ = DensityIntegrator::new(f, order.nu * mean, order.nu.sqrt() * sd, q);
    let outside = integ.lower_tail(-(kmin as f64 - 0.5) * h)? + integ.upper_tail((kmax as f64 + 0.5) * h)?;
    if outside > MAX_TAIL_MASS {
        return Err(Error::Precondition(format!(
            "divisor mass outside the grid is {outside:e}; widen the grid"
        )));
    }

    // values on the half-step lattice, index j ↔ x = j·h/2
    let jlo = 2 * kmin - 1;
    let half: Vec<f64> = (jlo..=2 * kmax + 1)
        .into_par_iter()
        .map(|j| {
            if j.abs() <= 2 * NEAR_CELLS {
                return Ok(0.0);
            }
            Ok(f(j as f64 * 0.5 * h)?.value)
        })
        .collect::<Result<_>>()?;
    let cell = |k: i64| -> Result<f64> {
        if k.abs() <= NEAR_CELLS {
            let (a, b) = ((k as f64 - 0.5) * h, (k as f64 + 0.5) * h);
            let g = |x: f64| f(x).map(|r| r.value).unwrap_or(f64::NAN);
            let v = if k == 0 {
                quad_finite(g, a, 0.0, &q)?.0 + quad_finite(g, 0.0, b, &q)?.0
            } else {
                quad_finite(g, a, b, &q)?.0
            };
            if !v.is_finite() {
                return Err(Error::Quadrature {
                    what: "divisor cell mass",
                    rel_err: f64::NAN,
                });
            }
            return Ok(v);
        }
        let j = (2 * k - jlo) as usize;
        Ok(h / 6.0 * (half[j - 1] + 4.0 * half[j] + half[j + 1]))
    };
    let masses: Vec<f64> = (kmin..=kmax).into_par_iter().map(cell).collect::<Result<_>>()?;

    let mut conv = masses.clone();
    for _ in 1..m {
        conv = convolve(&conv, &masses);
    }
    let offset = m as i64 * kmin;
    let s = params.scale();
    let points: Vec<i64> = (offset..offset + conv.len() as i64)
        .filter(|&k| {
            let x = k as f64 * h;
            x >= window.0 && x <= window.1 && x.abs() >= 0.05 * s
        })
        .collect();
    if points.is_empty() {
        return Err(Error::InvalidParams("comparison window holds no lattice points".into()));
    }
    let one = OrderSpec { nu: 1.0 };
    let devs: Vec<f64> = points
        .par_iter()
        .map(|&k| {
            let target = pdf(params, one, k as f64 * h)?.value;
            let approx = conv[(k - offset) as usize] / h;
            Ok((approx - target).abs() / target)
        })
        .collect::<Result<_>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        let lo = i.saturating_sub(b.len() - 1);
        let hi = i.min(a.len() - 1);
        *o = (lo..=hi).map(|j| a[j] * b[i - j]).sum();
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mx: f64, my: f64, sx: f64, sy: f64, r: f64) -> BivariateParams {
        BivariateParams::new(mx, my, sx, sy, r).unwrap()
    }

    #[test]
    fn cf_power_identity() {
        let t: Vec<f64> = (0..101).map(|i| -20.0 + 0.4 * i as f64).collect();
        for par in [p(1.0, -0.5, 2.0, 0.7, 0.3), p(0.0, 0.0, 1.0, 1.0, 0.0)] {
            for m in [1, 2, 3, 7] {
                assert!(verify_divisibility_cf(&par, m, &t).unwrap() < 1e-12);
            }
        }
        assert_eq!(verify_divisibility_cf(&p(1.0, 2.0, 1.0, 1.0, 0.2), 3, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn order_one_divisor_is_the_product() {
        let par = p(1.0, -0.5, 2.0, 0.7, 0.3);
        let e = EvalOptions::default();
        let a = pdf_divisor(&par, 1, 0.4, &e).unwrap();
        let b = pdf_sum_series(&par, OrderSpec { nu: 1.0 }, 0.4, &e).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn divisor_grows_towards_zero() {
        let par = p(1.0, -0.5, 2.0, 0.7, 0.3);
        let e = EvalOptions::default();
        let vals: Vec<f64> = (2..=6).map(|k| pdf_divisor(&par, 3, 10f64.powi(-k), &e).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        assert!(pdf_divisor(&par, 3, 0.0, &e).unwrap().is_singular());
    }

    #[test]
    fn convolution_zero_means() {
        let par = p(0.0, 0.0, 1.0, 1.0, 0.0);
        let g = GridSpec::new(-40.0, 40.0, 4097).unwrap();
        let d = verify_divisibility_convolution(&par, 2, &g, (0.2, 6.0)).unwrap();
        assert!(d < 1e-3, "{d}");
    }
}
