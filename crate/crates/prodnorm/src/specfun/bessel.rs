//! Modified Bessel functions I_ν and K_ν of real order and positive argument.

use std::f64::consts::PI;

use super::gamma::{ln_gamma_pos, sin_pi};
use super::{SeriesValue, SpecFunOptions};
use crate::error::{domain, Error, Result};

/// ln |I_ν(x)| together with the sign of I_ν(x) and the number of terms used.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LnSigned {
    pub ln_abs: f64,
    pub sign: f64,
    pub terms: usize,
}

fn is_integer(v: f64) -> bool {
    v == v.floor()
}

fn check_i_args(nu: f64, x: f64) -> Result<()> {
    if !nu.is_finite() || !x.is_finite() {
        return Err(domain("bessel_i", "non-finite argument"));
    }
    if x < 0.0 {
        return Err(domain("bessel_i", format!("x = {x} < 0")));
    }
    if x == 0.0 && nu < 0.0 && !is_integer(nu) {
        return Err(domain("bessel_i", "negative non-integer order at x = 0"));
    }
    Ok(())
}

/// Hankel expansion of ln I_ν(x) for large x. Returns `None` when the
/// asymptotic series does not reach full precision before diverging.
fn ln_bessel_i_asymptotic(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() > term.abs() {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            return Some(x - 0.5 * (2.0 * PI * x).ln() + sum.ln());
        }
    }
    None
}

/// Power series for ν > −1 summed outward from its largest term.
fn ln_bessel_i_series_pos(nu: f64, x: f64, opts: &SpecFunOptions) -> Result<LnSigned> {
    let half = 0.5 * x;
    let y = half * half;
    let root = 0.5 * (-(nu + 2.0) + (nu * nu + 4.0 * y).sqrt());
    let kmax = if root > 0.0 { root.floor() as usize + 1 } else { 0 };
    let kf = kmax as f64;
    let ln_peak = (2.0 * kf + nu) * half.ln() - ln_gamma_pos(kf + 1.0) - ln_gamma_pos(kf + nu + 1.0);
    let mut sum = 1.0f64;
    let mut terms = 1usize;
    let tol = opts.rel_tol;

    let mut term = 1.0f64;
    let mut k = kmax;
    while k > 0 {
        let kf = k as f64;
        term *= kf * (kf + nu) / y;
        sum += term;
        terms += 1;
        k -= 1;
        if term < tol * sum {
            break;
        }
    }

    term = 1.0;
    k = kmax;
    loop {
        let kf = k as f64;
        term *= y / ((kf + 1.0) * (kf + nu + 1.0));
        sum += term;
        terms += 1;
        k += 1;
        if term < tol * sum {
            break;
        }
        if terms > opts.max_terms {
            return Err(Error::NonConvergence {
                what: "bessel_i series",
                terms,
            });
        }
    }
    Ok(LnSigned {
        ln_abs: ln_peak + sum.ln(),
        sign: 1.0,
        terms,
    })
}

/// Series for ν < −1, ν non-integer, where the leading terms carry signs.
fn ln_bessel_i_series_signed(nu: f64, x: f64, opts: &SpecFunOptions) -> Result<LnSigned> {
    let lh = (0.5 * x).ln();
    let mut logs = Vec::new();
    let mut signs = Vec::new();
    let first_positive = (-nu - 1.0).ceil().max(0.0) as usize;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let g = kf + nu + 1.0;
        let ln_abs_gamma = if g > 0.0 {
            ln_gamma_pos(g)
        } else {
            PI.ln() - sin_pi(g).abs().ln() - ln_gamma_pos(1.0 - g)
        };
        let sign = if g > 0.0 || (g.floor() as i64) % 2 == 0 { 1.0 } else { -1.0 };
        logs.push((2.0 * kf + nu) * lh - ln_gamma_pos(kf + 1.0) - ln_abs_gamma);
        signs.push(sign);
        k += 1;
        if k > opts.max_terms {
            return Err(Error::NonConvergence {
                what: "bessel_i series",
                terms: k,
            });
        }
        if k > first_positive + 1 {
            let n = logs.len();
            let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if logs[n - 1] < logs[n - 2] && logs[n - 1] < peak + opts.rel_tol.ln() {
                break;
            }
        }
    }
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs
        .iter()
        .zip(&signs)
        .map(|(l, s)| s * (l - peak).exp())
        .sum();
    Ok(LnSigned {
        ln_abs: peak + sum.abs().ln(),
        sign: sum.signum(),
        terms: logs.len(),
    })
}

pub(crate) fn ln_bessel_i_signed(nu: f64, x: f64, opts: &SpecFunOptions) -> Result<LnSigned> {
    check_i_args(nu, x)?;
    let nu = if nu < 0.0 && is_integer(nu) { -nu } else { nu };
    if x == 0.0 {
        let ln_abs = if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        return Ok(LnSigned {
            ln_abs,
            sign: 1.0,
            terms: 1,
        });
    }
    if nu > -1.0 {
        if x > 40.0_f64.max(2.0 * nu * nu) {
            if let Some(l) = ln_bessel_i_asymptotic(nu, x) {
                return Ok(LnSigned {
                    ln_abs: l,
                    sign: 1.0,
                    terms: 0,
                });
            }
        }
        ln_bessel_i_series_pos(nu, x, opts)
    } else {
        ln_bessel_i_series_signed(nu, x, opts)
    }
}

/// ln I_ν(x) for the orders where I_ν is positive (ν > −1 or integer ν), x > 0.
pub fn ln_bessel_i(nu: f64, x: f64) -> Result<f64> {
    let r = ln_bessel_i_signed(nu, x, &SpecFunOptions::default())?;
    if r.sign <= 0.0 {
        return Err(domain("ln_bessel_i", "I_nu(x) is not positive"));
    }
    Ok(r.ln_abs)
}

/// Fast ln I_ν(x) for ν > −1 and x > 0, used inside integrands.
pub(crate) fn ln_bessel_i_fast(nu: f64, x: f64) -> f64 {
    debug_assert!(nu > -1.0 && x > 0.0);
    if x > 40.0_f64.max(2.0 * nu * nu) {
        if let Some(l) = ln_bessel_i_asymptotic(nu, x) {
            return l;
        }
    }
    let opts = SpecFunOptions {
        max_terms: usize::MAX,
        ..SpecFunOptions::default()
    };
    match ln_bessel_i_series_pos(nu, x, &opts) {
        Ok(r) => r.ln_abs,
        Err(_) => f64::NAN,
    }
}

/// Modified Bessel function of the first kind, I_ν(x).
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    let r = ln_bessel_i_signed(nu, x, &SpecFunOptions::default())?;
    let v = r.ln_abs.exp();
    if !v.is_finite() {
        return Err(Error::Overflow("bessel_i"));
    }
    Ok(r.sign * v)
}

/// e^{−x} I_ν(x).
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    let r = ln_bessel_i_signed(nu, x, &SpecFunOptions::default())?;
    Ok(r.sign * (r.ln_abs - x).exp())
}

/// I_ν(x) by its power series with explicit tolerances, reporting the terms used.
pub fn bessel_i_series_with(nu: f64, x: f64, opts: &SpecFunOptions) -> Result<SeriesValue> {
    opts.validate()?;
    check_i_args(nu, x)?;
    let nu = if nu < 0.0 && is_integer(nu) { -nu } else { nu };
    if x == 0.0 {
        return Ok(SeriesValue {
            value: if nu == 0.0 { 1.0 } else { 0.0 },
            terms: 1,
        });
    }
    let r = if nu > -1.0 {
        ln_bessel_i_series_pos(nu, x, opts)?
    } else {
        ln_bessel_i_series_signed(nu, x, opts)?
    };
    let value = r.sign * r.ln_abs.exp();
    if !value.is_finite() {
        return Err(Error::Overflow("bessel_i"));
    }
    Ok(SeriesValue {
        value,
        terms: r.terms,
    })
}

/// −(sinh d − d), accurate for small d.
fn sinh_minus_id(d: f64) -> f64 {
    if d.abs() < 0.1 {
        let d2 = d * d;
        d * d2 * (1.0 / 6.0 + d2 * (1.0 / 120.0 + d2 * (1.0 / 5040.0 + d2 / 362_880.0)))
    } else {
        d.sinh() - d
    }
}

/// ln K_ν(x) by the trapezoidal rule on K_ν(x) = ½∫ exp(−x cosh s + νs) ds,
/// the integral representation with t = (x/2)e^s, centred on its maximum.
pub(crate) fn ln_bessel_k_quad(nu: f64, x: f64, budget: usize) -> Result<(f64, usize)> {
    let nu = nu.abs();
    let r = x.hypot(nu);
    let s_star = (nu / x).asinh();
    let phi_star = -r + nu * s_star;
    let width = 1.0 / r.sqrt();
    // log-integrand relative to its maximum at displacement d from s*
    let ln_half_x = (0.5 * x).ln();
    let delta = |d: f64| {
        if d.abs() < 1.0 {
            let sh = (0.5 * d).sinh();
            -2.0 * r * sh * sh - nu * sinh_minus_id(d)
        } else {
            // away from the peak the two terms no longer nearly cancel
            let s = (s_star + d).abs();
            let x_cosh = (ln_half_x + s).exp() + (ln_half_x - s).exp();
            r - x_cosh + nu * d
        }
    };
    const CUTOFF: f64 = -46.0;
    // for x → 0 the integrand is flat over |s| ≲ ln(2/x), so the node count
    // grows with that length
    let budget = (budget as f64 * (1.0 + (1.0 + 1.0 / x).ln() / 8.0)) as usize;

    let mut h = width.min(0.5);
    let mut evals = 0usize;
    let side_sum = |h: f64, start: usize, step: usize, evals: &mut usize| -> f64 {
        let mut acc = 0.0;
        for dir in [1.0, -1.0] {
            let mut j = start;
            loop {
                let v = delta(dir * j as f64 * h);
                *evals += 1;
                if !(v >= CUTOFF) {
                    break;
                }
                acc += v.exp();
                j += step;
            }
        }
        acc
    };
    let mut sum = 1.0 + side_sum(h, 1, 1, &mut evals);
    let mut estimate = sum * h;
    let mut refinements = 0;
    loop {
        let odd = side_sum(h / 2.0, 1, 2, &mut evals);
        sum += odd;
        h /= 2.0;
        let next = sum * h;
        let diff = ((next - estimate) / next).abs();
        estimate = next;
        refinements += 1;
        if diff < 1e-9 && refinements >= 1 {
            break;
        }
        if evals > budget {
            return Err(Error::NonConvergence {
                what: "bessel_k quadrature",
                terms: evals,
            });
        }
    }
    Ok((phi_star + estimate.ln() - std::f64::consts::LN_2, evals))
}

fn check_k_args(nu: f64, x: f64) -> Result<()> {
    if !nu.is_finite() || !x.is_finite() {
        return Err(domain("bessel_k", "non-finite argument"));
    }
    if x <= 0.0 {
        return Err(domain("bessel_k", format!("x = {x} must be positive")));
    }
    Ok(())
}

/// ln K_ν(x), x > 0.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    check_k_args(nu, x)?;
    Ok(ln_bessel_k_quad(nu, x, SpecFunOptions::default().quad_points)?.0)
}

/// Modified Bessel function of the second kind, K_ν(x), x > 0.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(ln_bessel_k(nu, x)?.exp())
}

/// e^{x} K_ν(x).
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    Ok((ln_bessel_k(nu, x)? + x).exp())
}

/// K_ν(x) with an explicit quadrature budget (`opts.quad_points`).
pub fn bessel_k_with(nu: f64, x: f64, opts: &SpecFunOptions) -> Result<SeriesValue> {
    opts.validate()?;
    check_k_args(nu, x)?;
    let (l, evals) = ln_bessel_k_quad(nu, x, opts.quad_points)?;
    Ok(SeriesValue {
        value: l.exp(),
        terms: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn k_half_integer_closed_form() {
        for x in [0.5, 1.0, 5.0, 30.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x).unwrap(), exact) < 1e-14, "x={x}");
        }
        // K_{3/2}(x) = sqrt(pi/2x) e^{-x} (1 + 1/x)
        let x = 2.0;
        let exact = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
        assert!(rel(bessel_k(1.5, x).unwrap(), exact) < 1e-14);
    }

    #[test]
    fn k_reference_values() {
        // K_0(1), K_1(1), K_0(0.001), K_10(0.5)
        assert!(rel(bessel_k(0.0, 1.0).unwrap(), 0.421_024_438_240_708_3) < 1e-14);
        assert!(rel(bessel_k(1.0, 1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-14);
        assert!(rel(bessel_k(0.0, 1e-3).unwrap(), 7.023_688_800_562_381) < 1e-13);
        assert!(rel(bessel_k(10.0, 0.5).unwrap(), 1.889_375_693_199_002_6e11) < 1e-12);
        assert!(rel(ln_bessel_k(0.3, 700.0).unwrap(), -703.049_863_019_078) < 1e-14);
    }

    #[test]
    fn k_domain() {
        assert!(bessel_k(0.0, 0.0).is_err());
        assert!(bessel_k(0.0, -1.0).is_err());
    }

    #[test]
    fn i_reference_values() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert!(rel(bessel_i(0.0, 1.0).unwrap(), 1.266_065_877_752_008_4) < 1e-14);
        assert!(rel(bessel_i(2.5, 3.0).unwrap(), 1.515_339_446_681_965) < 1e-13);
        assert!(rel(bessel_i(1.0, 100.0).unwrap(), 1.068_369_390_338_162_5e42) < 1e-13);
        assert!(rel(bessel_i(-1.0, 2.0).unwrap(), bessel_i(1.0, 2.0).unwrap()) < 1e-15);
        // I_{-3/2}(x) = sqrt(2/(pi x)) (sinh x - cosh x / x)
        let x: f64 = 1.3;
        let exact = (2.0 / (PI * x)).sqrt() * (x.sinh() - x.cosh() / x);
        assert!(rel(bessel_i(-1.5, x).unwrap(), exact) < 1e-13);
    }

    #[test]
    fn i_series_and_asymptotic_agree_at_switch() {
        let opts = SpecFunOptions::default();
        for (nu, x) in [(0.0, 45.0), (2.3, 41.0), (-0.4, 60.0), (4.0, 80.0)] {
            let a = ln_bessel_i_asymptotic(nu, x).unwrap();
            let s = ln_bessel_i_series_pos(nu, x, &opts).unwrap().ln_abs;
            assert!((a - s).abs() < 1e-14 * a.abs().max(1.0), "nu={nu} x={x}");
        }
    }

    #[test]
    fn i_series_reports_terms() {
        let opts = SpecFunOptions {
            max_terms: 3,
            ..SpecFunOptions::default()
        };
        assert!(matches!(
            bessel_i_series_with(0.0, 50.0, &opts),
            Err(Error::NonConvergence { .. })
        ));
        let r = bessel_i_series_with(0.0, 1.0, &SpecFunOptions::default()).unwrap();
        assert!(r.terms >= 5 && r.terms <= SpecFunOptions::default().max_terms);
    }

    #[test]
    fn i_domain() {
        assert!(bessel_i(0.5, -1.0).is_err());
        assert!(bessel_i(-0.5, 0.0).is_err());
        assert_eq!(bessel_i(-2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(bessel_i(0.0, 800.0), Err(Error::Overflow(_))));
        assert!(bessel_i_scaled(0.0, 800.0).unwrap() > 0.0);
    }
}
