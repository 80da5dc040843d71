//! Single-integral representations of the density, evaluated by
//! double-exponential quadrature in log space.

use std::f64::consts::{LN_2, PI};

use super::{check_x, EvalResult, Method};
use crate::error::{domain, Error, Result};
use crate::params::{BivariateParams, OrderSpec};
use crate::quad::{quad_semiinfinite_ln, QuadOptions};
use crate::specfun::{ln_bessel_i_fast, ln_gamma_pos, ln_hyp_0f1};

/// ln of (z/2)^{−p} I_p(z), which tends to −ln Γ(p+1) as z → 0.
fn ln_bessel_i_normalized(p: f64, z: f64) -> f64 {
    if z == 0.0 {
        return -ln_gamma_pos(p + 1.0);
    }
    if z < 1e-8 {
        return -ln_gamma_pos(p + 1.0) + z * z / (4.0 * (p + 1.0));
    }
    ln_bessel_i_fast(p, z) - p * (0.5 * z).ln()
}

/// Density of the order-ν sum as an integral over (0, ∞) of a product of
/// two modified Bessel functions of the first kind.
///
/// For x > 0, with p = ν/2 − 1, A = |mx − my|, B = |mx + my| and
/// a = A√(νx)/(1−ρ), b = B√(νx)/(1+ρ) in standardized units,
///
/// f̃(x) = x^{ν−1} e^{−λ − x/(1+ρ)} / (1−ρ²)^{ν/2}
///        ∫₀^∞ (t(1+t))^p e^{−2xt/(1−ρ²)} Ĩ_p(a√t) Ĩ_p(b√(1+t)) dt
///
/// where Ĩ_p(z) = (z/2)^{−p} I_p(z). Negative x is handled through the law
/// of −XY. The representation does not cover x = 0.
pub fn pdf_sum_integral(params: &BivariateParams, order: OrderSpec, x: f64, q: &QuadOptions) -> Result<EvalResult> {
    params.validate()?;
    order.validate()?;
    q.validate()?;
    check_x(x)?;
    if x == 0.0 {
        return Err(domain("pdf_sum_integral", "the integral form does not cover x = 0"));
    }
    let (par, x) = if x < 0.0 { (params.reflected(), -x) } else { (*params, x) };
    let st = par.standardized();
    let s = par.scale();
    let xt = x / s;
    let nu = order.nu;
    let rho = st.rho;
    let one_m = (1.0 - rho) * (1.0 + rho);
    let p = 0.5 * nu - 1.0;
    let lambda = nu * st.rate();
    let big_a = (st.mx - st.my).abs();
    let big_b = (st.mx + st.my).abs();
    let a = big_a * (nu * xt).sqrt() / (1.0 - rho);
    let b = big_b * (nu * xt).sqrt() / (1.0 + rho);
    let c = 2.0 * xt / one_m;

    let ln_f = |t: f64| {
        p * (t.ln() + t.ln_1p()) - c * t
            + ln_bessel_i_normalized(p, a * t.sqrt())
            + ln_bessel_i_normalized(p, b * (1.0 + t).sqrt())
    };
    // e^{−ct} sets the bulk; a large a moves it out to about a²/(4c²)
    let t_decay = 1.0 / c;
    let t_bessel = a * a / (4.0 * c * c);
    let range = (1e-3 * t_decay.min(1.0), 10.0 * t_decay.max(t_bessel).max(1.0));
    let int = quad_semiinfinite_ln(ln_f, range, q)?;
    let ln_value = (nu - 1.0) * xt.ln() - 0.5 * nu * one_m.ln() - lambda - xt / (1.0 + rho) + int.ln_value - s.ln();
    Ok(EvalResult::from_ln(ln_value, int.rel_err, int.evals, Method::Integral))
}

/// Density of the order-ν sum for ρ = 0, μY = 0 as a single integral with a
/// ₀F₁ kernel:
///
/// f̃(x) = |x|^{ν−1} e^{−νm²/2} / (√π 2^ν Γ(ν/2))
///        ∫₀^∞ t^{−(ν+1)/2} e^{−t − x²/(4t)} ₀F₁(; ν/2; νm²x²/(8t)) dt.
pub fn pdf_sum_rho0_integral(params: &BivariateParams, order: OrderSpec, x: f64, q: &QuadOptions) -> Result<EvalResult> {
    params.validate()?;
    order.validate()?;
    q.validate()?;
    check_x(x)?;
    if params.rho != 0.0 || params.mu_y != 0.0 {
        return Err(Error::Precondition("this integral form needs rho = 0 and mu_y = 0".into()));
    }
    if x == 0.0 {
        return Err(domain("pdf_sum_rho0_integral", "the integral form does not cover x = 0"));
    }
    let nu = order.nu;
    let s = params.scale();
    let xt = (x / s).abs();
    let m = params.mu_x / params.sigma_x;
    let arg = nu * m * m * xt * xt / 8.0;
    let half = 0.5 * nu;
    let ln_f = |t: f64| {
        let h = if arg == 0.0 { 0.0 } else { ln_hyp_0f1(half, arg / t).unwrap_or(f64::NAN) };
        -0.5 * (nu + 1.0) * t.ln() - t - xt * xt / (4.0 * t) + h
    };
    let range = (1e-3 * xt.min(1.0), 10.0 * xt.max(1.0) * (1.0 + m * m));
    let int = quad_semiinfinite_ln(ln_f, range, q)?;
    let ln_value = (nu - 1.0) * xt.ln() - 0.5 * nu * m * m - 0.5 * PI.ln() - nu * LN_2 - ln_gamma_pos(half)
        + int.ln_value
        - s.ln();
    Ok(EvalResult::from_ln(ln_value, int.rel_err, int.evals, Method::Integral))
}
