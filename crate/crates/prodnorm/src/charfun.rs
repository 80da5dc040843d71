//! Characteristic functions of sums of products and of the divisor laws.
//!
//! With X, Y standardized, XY = ((X+Y)/2)² − ((X−Y)/2)² is a difference of
//! two independent scaled non-central χ²₁ variables, so the cumulant
//! generating function at w = it is
//!
//! ln M(w) = ν[−½ ln(1−(1+ρ)w) − ½ ln(1+(1−ρ)w) + c₀ + c₊/(1+(1−ρ)w) + c₋/(1−(1+ρ)w)].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::{BivariateParams, OrderSpec, Standardized};

pub type ComplexValue = Complex64;

/// Partial-fraction form of the exponent of the characteristic function
/// in standardized units: c₀ + c₊/(1+(1−ρ)it) + c₋/(1−(1+ρ)it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialFractions {
    pub constant: f64,
    pub coeff_plus: f64,
    pub coeff_minus: f64,
}

pub fn partial_fraction_terms(params: &BivariateParams) -> PartialFractions {
    partial_fractions_std(&params.standardized())
}

pub(crate) fn partial_fractions_std(st: &Standardized) -> PartialFractions {
    let (d2, s2) = st.diff_sum_sq();
    let r = st.rho;
    let denom = 4.0 * (1.0 - r * r);
    PartialFractions {
        constant: -st.rate(),
        coeff_plus: (1.0 + r) * d2 / denom,
        coeff_minus: (1.0 - r) * s2 / denom,
    }
}

/// ln M(w) in standardized units for complex w with −1/(1−ρ) < Re w < 1/(1+ρ).
/// Each linear factor has positive real part there, so the principal logs
/// are taken factor by factor and never wrap.
pub(crate) fn ln_mgf_std(pf: &PartialFractions, rho: f64, nu: f64, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let d_minus = one - (1.0 + rho) * w;
    let d_plus = one + (1.0 - rho) * w;
    nu * (-0.5 * d_minus.ln() - 0.5 * d_plus.ln()
        + pf.constant
        + pf.coeff_plus / d_plus
        + pf.coeff_minus / d_minus)
}

/// First and second derivatives of the real cumulant function K(c) = ln M(c).
pub(crate) fn cumulant_derivatives(pf: &PartialFractions, rho: f64, nu: f64, c: f64) -> (f64, f64, f64) {
    let a = 1.0 + rho;
    let b = 1.0 - rho;
    let dm = 1.0 - a * c;
    let dp = 1.0 + b * c;
    let k = nu * (-0.5 * dm.ln() - 0.5 * dp.ln() + pf.constant + pf.coeff_plus / dp + pf.coeff_minus / dm);
    let k1 = nu * (0.5 * a / dm - 0.5 * b / dp - pf.coeff_plus * b / (dp * dp) + pf.coeff_minus * a / (dm * dm));
    let k2 = nu
        * (0.5 * a * a / (dm * dm) + 0.5 * b * b / (dp * dp)
            + 2.0 * pf.coeff_plus * b * b / (dp * dp * dp)
            + 2.0 * pf.coeff_minus * a * a / (dm * dm * dm));
    (k, k1, k2)
}

/// Characteristic function E[exp(itS)] of the order-ν sum S.
pub fn cf_order(params: &BivariateParams, order: OrderSpec, t: f64) -> ComplexValue {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let pf = partial_fraction_terms(params);
    let w = Complex64::new(0.0, params.scale() * t);
    ln_mgf_std(&pf, params.rho, order.nu, w).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mx: f64, my: f64, sx: f64, sy: f64, r: f64) -> BivariateParams {
        BivariateParams::new(mx, my, sx, sy, r).unwrap()
    }

    #[test]
    fn value_at_zero_is_one() {
        let v = cf_order(&p(1.0, -0.5, 2.0, 0.7, 0.3), OrderSpec { nu: 2.5 }, 0.0);
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn standard_normal_product() {
        let v = cf_order(&p(0.0, 0.0, 1.0, 1.0, 0.0), OrderSpec { nu: 1.0 }, 1.0);
        assert!((v.re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn partial_fractions_reassemble() {
        let par = p(1.0, 2.0, 1.0, 1.0, 0.5);
        let pf = partial_fraction_terms(&par);
        let (mx, my, r) = (1.0, 2.0, 0.5);
        for t in [0.1, 1.0, 10.0] {
            let it = Complex64::new(0.0, t);
            let dm = 1.0 - (1.0 + r) * it;
            let dp = 1.0 + (1.0 - r) * it;
            let original = (-(mx * mx + my * my - 2.0 * r * mx * my) * t * t + 2.0 * mx * my * it) / (2.0 * dm * dp);
            let reassembled = pf.constant + pf.coeff_plus / dp + pf.coeff_minus / dm;
            assert!((original - reassembled).norm() < 1e-13 * original.norm().max(1.0), "t={t}");
        }
        let z = partial_fraction_terms(&p(0.0, 0.0, 1.0, 2.0, 0.4));
        assert_eq!((z.constant, z.coeff_plus, z.coeff_minus), (0.0, 0.0, 0.0));
        let eq = partial_fraction_terms(&p(1.5, 1.5, 1.0, 1.0, 0.0));
        assert_eq!(eq.coeff_plus, 0.0);
        assert!((eq.constant + 1.5 * 1.5).abs() < 1e-15);
    }

    #[test]
    fn cumulant_derivatives_match_differences() {
        let par = p(1.0, -0.5, 2.0, 0.7, 0.3);
        let pf = partial_fraction_terms(&par);
        let (r, nu, c, h) = (0.3, 2.0, 0.2, 1e-5);
        let k = |c: f64| ln_mgf_std(&pf, r, nu, Complex64::new(c, 0.0)).re;
        let (k0, k1, k2) = cumulant_derivatives(&pf, r, nu, c);
        assert!((k0 - k(c)).abs() < 1e-14);
        assert!((k1 - (k(c + h) - k(c - h)) / (2.0 * h)).abs() < 1e-8);
        assert!((k2 - (k(c + h) - 2.0 * k(c) + k(c - h)) / (h * h)).abs() < 1e-4);
    }
}
