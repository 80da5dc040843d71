//! Numerical checks of two Fourier integrals with closed forms in terms of
//! U, W and K.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::quad::fourier_half_line;
use crate::specfun::{bessel_k, gamma, ln_gamma, tricomi_u, whittaker_w};

const REL_TOL: f64 = 1e-12;

/// ∫_{−∞}^{∞} e^{ixt} (z+it)^{−ρ} (y−it)^{−σ} dt by quadrature (lhs) and
/// (2π/Γ(δ)) (y+z)^{1−ρ−σ} e^{−|x|θ} U(1−δ, 2−ρ−σ, |x|(y+z)) (rhs) with
/// (δ, θ) = (ρ, z) for x ≥ 0 and (σ, y) for x < 0.
pub fn check_int1(rho: f64, sigma: f64, y: f64, z: f64, x: f64) -> Result<(Complex64, Complex64)> {
    let extra_case = rho == 0.5 && sigma == 0.5;
    if !(rho + sigma > 1.0 || extra_case) {
        return Err(domain("check_int1", "needs rho + sigma > 1 or rho = sigma = 1/2"));
    }
    if !(y > 0.0 && z > 0.0) || !x.is_finite() {
        return Err(domain("check_int1", "needs y > 0, z > 0 and finite x"));
    }
    if x == 0.0 && extra_case {
        return Err(domain("check_int1", "the integral diverges at x = 0 for rho = sigma = 1/2"));
    }
    let factor = |t: f64| {
        let a = Complex64::new(z, t).powf(-rho);
        let b = Complex64::new(y, -t).powf(-sigma);
        a * b
    };
    let scale = 1.0 / y.max(z);
    let mirrored = |t: f64| factor(-t);
    let (pos, _) = fourier_half_line(&factor, x, 0.0, scale, REL_TOL)?;
    let (neg, _) = fourier_half_line(&mirrored, -x, 0.0, scale, REL_TOL)?;
    let lhs = pos + neg;

    let (delta, theta) = if x >= 0.0 { (rho, z) } else { (sigma, y) };
    let b = 2.0 - rho - sigma;
    let w = x.abs() * (y + z);
    let u = if w == 0.0 {
        // U(a, b, 0) = Γ(1−b)/Γ(a−b+1) for b < 1
        (ln_gamma(1.0 - b)? - ln_gamma(1.0 - delta - b + 1.0)?).exp()
    } else {
        tricomi_u(1.0 - delta, b, w)?
    };
    let rhs = 2.0 * PI / gamma(delta)? * (y + z).powf(1.0 - rho - sigma) * (-x.abs() * theta).exp() * u;
    Ok((lhs, Complex64::new(rhs, 0.0)))
}

/// ∫ e^{ixt} (1+t²)^{−ρ} dt by quadrature, by its Whittaker form
/// (2^{1−ρ}π/Γ(ρ)) |x|^{ρ−1} W_{0,1/2−ρ}(2|x|), and by its Bessel form
/// (2^{3/2−ρ}√π/Γ(ρ)) |x|^{ρ−1/2} K_{ρ−1/2}(|x|).
pub fn check_int11(rho: f64, x: f64) -> Result<(f64, f64, f64)> {
    if !(rho > 0.5) {
        return Err(domain("check_int11", "needs rho > 1/2"));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(domain("check_int11", "needs finite x != 0"));
    }
    let h = |t: f64| Complex64::new((1.0 + t * t).powf(-rho), 0.0);
    let (half, _) = fourier_half_line(&h, x.abs(), 0.0, 1.0, REL_TOL)?;
    let lhs = 2.0 * half.re;
    let ax = x.abs();
    let g = gamma(rho)?;
    let whittaker = 2f64.powf(1.0 - rho) * PI / g * ax.powf(rho - 1.0) * whittaker_w(0.0, 0.5 - rho, 2.0 * ax)?;
    let bessel = 2f64.powf(1.5 - rho) * PI.sqrt() / g * ax.powf(rho - 0.5) * bessel_k(rho - 0.5, ax)?;
    Ok((lhs, whittaker, bessel))
}
