//! Density of a single product XY by the double series in integer-order
//! K-Bessel functions. Used as an independent check of the ν = 1 case.

use std::f64::consts::PI;

use super::{check_x, ln_sum, EvalOptions, EvalResult, Method};
use crate::error::{domain, Error, Result};
use crate::params::BivariateParams;
use crate::specfun::{ln_bessel_k, ln_factorials};

/// ln K_n(w) for n = 0..=n_max by forward recurrence on the ratios.
fn ln_bessel_k_integer(w: f64, n_max: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let l0 = ln_bessel_k(0.0, w)?;
    out.push(l0);
    if n_max == 0 {
        return Ok(out);
    }
    let mut ratio = (ln_bessel_k(1.0, w)? - l0).exp();
    for n in 1..=n_max {
        let prev = out[n - 1];
        out.push(prev + ratio.ln());
        ratio = 1.0 / ratio + 2.0 * n as f64 / w;
    }
    Ok(out)
}

/// Density of XY at x ≠ 0. With α = mx − ρmy, β = my − ρmx in standardized
/// units and w = |x|/(1−ρ²),
///
/// f̃(x) = e^{−(mx²+my²−2ρ mx my)/(2(1−ρ²)) + ρx/(1−ρ²)} / π
///        Σ_k Σ_{j=0}^{2k} sgn(x)^j |x|^k C(2k,j) α^j β^{2k−j} K_{j−k}(w)
///        / ((2k)! (1−ρ²)^{2k+1/2}).
///
/// When α or β vanishes only one j survives per k and the series has
/// positive terms. Otherwise the terms have both signs; they are summed
/// along the diagonals j − k = n, which removes most of the cancellation.
pub fn pdf_product_cui(params: &BivariateParams, x: f64, opts: &EvalOptions) -> Result<EvalResult> {
    params.validate()?;
    opts.validate()?;
    check_x(x)?;
    if x == 0.0 {
        return Err(domain("pdf_product_cui", "the K-series diverges at x = 0"));
    }
    let st = params.standardized();
    let s = params.scale();
    let xt = x / s;
    let ax = xt.abs();
    let rho = st.rho;
    let one_m = (1.0 - rho) * (1.0 + rho);
    let (mx, my) = (st.mx, st.my);
    let alpha = mx - rho * my;
    let beta = my - rho * mx;
    let w = ax / one_m;
    let ln_pref = -PI.ln() - (mx * mx + my * my - 2.0 * rho * mx * my) / (2.0 * one_m) + rho * xt / one_m - s.ln();

    if alpha == 0.0 || beta == 0.0 {
        // (1−ρ²)^{2k} cancels: Σ_k m^{2k}|x|^k K_k(w)/(2k)!, m = my or mx
        let m = if alpha == 0.0 { my } else { mx };
        let ln_m2 = if m != 0.0 { 2.0 * m.abs().ln() } else { f64::NEG_INFINITY };
        let mut logs = Vec::new();
        let mut n = 16;
        loop {
            let lk = ln_bessel_k_integer(w, n)?;
            let lf = ln_factorials(2 * n);
            logs.clear();
            for k in 0..=n {
                if k > 0 && m == 0.0 {
                    break;
                }
                let kf = k as f64;
                let t = if k == 0 { lk[0] } else { kf * (ln_m2 + ax.ln()) - lf[2 * k] + lk[k] };
                logs.push(t);
            }
            let total = ln_sum(logs.iter().copied());
            let last = *logs.last().unwrap();
            let peaked = logs.len() < 2 || last < logs[logs.len() - 2];
            if logs.len() <= n || (peaked && last - total < opts.rel_tol.ln() - 2.0) {
                let l = ln_pref - 0.5 * one_m.ln() + total;
                let rel = (last - total).exp() + 1e-14 * (1.0 + l.abs());
                return Ok(EvalResult::from_ln(l, rel, logs.len(), Method::CuiSeries));
            }
            if n >= opts.max_k {
                return Err(Error::NonConvergence {
                    what: "product K-series (raise max_k)",
                    terms: n + 1,
                });
            }
            n = (2 * n).min(opts.max_k);
        }
    }

    // Grouping the (j, k) terms by n = j − k sums each diagonal in closed
    // form, Σ_k u^k/((k+n)!(k−n)!) = sgn(u)^n F_{2n}(2y) with y = √|u|,
    // F = I for u > 0 and J for u < 0, u = a b |x|/(1−ρ²)², a = sgn(x) α,
    // b = β. Then
    //   S = F_0(2y) K_0(w) + Σ_{n≥1} (r^n + r^{−n}) F_{2n}(2y) K_n(w), r = |a/b|.
    let a = alpha * xt.signum();
    let b = beta;
    let y = (a * b).abs().sqrt() * ax.sqrt() / one_m;
    let kind = if a * b > 0.0 { Cylinder::I } else { Cylinder::J };
    let ln_r = (a / b).abs().ln();
    let ln_eps = opts.rel_tol.ln() - 2.0;
    let ln_om = one_m.ln();

    let mut n_max = 32usize;
    loop {
        let lk = ln_bessel_k_integer(w, n_max)?;
        let f = bessel_integer_orders(kind, 2.0 * y, 2 * n_max);
        let lf = ln_factorials(2 * n_max);
        // ln|term| up to the common scale of F, and the sign
        let mut logs = Vec::with_capacity(n_max + 1);
        let mut bound = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let nf = n as f64;
            let weight = if n == 0 { 0.0 } else { nf * ln_r.abs() + (-2.0 * nf * ln_r.abs()).exp().ln_1p() };
            let (lfv, sfv) = f[2 * n];
            logs.push((weight + lfv + lk[n], sfv));
            // I terms are positive; for J, |J_{2n}(2y)| ≤ min(1, y^{2n}/(2n)!)
            let ln_fb = match kind {
                Cylinder::I => lfv,
                Cylinder::J => (2.0 * nf * y.ln() - lf[2 * n]).min(0.0),
            };
            bound.push(weight + ln_fb + lk[n]);
        }
        let ln_ref = logs.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0f64;
        let mut abs_sum = 0.0f64;
        for &(l, sign) in &logs {
            let v = (l - ln_ref).exp();
            acc += sign * v;
            abs_sum += v;
        }
        let last = bound[n_max];
        let done = (last == f64::NEG_INFINITY || last < bound[n_max - 1]) && last - ln_ref < ln_eps + acc.abs().ln();
        if done || n_max >= opts.max_k {
            if !(acc > 0.0) {
                return Err(Error::NonConvergence {
                    what: "product K-series lost its digits to cancellation",
                    terms: n_max + 1,
                });
            }
            if !done {
                return Err(Error::NonConvergence {
                    what: "product K-series (raise max_k)",
                    terms: n_max + 1,
                });
            }
            let l = ln_pref - 0.5 * ln_om + ln_ref + acc.ln();
            // rounding in the mixed-sign sum is carried into the error estimate
            let rel = (last - ln_ref).exp() / acc + 1e-15 * (1.0 + y) * abs_sum / acc;
            return Ok(EvalResult::from_ln(l, rel, n_max + 1, Method::CuiSeries));
        }
        n_max = (2 * n_max).min(opts.max_k);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cylinder {
    I,
    J,
}

/// ln|F_k(z)| and sgn F_k(z) for F = I or J and k = 0..=k_max, by Miller's
/// backward recurrence normalized with e^z = I_0 + 2Σ I_k or
/// 1 = J_0 + 2Σ J_{2k}. Magnitudes are tracked as logarithms so that high
/// orders keep full precision.
fn bessel_integer_orders(kind: Cylinder, z: f64, k_max: usize) -> Vec<(f64, f64)> {
    if z == 0.0 {
        let mut v = vec![(f64::NEG_INFINITY, 0.0); k_max + 1];
        v[0] = (0.0, 1.0);
        return v;
    }
    let top = k_max.max(z.ceil() as usize);
    let start = top + 20 + (160.0 * top as f64).sqrt() as usize;
    let start = start + start % 2;
    let sign = if kind == Cylinder::I { 1.0 } else { -1.0 };
    // (v_{k}, v_{k+1}) times e^{offset}
    let (mut hi, mut lo) = (0.0f64, 1.0f64);
    let mut offset = 0.0f64;
    let mut out = vec![(0.0f64, 0.0f64); start + 1];
    out[start] = (0.0, 1.0);
    for k in (1..=start).rev() {
        let next = 2.0 * k as f64 / z * lo + sign * hi;
        hi = lo;
        lo = next;
        if lo.abs() > 1e200 {
            hi /= lo.abs();
            offset += lo.abs().ln();
            lo = lo.signum();
        }
        out[k - 1] = if lo == 0.0 { (f64::NEG_INFINITY, 0.0) } else { (lo.abs().ln() + offset, lo.signum()) };
    }
    let l_max = out.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let mut norm = 0.0;
    for (k, &(l, sg)) in out.iter().enumerate() {
        let w = match (kind, k) {
            (_, 0) => 1.0,
            (Cylinder::I, _) => 2.0,
            (Cylinder::J, k) if k % 2 == 0 => 2.0,
            _ => 0.0,
        };
        norm += w * sg * (l - l_max).exp();
    }
    let ln_norm = l_max + norm.ln() - if kind == Cylinder::I { z } else { 0.0 };
    out.truncate(k_max + 1);
    for t in &mut out {
        t.0 -= ln_norm;
    }
    out
}
