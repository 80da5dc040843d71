//! Tricomi's confluent hypergeometric function U(a,b,x) and Whittaker's W.

use super::gamma::{gamma, ln_gamma_pos, rgamma};
use super::hyper::hyp_1f1;
use super::SpecFunOptions;
use crate::error::{domain, Error, Result};

fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// ln ∫₀^∞ e^{−xt} t^{a−1} (1+t)^{b−a−1} dt for a > 0, x > 0, any real b.
///
/// With t = e^u the log-integrand g(u) = −x e^u + a u + (b−a−1) ln(1+e^u)
/// has a single maximum, located in closed form. The integral is done by
/// the trapezoidal rule after u = u* + σ sinh(s).
pub(crate) fn ln_laplace_integral(a: f64, b: f64, x: f64) -> Result<(f64, f64)> {
    debug_assert!(a > 0.0 && x > 0.0);
    let c = b - a - 1.0;
    let q = b - 1.0 - x;
    let disc = (q * q + 4.0 * a * x).sqrt();
    let ln_x = x.ln();
    // x t* and ln t*, kept apart so that x near the underflow limit is safe
    let (xt_star, u_star) = if q >= 0.0 {
        let v = 0.5 * (q + disc);
        (v, v.ln() - ln_x)
    } else {
        let t = 2.0 * a / (disc - q);
        (x * t, t.ln())
    };
    let g = |u: f64| -(ln_x + u).exp() + a * u + c * softplus(u);
    let g_star = g(u_star);
    // t/(1+t)² = e^{−|u|}/(1+e^{−|u|})²
    let e = (-u_star.abs()).exp();
    let kappa = xt_star - c * e / ((1.0 + e) * (1.0 + e));
    let sigma = if kappa > 0.0 { (1.0 / kappa.sqrt()).clamp(1e-8, 50.0) } else { 1.0 };

    const CUTOFF: f64 = -46.0;
    const S_MAX: f64 = 25.0;
    let log_term = |s: f64| {
        let u = u_star + sigma * s.sinh();
        g(u) - g_star + s.cosh().ln()
    };
    let march = |h: f64, first: usize, step: usize| -> f64 {
        let mut acc = 0.0;
        for dir in [1.0, -1.0] {
            let mut j = first;
            loop {
                let s = dir * j as f64 * h;
                if s.abs() > S_MAX {
                    break;
                }
                let lt = log_term(s);
                if lt < CUTOFF || lt.is_nan() {
                    break;
                }
                acc += lt.exp();
                j += step;
            }
        }
        acc
    };

    let mut h = 0.5;
    let mut sum = 1.0 + march(h, 1, 1);
    let mut est = sum * h;
    for level in 0..10 {
        sum += march(h / 2.0, 1, 2);
        h /= 2.0;
        let next = sum * h;
        let diff = ((next - est) / next).abs();
        est = next;
        if level >= 1 && diff < 1e-10 {
            return Ok((g_star + (sigma * est).ln(), diff));
        }
    }
    Err(Error::Quadrature {
        what: "tricomi_u Laplace integral",
        rel_err: 1.0,
    })
}

/// ln U(a,b,x) for a > 0, x > 0 from the Laplace integral.
pub(crate) fn ln_tricomi_u_pos(a: f64, b: f64, x: f64) -> Result<f64> {
    Ok(ln_laplace_integral(a, b, x)?.0 - ln_gamma_pos(a))
}

fn check_args(a: f64, b: f64, x: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() || !x.is_finite() {
        return Err(domain("tricomi_u", "non-finite argument"));
    }
    if x <= 0.0 {
        return Err(domain("tricomi_u", format!("x = {x} must be positive")));
    }
    Ok(())
}

fn negative_integer(a: f64) -> Option<u32> {
    if a < 0.0 && a == a.floor() && a > -1e6 {
        Some((-a) as u32)
    } else {
        None
    }
}

/// U(−m,b,x) = (−1)^m Σ_s C(m,s) (b+s)_{m−s} (−x)^s.
fn tricomi_u_polynomial(m: u32, b: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    for s in 0..=m {
        if s > 0 {
            binom *= (m - s + 1) as f64 / s as f64;
        }
        let poch = super::hyper::pochhammer(b + s as f64, m - s);
        sum += binom * poch * (-x).powi(s as i32);
    }
    if m % 2 == 0 {
        sum
    } else {
        -sum
    }
}

/// Large-x expansion U ~ x^{−a} Σ (a)_s (a−b+1)_s / s! (−x)^{−s}; `None` if
/// the terms start growing before reaching full precision.
fn tricomi_u_asymptotic(a: f64, b: f64, x: f64) -> Option<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for s in 0..200 {
        let sf = s as f64;
        let next = -term * (a + sf) * (a - b + 1.0 + sf) / ((sf + 1.0) * x);
        if next == 0.0 {
            return Some(sum * x.powf(-a));
        }
        if next.abs() > term.abs() {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            return Some(sum * x.powf(-a));
        }
    }
    None
}

/// Tricomi's confluent hypergeometric function U(a,b,x), x > 0.
pub fn tricomi_u(a: f64, b: f64, x: f64) -> Result<f64> {
    check_args(a, b, x)?;
    if a == 0.0 {
        return Ok(1.0);
    }
    if let Some(m) = negative_integer(a) {
        return Ok(tricomi_u_polynomial(m, b, x));
    }
    if a > 0.0 {
        let v = ln_tricomi_u_pos(a, b, x)?.exp();
        return finite(v);
    }
    let a2 = a - b + 1.0;
    if a2 == 0.0 {
        return finite(x.powf(1.0 - b));
    }
    if let Some(m) = negative_integer(a2) {
        return finite(x.powf(1.0 - b) * tricomi_u_polynomial(m, 2.0 - b, x));
    }
    if a2 > 0.0 {
        // Kummer's transformation U(a,b,x) = x^{1−b} U(a−b+1, 2−b, x)
        let l = (1.0 - b) * x.ln() + ln_tricomi_u_pos(a2, 2.0 - b, x)?;
        return finite(l.exp());
    }
    if let Some(v) = tricomi_u_asymptotic(a, b, x) {
        return Ok(v);
    }
    tricomi_u_by_definition(a, b, x, &SpecFunOptions::default())
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow("tricomi_u"))
    }
}

/// ln U(a,b,x) on the region where U is known positive through a Laplace
/// integral: a > 0, or a − b + 1 > 0 via Kummer's transformation.
pub fn ln_tricomi_u(a: f64, b: f64, x: f64) -> Result<f64> {
    check_args(a, b, x)?;
    if a == 0.0 {
        return Ok(0.0);
    }
    if a > 0.0 {
        return ln_tricomi_u_pos(a, b, x);
    }
    let a2 = a - b + 1.0;
    if a2 > 0.0 {
        return Ok((1.0 - b) * x.ln() + ln_tricomi_u_pos(a2, 2.0 - b, x)?);
    }
    if a2 == 0.0 {
        return Ok((1.0 - b) * x.ln());
    }
    let v = tricomi_u(a, b, x)?;
    if v > 0.0 {
        Ok(v.ln())
    } else {
        Err(domain("ln_tricomi_u", "U(a,b,x) is not positive"))
    }
}

fn u_from_kummer_functions(a: f64, b: f64, x: f64, opts: &SpecFunOptions) -> Result<f64> {
    let m1 = hyp_1f1(a, b, x, opts)?.value;
    let m2 = hyp_1f1(a - b + 1.0, 2.0 - b, x, opts)?.value;
    let c1 = gamma(1.0 - b)? * rgamma(a - b + 1.0);
    let c2 = gamma(b - 1.0)? * rgamma(a);
    Ok(c1 * m1 + c2 * x.powf(1.0 - b) * m2)
}

/// U(a,b,x) from its definition in terms of Kummer's M. At integer b the
/// value is the limit β → b, estimated by Richardson extrapolation of the
/// symmetric averages at β = b ± δ for two step sizes.
pub fn tricomi_u_by_definition(a: f64, b: f64, x: f64, opts: &SpecFunOptions) -> Result<f64> {
    opts.validate()?;
    check_args(a, b, x)?;
    if b != b.round() {
        return u_from_kummer_functions(a, b, x, opts);
    }
    let sym = |d: f64| -> Result<f64> {
        Ok(0.5 * (u_from_kummer_functions(a, b + d, x, opts)? + u_from_kummer_functions(a, b - d, x, opts)?))
    };
    let d = 2e-3;
    let s1 = sym(d)?;
    let s2 = sym(d / 2.0)?;
    let s3 = sym(d / 4.0)?;
    let r1 = (4.0 * s2 - s1) / 3.0;
    let r2 = (4.0 * s3 - s2) / 3.0;
    let scale = r2.abs().max(1e-300);
    if (r1 - r2).abs() > 1e-7 * scale {
        return Err(Error::NonConvergence {
            what: "tricomi_u integer-b limit",
            terms: 3,
        });
    }
    Ok(r2)
}

/// Whittaker's function W_{κ,μ}(x) = e^{−x/2} x^{μ+1/2} U(1/2+μ−κ, 1+2μ, x).
pub fn whittaker_w(kappa: f64, mu: f64, x: f64) -> Result<f64> {
    check_args(kappa, mu, x)?;
    let a = 0.5 + mu - kappa;
    let b = 1.0 + 2.0 * mu;
    if a > 0.0 || a - b + 1.0 > 0.0 {
        let l = -0.5 * x + (mu + 0.5) * x.ln() + ln_tricomi_u(a, b, x)?;
        return finite(l.exp());
    }
    finite((-0.5 * x).exp() * x.powf(mu + 0.5) * tricomi_u(a, b, x)?)
}

/// ln U(a₀+i, b, x) for i = 0..=n with a₀ > 0, x > 0.
#[derive(Debug, Clone)]
pub struct ULadder {
    pub ln_u: Vec<f64>,
    /// Largest disagreement (in ln U) seen between the recurrence and
    /// independent quadrature values at checkpoints and at the junction of
    /// the two sweeps.
    pub discrepancy: f64,
}

const CHECKPOINT: usize = 200;

/// Evaluates a ladder U(a₀+i, b, x), i = 0..=n, with the three-term
/// recurrence U(a−1) + (b−2a−x)U(a) + a(a−b+1)U(a+1) = 0.
///
/// The recurrence is run upward where a < (b−x)/2 and downward above that,
/// which is the stable direction on each side; both sweeps start from
/// quadrature values and are re-anchored every few hundred steps.
pub fn ln_tricomi_u_ladder(a0: f64, n: usize, b: f64, x: f64) -> Result<ULadder> {
    if !(a0 > 0.0) || !(x > 0.0) || !b.is_finite() || !x.is_finite() {
        return Err(domain("ln_tricomi_u_ladder", "requires a0 > 0 and x > 0"));
    }
    let direct = |i: usize| ln_tricomi_u_pos(a0 + i as f64, b, x);
    let mut ln_u = vec![f64::NAN; n + 1];
    let mut discrepancy = 0.0f64;
    if n <= 2 {
        for (i, slot) in ln_u.iter_mut().enumerate() {
            *slot = direct(i)?;
        }
        return Ok(ULadder { ln_u, discrepancy });
    }

    let split = 0.5 * (b - x);
    let nf = if split <= a0 {
        0
    } else {
        ((split - a0).ceil() as usize).min(n + 1)
    };

    // upward sweep over indices 0..=min(nf, n)
    let top_fwd = nf.min(n);
    if nf <= 2 {
        for i in 0..nf.min(n + 1) {
            ln_u[i] = direct(i)?;
        }
    } else {
        let mut fwd = vec![0.0; top_fwd + 1];
        fwd[0] = direct(0)?;
        fwd[1] = direct(1)?;
        let mut ratio = (fwd[1] - fwd[0]).exp();
        for i in 1..top_fwd {
            let a = a0 + i as f64;
            let next = -(1.0 / ratio + (b - 2.0 * a - x)) / (a * (a - b + 1.0));
            if i % CHECKPOINT == 0 || !(next > 0.0) || !next.is_finite() {
                let d_i = direct(i)?;
                if next > 0.0 && next.is_finite() {
                    discrepancy = discrepancy.max((d_i - fwd[i]).abs());
                }
                fwd[i] = d_i;
                fwd[i + 1] = direct(i + 1)?;
                ratio = (fwd[i + 1] - fwd[i]).exp();
                continue;
            }
            ratio = next;
            fwd[i + 1] = fwd[i] + ratio.ln();
        }
        let keep = nf.min(n + 1);
        ln_u[..keep].copy_from_slice(&fwd[..keep]);
        if nf <= n {
            // fwd[nf] overlaps the downward sweep; compared below
            ln_u[nf] = fwd[nf];
        }
    }
    if nf > n {
        return Ok(ULadder { ln_u, discrepancy });
    }

    // downward sweep over indices n down to nf (and one further for the junction check)
    let bottom = nf.saturating_sub(1);
    let mut cur = direct(n)?;
    let above = direct(n + 1)?;
    let mut ratio = (above - cur).exp();
    let junction_fwd = if nf > 2 { Some((nf - 1, ln_u[nf - 1], ln_u[nf])) } else { None };
    ln_u[n] = cur;
    let mut i = n;
    while i > bottom {
        let a = a0 + i as f64;
        let inv = (2.0 * a + x - b) - a * (a - b + 1.0) * ratio;
        let idx = i - 1;
        if (n - idx) % CHECKPOINT == 0 || !(inv > 0.0) || !inv.is_finite() {
            let d_i = direct(idx)?;
            if inv > 0.0 && inv.is_finite() {
                discrepancy = discrepancy.max((d_i - (cur + inv.ln())).abs());
            }
            ratio = (cur - d_i).exp();
            cur = d_i;
        } else {
            ratio = 1.0 / inv;
            cur += inv.ln();
        }
        if idx >= nf {
            ln_u[idx] = cur;
        } else if let Some((j, f_prev, _)) = junction_fwd {
            if j == idx {
                discrepancy = discrepancy.max((cur - f_prev).abs());
            }
        }
        i -= 1;
    }
    if let Some((_, _, f_nf)) = junction_fwd {
        discrepancy = discrepancy.max((ln_u[nf] - f_nf).abs());
    }
    Ok(ULadder { ln_u, discrepancy })
}
