//! Quadrature engines: double-exponential rules on half-lines and finite
//! intervals, adaptive Gauss–Kronrod, and an oscillatory half-line rule.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub target_rel_err: f64,
    pub max_refinements: usize,
    /// Initial level of the double-exponential rule; level ℓ starts with
    /// step 2^{4−ℓ} (capped at 1) before successive halving.
    pub levels: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            target_rel_err: 1e-10,
            max_refinements: 12,
            levels: 6,
        }
    }
}

impl QuadOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_rel_err > 0.0) || self.max_refinements < 1 {
            return Err(Error::InvalidParams(format!("quadrature options {self:?}")));
        }
        Ok(())
    }

    fn initial_step(&self) -> f64 {
        2f64.powi(4 - self.levels as i32).min(1.0)
    }
}

/// ln of a positive integral with its estimated relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnIntegral {
    pub ln_value: f64,
    pub rel_err: f64,
    pub evals: usize,
}

impl LnIntegral {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

const LN_CUTOFF: f64 = 46.0;

fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, evals: &mut usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    *evals += 2;
    for _ in 0..40 {
        if f1.is_nan() || f2.is_nan() {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
        *evals += 1;
        if hi - lo < 1e-7 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Double-exponential rule for ∫_ℝ F(u) du, where `lf(u)` returns
/// (ln|F(u)|, sign F(u)). The node set is centred at the maximum of ln|F|,
/// located by a scan over [u_lo, u_hi], and scaled by the curvature there.
fn de_real_line(
    lf: &dyn Fn(f64) -> (f64, f64),
    u_lo: f64,
    u_hi: f64,
    q: &QuadOptions,
    what: &'static str,
) -> Result<(f64, f64, f64, usize)> {
    q.validate()?;
    let mut evals = 0usize;
    let ln_abs = |u: f64| {
        let v = lf(u).0;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let span = (u_hi - u_lo).max(1.0);
    let n_scan = ((span / 0.5).ceil() as usize).clamp(8, 160);
    let step = span / n_scan as f64;
    let mut best = (f64::NEG_INFINITY, u_lo);
    for i in 0..=n_scan {
        let u = u_lo + i as f64 * step;
        let v = ln_abs(u);
        evals += 1;
        if v > best.0 {
            best = (v, u);
        }
    }
    if best.0 == f64::NEG_INFINITY {
        return Ok((f64::NEG_INFINITY, 1.0, 0.0, evals));
    }
    let u_star = golden_max(&ln_abs, best.1 - step, best.1 + step, &mut evals);
    let l_star = ln_abs(u_star).max(best.0);
    let d = 0.05 * step.min(1.0);
    let curv = (ln_abs(u_star + d) - 2.0 * ln_abs(u_star) + ln_abs(u_star - d)) / (d * d);
    evals += 3;
    let sigma = if curv < 0.0 && curv.is_finite() {
        (1.0 / (-curv).sqrt()).clamp(1e-6, 10.0)
    } else {
        step.min(1.0)
    };

    let node = |s: f64| -> (f64, f64) {
        let u = u_star + sigma * s.sinh();
        let (l, sg) = lf(u);
        (l - l_star + s.cosh().ln(), sg)
    };
    let march = |h: f64, first: usize, stride: usize, evals: &mut usize| -> f64 {
        let mut acc = 0.0;
        for dir in [1.0, -1.0] {
            let mut j = first;
            let mut small = 0;
            loop {
                let s = dir * j as f64 * h;
                if s.abs() > 40.0 {
                    break;
                }
                let (l, sg) = node(s);
                *evals += 1;
                if l.is_nan() || l < -LN_CUTOFF {
                    small += 1;
                    if small >= 3 {
                        break;
                    }
                } else {
                    small = 0;
                    acc += sg * l.exp();
                }
                j += stride;
            }
        }
        acc
    };

    let mut h = q.initial_step();
    let (l0, s0) = node(0.0);
    let centre = if l0.is_finite() { s0 * l0.exp() } else { 0.0 };
    let mut sum = centre + march(h, 1, 1, &mut evals);
    let mut est = sum * h;
    let mut rel = f64::INFINITY;
    for _ in 0..q.max_refinements {
        sum += march(h / 2.0, 1, 2, &mut evals);
        h /= 2.0;
        let next = sum * h;
        rel = ((next - est) / next).abs();
        est = next;
        if rel <= q.target_rel_err || (est == 0.0 && rel.is_nan()) {
            let scaled = sigma * est;
            return Ok((l_star + scaled.abs().ln(), scaled.signum(), rel, evals));
        }
    }
    Err(Error::Quadrature { what, rel_err: rel })
}

/// ∫₀^∞ f(t) dt for a positive integrand given through ln f, after t = e^u.
/// `t_range` brackets where the mass is expected; it only steers the search
/// for the peak of t·f(t).
pub fn quad_semiinfinite_ln(
    ln_f: impl Fn(f64) -> f64,
    t_range: (f64, f64),
    q: &QuadOptions,
) -> Result<LnIntegral> {
    quad_tail_ln(ln_f, 0.0, t_range, q)
}

/// ∫_a^∞ f(t) dt for a positive integrand given through ln f, after t = a + e^u.
/// `d_range` brackets the expected offsets t − a of the bulk of the mass.
pub fn quad_tail_ln(
    ln_f: impl Fn(f64) -> f64,
    a: f64,
    d_range: (f64, f64),
    q: &QuadOptions,
) -> Result<LnIntegral> {
    let lf = |u: f64| {
        let d = u.exp();
        if d == 0.0 || !d.is_finite() {
            return (f64::NEG_INFINITY, 1.0);
        }
        (ln_f(a + d) + u, 1.0)
    };
    let lo = d_range.0.max(1e-300).ln();
    let hi = d_range.1.max(d_range.0 * 2.0).ln();
    let (l, _, rel, evals) = de_real_line(&lf, lo, hi, q, "semi-infinite integral")?;
    Ok(LnIntegral {
        ln_value: l,
        rel_err: rel,
        evals,
    })
}

/// ∫₀^∞ f(t) dt by the double-exponential rule after t = e^u; returns
/// (value, estimated absolute error).
pub fn quad_semiinfinite(f: impl Fn(f64) -> f64, q: &QuadOptions) -> Result<(f64, f64)> {
    let lf = |u: f64| {
        let t = u.exp();
        let v = f(t) * t;
        if v == 0.0 || !v.is_finite() {
            (f64::NEG_INFINITY, 1.0)
        } else {
            (v.abs().ln(), v.signum())
        }
    };
    let (l, sg, rel, _) = de_real_line(&lf, -40.0, 40.0, q, "semi-infinite integral")?;
    let v = sg * l.exp();
    Ok((v, (rel * v).abs()))
}

/// ∫_a^b f(x) dx by the tanh-sinh rule; returns (value, estimated absolute error).
/// Nodes are placed by their distance to the nearer endpoint, so integrable
/// endpoint singularities are never sampled at the endpoint itself.
pub fn quad_finite(f: impl Fn(f64) -> f64, a: f64, b: f64, q: &QuadOptions) -> Result<(f64, f64)> {
    q.validate()?;
    if a == b {
        return Ok((0.0, 0.0));
    }
    if a > b {
        let (v, e) = quad_finite(f, b, a, q)?;
        return Ok((-v, e));
    }
    let half = 0.5 * (b - a);
    let mid = a + half;
    let node = |s: f64| -> f64 {
        let v = FRAC_PI_2 * s.sinh();
        let ch = v.cosh();
        let w = FRAC_PI_2 * s.cosh() / (ch * ch);
        // distance to the nearer endpoint, computed without cancellation
        let dist = half * 2.0 / (1.0 + (2.0 * v.abs()).exp());
        if dist <= 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = if s >= 0.0 { b - dist } else { a + dist };
        let fx = f(x);
        if fx.is_finite() {
            w * fx
        } else {
            0.0
        }
    };
    let march = |h: f64, first: usize, stride: usize, scale: f64| -> f64 {
        let mut acc = 0.0;
        for dir in [1.0, -1.0] {
            let mut j = first;
            loop {
                let s = dir * j as f64 * h;
                if s.abs() > 7.0 {
                    break;
                }
                let t = node(s);
                acc += t;
                if t.abs() < 1e-20 * scale.max(acc.abs()) && j > 4 {
                    break;
                }
                j += stride;
            }
        }
        acc
    };
    let mut h = q.initial_step().min(0.5);
    let c = node(0.0);
    let mut sum = c + march(h, 1, 1, c.abs());
    let mut est = sum * h;
    let mut err = f64::INFINITY;
    for _ in 0..q.max_refinements {
        sum += march(h / 2.0, 1, 2, sum.abs());
        h /= 2.0;
        let next = sum * h;
        err = (next - est).abs();
        est = next;
        if err <= q.target_rel_err * est.abs() || est == 0.0 {
            let _ = mid;
            return Ok((half * est, half * err));
        }
    }
    Err(Error::Quadrature {
        what: "finite-interval integral",
        rel_err: err / est.abs(),
    })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: (value, error estimate, rounding floor). The error is
/// the Gauss–Kronrod difference rescaled as in QUADPACK.
fn gk15(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut vals = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 7];
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let (l, r) = (f(c - dx), f(c + dx));
        vals[i] = (l, r);
        k += (l + r) * WGK[i];
        abs += (l.norm() + r.norm()) * WGK[i];
        if i % 2 == 1 {
            g += (l + r) * WG[i / 2];
        }
    }
    let mean = k * 0.5;
    let mut asc = (fc - mean).norm() * WGK[7];
    for i in 0..7 {
        asc += ((vals[i].0 - mean).norm() + (vals[i].1 - mean).norm()) * WGK[i];
    }
    let h = h.abs();
    let (asc, abs) = (asc * h, abs * h);
    let mut err = ((k - g) * h).norm();
    if asc > 0.0 && err > 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs;
    (k * h, err.max(floor), floor)
}

fn gk_adaptive_rec(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    whole: (Complex64, f64, f64),
    abs_tol: f64,
    depth: u32,
) -> (Complex64, f64) {
    let (v, e, floor) = whole;
    if e <= abs_tol.max(floor) || depth == 0 {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let left = gk15(f, a, m);
    let right = gk15(f, m, b);
    let (lv, le) = gk_adaptive_rec(f, a, m, left, 0.5 * abs_tol, depth - 1);
    let (rv, re) = gk_adaptive_rec(f, m, b, right, 0.5 * abs_tol, depth - 1);
    (lv + rv, le + re)
}

/// Adaptive Gauss–Kronrod (7/15) integration of a complex-valued integrand
/// over [a, b]; returns (value, estimated absolute error).
pub fn gauss_kronrod(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, abs_tol: f64) -> (Complex64, f64) {
    let whole = gk15(f, a, b);
    gk_adaptive_rec(f, a, b, whole, abs_tol, 24)
}

/// ∫_a^∞ e^{iωt} h(t) dt for smooth h decaying algebraically.
///
/// Panels grow geometrically until they reach half a period, and the
/// remainder beyond the last panel is taken from three terms of repeated
/// integration by parts, −e^{iωT} Σ_m (−1)^m h^{(m)}(T)/(iω)^{m+1}. When ω is
/// too small for that expansion the tail is estimated from the local
/// power-law decay of h. `scale` is the width of the region where h varies
/// on its own, which sets the first panel.
pub fn fourier_half_line(
    h: &dyn Fn(f64) -> Complex64,
    omega: f64,
    a: f64,
    scale: f64,
    rel_tol: f64,
) -> Result<(Complex64, f64)> {
    let half_period = if omega != 0.0 {
        std::f64::consts::PI / omega.abs()
    } else {
        f64::INFINITY
    };
    let integrand = |t: f64| Complex64::new(0.0, omega * t).exp() * h(t);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut t = a;
    let mut panels = 0usize;
    let mut last_total: Option<Complex64> = None;
    loop {
        let width = (0.5 * (t - a)).max(scale).min(half_period);
        let abs_tol = rel_tol * 1e-3 * sum.norm().max(1e-300);
        let (v, e) = gauss_kronrod(&integrand, t, t + width, abs_tol.max(1e-18 * width));
        sum += v;
        err += e;
        t += width;
        panels += 1;

        if t - a < 8.0 * scale || panels % 8 != 0 {
            if panels > 2_000_000 {
                break;
            }
            continue;
        }
        let (tail, tail_err) = tail_estimate(h, omega, t, scale);
        let total = sum + tail;
        let mag = total.norm().max(1e-300);
        let settled = match last_total {
            Some(prev) => (total - prev).norm() < rel_tol * mag,
            None => false,
        };
        last_total = Some(total);
        if tail_err < 0.1 * rel_tol * mag && settled {
            return Ok((total, err + tail_err + (tail.norm() * 1e-3).min(tail_err * 10.0)));
        }
        if panels > 2_000_000 || t > 1e15 * scale.max(1.0) {
            break;
        }
    }
    Err(Error::Quadrature {
        what: "oscillatory half-line integral",
        rel_err: f64::NAN,
    })
}

/// Returns (tail value, error estimate) for ∫_T^∞ e^{iωt} h(t) dt.
fn tail_estimate(h: &dyn Fn(f64) -> Complex64, omega: f64, t: f64, scale: f64) -> (Complex64, f64) {
    let ht = h(t);
    if ht.norm() == 0.0 {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    let half = h(0.5 * t);
    let p = (half.norm() / ht.norm()).ln() / std::f64::consts::LN_2;
    let use_ibp = omega != 0.0 && omega.abs() * t > 20.0;
    if !use_ibp {
        if p > 1.0 {
            // h ≈ C t^{−p} beyond T
            let v = ht * t / (p - 1.0) * Complex64::new(0.0, omega * t).exp();
            let e = if omega == 0.0 {
                v.norm() * 1e-2
            } else {
                v.norm()
            };
            return (if omega == 0.0 { v } else { Complex64::new(0.0, 0.0) }, e);
        }
        return (Complex64::new(0.0, 0.0), f64::INFINITY);
    }
    let d = 1e-2 * t.max(scale);
    let hp = h(t + d);
    let hm = h(t - d);
    let hp2 = h(t + 2.0 * d);
    let hm2 = h(t - 2.0 * d);
    let d1 = (hm2 - 8.0 * hm + 8.0 * hp - hp2) / (12.0 * d);
    let d2 = (-hm2 + 16.0 * hm - 30.0 * ht + 16.0 * hp - hp2) / (12.0 * d * d);
    let d3 = (-hm2 + 2.0 * hm - 2.0 * hp + hp2) / (2.0 * d * d * d);
    let iw = Complex64::new(0.0, omega);
    let phase = Complex64::new(0.0, omega * t).exp();
    let s = ht / iw - d1 / (iw * iw) + d2 / (iw * iw * iw);
    let next = (d3 / (iw * iw * iw * iw)).norm();
    (-phase * s, next + 1e-6 * (d2 / (iw * iw * iw)).norm())
}
