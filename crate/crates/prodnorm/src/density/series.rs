//! Series representations of the density of the order-ν sum.
//!
//! Everything is computed for standardized variables (σX = σY = 1) and
//! mapped back with f(x) = f̃(x/s)/s, s = σXσY. Summands are accumulated as
//! logarithms; all of them are positive.

use std::f64::consts::{LN_2, PI};

use super::{check_x, ln_add, ln_sum, EvalOptions, EvalResult, Method};
use crate::error::{domain, Error, Result};
use crate::params::{BivariateParams, OrderSpec, RatioCase};
use crate::specfun::{ln_bessel_k, ln_gamma_pos, ln_tricomi_u, ln_tricomi_u_ladder, ln_tricomi_u_pos};

/// (sgn x, a_{j,k}(x)) with a = k − j for x ≥ 0 and a = j for x < 0.
pub fn sign_and_index(x: f64, j: usize, k: usize) -> (i32, usize) {
    assert!(j <= k, "index j = {j} exceeds k = {k}");
    let sgn = if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    };
    let a = if x >= 0.0 { k - j } else { j };
    (sgn, a)
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Stopping rule shared by the series: stop once two consecutive outer
/// terms fall below rel_tol·(partial sum) + abs_tol, past the largest term.
struct OuterSum {
    ln_rel_tol: f64,
    ln_abs_tol_scaled: f64,
    total: f64,
    peak: f64,
    last: f64,
    small_run: usize,
    terms: usize,
}

impl OuterSum {
    fn new(opts: &EvalOptions, ln_pref: f64) -> Self {
        Self {
            ln_rel_tol: opts.rel_tol.ln(),
            ln_abs_tol_scaled: if opts.abs_tol > 0.0 {
                opts.abs_tol.ln() - ln_pref
            } else {
                f64::NEG_INFINITY
            },
            total: f64::NEG_INFINITY,
            peak: f64::NEG_INFINITY,
            last: f64::NEG_INFINITY,
            small_run: 0,
            terms: 0,
        }
    }

    fn push(&mut self, s_k: f64) -> Result<bool> {
        if s_k.is_nan() || s_k == f64::INFINITY {
            return Err(domain("density series", "non-finite summand"));
        }
        self.total = ln_add(self.total, s_k);
        self.terms += 1;
        self.last = s_k;
        self.peak = self.peak.max(s_k);
        let threshold = ln_add(self.ln_rel_tol + self.total, self.ln_abs_tol_scaled);
        if s_k < threshold && s_k < self.peak {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        Ok(self.small_run >= 2)
    }

    fn tail_rel(&self) -> f64 {
        2.0 * (self.last - self.total).exp()
    }
}

/// ln of the factor shared by the general and reduced series, in
/// standardized units, including the 1/s of the change of scale.
fn ln_prefactor(mx: f64, my: f64, rho: f64, nu: f64, xt: f64, s: f64) -> f64 {
    let one_m = (1.0 - rho) * (1.0 + rho);
    let rate = (mx * mx + my * my - 2.0 * rho * mx * my) / (2.0 * one_m);
    (0.5 * nu - 1.0) * one_m.ln() - (nu - 1.0) * LN_2 - nu * rate - xt.abs() / (1.0 + rho * sgn(xt)) - s.ln()
}

/// Density of the order-ν sum by the double series in U(1−ν/2−a, 2−ν−k, z).
///
/// Each U is evaluated through Kummer's transformation as
/// z^{ν+k−1} U(ν/2+i, ν+k, z) with i = k − a, and for fixed k the values
/// i = 0..k come from one recurrence ladder.
pub fn pdf_sum_series(params: &BivariateParams, order: OrderSpec, x: f64, opts: &EvalOptions) -> Result<EvalResult> {
    params.validate()?;
    order.validate()?;
    opts.validate()?;
    check_x(x)?;
    let st = params.standardized();
    let s = params.scale();
    let nu = order.nu;
    let xt = x / s;
    if xt == 0.0 && nu <= 1.0 {
        return Ok(EvalResult::singular(Method::SeriesGeneral));
    }
    let rho = st.rho;
    let one_m = (1.0 - rho) * (1.0 + rho);
    let ln_pref = ln_prefactor(st.mx, st.my, rho, nu, xt, s);
    let (a2, b2) = st.diff_sum_sq();
    let ln_r = rho.ln_1p() - (-rho).ln_1p();
    let ca = if a2 > 0.0 { a2.ln() + ln_r } else { f64::NEG_INFINITY };
    let cb = if b2 > 0.0 { b2.ln() - ln_r } else { f64::NEG_INFINITY };
    let z = 2.0 * xt.abs() / one_m;
    let ln_z = z.ln();
    let positive = xt >= 0.0;
    let ln_nu8 = (nu / 8.0).ln();
    let half = 0.5 * nu;

    let mut acc = OuterSum::new(opts, ln_pref);
    let mut discrepancy = 0.0f64;
    let mut ln_fact = vec![0.0f64];
    let mut converged = false;
    let mut logs: Vec<f64> = Vec::new();
    for k in 0..=opts.max_k {
        if k > 0 {
            ln_fact.push(ln_gamma_pos(k as f64 + 1.0));
        }
        let kf = k as f64;
        let (j_lo, j_hi) = match (a2 > 0.0, b2 > 0.0) {
            (false, false) => {
                if k > 0 {
                    converged = true;
                    break;
                }
                (0, 0)
            }
            (false, true) => (0, 0),
            (true, false) => (k, k),
            (true, true) => (0, k),
        };
        let index = |j: usize| if positive { j } else { k - j };
        // ln U(ν/2+i, ν+k, z) + (ν+k−1) ln z, or its z → 0 limit
        let ln_zu: Vec<f64> = if z == 0.0 {
            (0..=k)
                .map(|i| ln_gamma_pos(nu + kf - 1.0) - ln_gamma_pos(half + i as f64))
                .collect()
        } else if j_lo == j_hi {
            let i = index(j_lo);
            let mut v = vec![f64::NAN; k + 1];
            v[i] = (nu + kf - 1.0) * ln_z + ln_tricomi_u_pos(half + i as f64, nu + kf, z)?;
            v
        } else {
            let lad = ln_tricomi_u_ladder(half, k, nu + kf, z)?;
            discrepancy = discrepancy.max(lad.discrepancy);
            lad.ln_u.into_iter().map(|l| l + (nu + kf - 1.0) * ln_z).collect()
        };
        logs.clear();
        for j in j_lo..=j_hi {
            let i = index(j);
            let mut t = kf * ln_nu8 - ln_fact[k] + ln_fact[k] - ln_fact[j] - ln_fact[k - j];
            if j > 0 {
                t += j as f64 * ca;
            }
            if k > j {
                t += (k - j) as f64 * cb;
            }
            t += -ln_gamma_pos(half + (k - i) as f64) + ln_zu[i];
            if t.is_nan() {
                return Err(domain("pdf_sum_series", format!("non-finite summand at (j, k) = ({j}, {k})")));
            }
            logs.push(t);
        }
        let s_k = ln_sum(logs.iter().copied());
        if acc.push(s_k)? {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "density series (raise max_k)",
            terms: opts.max_k + 1,
        });
    }
    let ln_value = ln_pref + acc.total;
    let rel = acc.tail_rel() + discrepancy + 1e-15 * (1.0 + ln_pref.abs() + acc.total.abs());
    Ok(EvalResult::from_ln(ln_value, rel, acc.terms, Method::SeriesGeneral))
}

/// Density of the mean of n copies: n·f_{S_n}(n x).
pub fn pdf_mean(params: &BivariateParams, n: u32, x: f64, opts: &EvalOptions) -> Result<EvalResult> {
    if n == 0 {
        return Err(Error::InvalidParams("number of copies n must be at least 1".into()));
    }
    let nf = n as f64;
    Ok(pdf_sum_series(params, OrderSpec { nu: nf }, nf * x, opts)?.rescaled(nf))
}

/// Single-series form valid when μX/σX = ±μY/σY.
pub fn pdf_sum_reduced(params: &BivariateParams, order: OrderSpec, x: f64, opts: &EvalOptions) -> Result<EvalResult> {
    params.validate()?;
    order.validate()?;
    opts.validate()?;
    check_x(x)?;
    let st = params.standardized();
    let case = st.ratio_case();
    if case == RatioCase::Generic {
        return Err(Error::Precondition(
            "reduced series needs mu_x/sigma_x = ±mu_y/sigma_y".into(),
        ));
    }
    let s = params.scale();
    let nu = order.nu;
    let xt = x / s;
    if xt == 0.0 && nu <= 1.0 {
        return Ok(EvalResult::singular(Method::SeriesReduced));
    }
    let rho = st.rho;
    let one_m = (1.0 - rho) * (1.0 + rho);
    let m = st.mx;
    let my = if case == RatioCase::Opposite { -m } else { m };
    let ln_pref = ln_prefactor(m, my, rho, nu, xt, s);
    let z = 2.0 * xt.abs() / one_m;
    let positive = xt >= 0.0;
    let half = 0.5 * nu;
    let equal = case != RatioCase::Opposite;
    let ln_ratio = if equal {
        (-rho).ln_1p() - rho.ln_1p()
    } else {
        rho.ln_1p() - (-rho).ln_1p()
    };
    let ln_m2 = if m != 0.0 { 2.0 * m.abs().ln() } else { f64::NEG_INFINITY };

    let mut acc = OuterSum::new(opts, ln_pref);
    let mut converged = false;
    for k in 0..=opts.max_k {
        if k > 0 && m == 0.0 {
            converged = true;
            break;
        }
        let kf = k as f64;
        let a = match (equal, positive) {
            (true, true) | (false, false) => kf,
            _ => 0.0,
        };
        let ln_u = if z == 0.0 {
            ln_gamma_pos(nu + kf - 1.0) - ln_gamma_pos(half + kf - a)
        } else {
            ln_tricomi_u(1.0 - half - a, 2.0 - nu - kf, z)?
        };
        let mut t = -ln_gamma_pos(kf + 1.0) - ln_gamma_pos(half + a) + ln_u;
        if k > 0 {
            t += kf * ((0.5 * nu).ln() + ln_m2 + ln_ratio);
        }
        if acc.push(t)? {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "reduced density series (raise max_k)",
            terms: opts.max_k + 1,
        });
    }
    let rel = acc.tail_rel() + 1e-15 * (1.0 + ln_pref.abs() + acc.total.abs());
    Ok(EvalResult::from_ln(ln_pref + acc.total, rel, acc.terms, Method::SeriesReduced))
}

/// Closed form for μX = μY = 0 in terms of K_{(ν−1)/2}:
/// f(x) = 2^{(1−ν)/2} |x|^{(ν−1)/2} e^{ρx/(s(1−ρ²))} K_{(ν−1)/2}(|x|/(s(1−ρ²)))
///        / (s^{(ν+1)/2} √(π(1−ρ²)) Γ(ν/2)).
pub fn pdf_sum_zero_means(params: &BivariateParams, order: OrderSpec, x: f64) -> Result<EvalResult> {
    params.validate()?;
    order.validate()?;
    check_x(x)?;
    if params.mu_x != 0.0 || params.mu_y != 0.0 {
        return Err(domain("pdf_sum_zero_means", "both means must be zero"));
    }
    let nu = order.nu;
    let s = params.scale();
    let xt = x / s;
    let rho = params.rho;
    let one_m = (1.0 - rho) * (1.0 + rho);
    let mu = 0.5 * (nu - 1.0);
    let base = 0.5 * (1.0 - nu) * LN_2 - 0.5 * (PI * one_m).ln() - ln_gamma_pos(0.5 * nu) - s.ln();
    if xt == 0.0 {
        if nu <= 1.0 {
            return Ok(EvalResult::singular(Method::ClosedForm));
        }
        // |x|^μ K_μ(|x|/(1−ρ²)) → (1−ρ²)^μ 2^{μ−1} Γ(μ)
        let l = base + mu * one_m.ln() + (mu - 1.0) * LN_2 + ln_gamma_pos(mu);
        return Ok(EvalResult::from_ln(l, 1e-15, 1, Method::ClosedForm));
    }
    let w = xt.abs() / one_m;
    let l = base + mu * xt.abs().ln() + rho * xt / one_m + ln_bessel_k(mu, w)?;
    Ok(EvalResult::from_ln(l, 1e-14, 1, Method::ClosedForm))
}

/// Bessel-K series for ρ = 0, μY = 0:
/// f̃(x) = 2^{(1−ν)/2} e^{−νm²/2}/√π Σ_k (νm²/4)^k |x|^{(ν−1)/2+k} K_{(ν−1)/2+k}(|x|)/(k! Γ(ν/2+k)).
pub fn pdf_sum_rho0_series(params: &BivariateParams, order: OrderSpec, x: f64, opts: &EvalOptions) -> Result<EvalResult> {
    params.validate()?;
    order.validate()?;
    opts.validate()?;
    check_x(x)?;
    if params.rho != 0.0 || params.mu_y != 0.0 {
        return Err(Error::Precondition("Bessel-K series needs rho = 0 and mu_y = 0".into()));
    }
    let nu = order.nu;
    let s = params.scale();
    let xt = (x / s).abs();
    if xt == 0.0 && nu <= 1.0 {
        return Ok(EvalResult::singular(Method::BesselSeries));
    }
    let m = params.mu_x / params.sigma_x;
    let mu0 = 0.5 * (nu - 1.0);
    let ln_pref = 0.5 * (1.0 - nu) * LN_2 - 0.5 * nu * m * m - 0.5 * PI.ln() - s.ln();
    let ln_c = if m != 0.0 { (0.25 * nu * m * m).ln() } else { f64::NEG_INFINITY };
    let ln_x = xt.ln();

    let mut acc = OuterSum::new(opts, ln_pref);
    let mut converged = false;
    // ln K_{μ0+k}(x) by upward recurrence of the ratios K_{μ+1}/K_μ
    let mut ln_k = if xt > 0.0 { ln_bessel_k(mu0, xt)? } else { 0.0 };
    let mut ratio = if xt > 0.0 { (ln_bessel_k(mu0 + 1.0, xt)? - ln_k).exp() } else { 0.0 };
    for k in 0..=opts.max_k {
        if k > 0 && m == 0.0 {
            converged = true;
            break;
        }
        let kf = k as f64;
        let order_k = mu0 + kf;
        let ln_xk = if xt == 0.0 {
            (order_k - 1.0) * LN_2 + ln_gamma_pos(order_k)
        } else {
            if k > 0 {
                ln_k += ratio.ln();
                ratio = 1.0 / ratio + 2.0 * (order_k) / xt;
            }
            order_k * ln_x + ln_k
        };
        let mut t = ln_xk - ln_gamma_pos(kf + 1.0) - ln_gamma_pos(0.5 * nu + kf);
        if k > 0 {
            t += kf * ln_c;
        }
        if acc.push(t)? {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "Bessel-K density series (raise max_k)",
            terms: opts.max_k + 1,
        });
    }
    let rel = acc.tail_rel() + 1e-14 * (1.0 + acc.total.abs());
    Ok(EvalResult::from_ln(ln_pref + acc.total, rel, acc.terms, Method::BesselSeries))
}
