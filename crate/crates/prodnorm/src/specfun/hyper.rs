//! Pochhammer symbol and the hypergeometric series used by the density formulas.

use super::bessel::ln_bessel_i;
use super::gamma::ln_gamma_pos;
use super::{SeriesValue, SpecFunOptions};
use crate::error::{domain, Error, Result};

/// Ascending factorial (u)_j = u(u+1)···(u+j−1).
pub fn pochhammer(u: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (u + i as f64))
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// ₀F₁(;b;x) with default tolerances.
pub fn hyp_0f1(b: f64, x: f64) -> Result<f64> {
    Ok(hyp_0f1_with(b, x, &SpecFunOptions::default())?.value)
}

/// ₀F₁(;b;x) by its power series.
pub fn hyp_0f1_with(b: f64, x: f64, opts: &SpecFunOptions) -> Result<SeriesValue> {
    opts.validate()?;
    if is_nonpositive_integer(b) {
        return Err(Error::Pole {
            function: "hyp_0f1",
            at: b,
        });
    }
    if !x.is_finite() || !b.is_finite() {
        return Err(domain("hyp_0f1", "non-finite argument"));
    }
    if b > 0.0 && x > 500.0 {
        let l = ln_hyp_0f1(b, x)?;
        let v = l.exp();
        if !v.is_finite() {
            return Err(Error::Overflow("hyp_0f1"));
        }
        return Ok(SeriesValue { value: v, terms: 0 });
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small_run = 0;
    for j in 0..opts.max_terms {
        let jf = j as f64;
        term *= x / ((b + jf) * (jf + 1.0));
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Overflow("hyp_0f1"));
        }
        if term.abs() < opts.rel_tol * sum.abs() + opts.abs_tol {
            small_run += 1;
            if small_run == 2 {
                return Ok(SeriesValue {
                    value: sum,
                    terms: j + 2,
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "hyp_0f1 series",
        terms: opts.max_terms,
    })
}

/// ln ₀F₁(;b;x) for b > 0, x ≥ 0, through ₀F₁(;b;x) = Γ(b) x^{(1−b)/2} I_{b−1}(2√x).
pub fn ln_hyp_0f1(b: f64, x: f64) -> Result<f64> {
    if b <= 0.0 || x < 0.0 {
        return Err(domain("ln_hyp_0f1", "requires b > 0 and x >= 0"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < 1e-3 {
        // the Bessel route loses digits to cancellation near x = 0
        return Ok(hyp_0f1(b, x)?.ln());
    }
    Ok(ln_gamma_pos(b) + 0.5 * (1.0 - b) * x.ln() + ln_bessel_i(b - 1.0, 2.0 * x.sqrt())?)
}

/// Kummer's function M(a,b,x) = ₁F₁(a;b;x) by its power series.
pub fn hyp_1f1(a: f64, b: f64, x: f64, opts: &SpecFunOptions) -> Result<SeriesValue> {
    opts.validate()?;
    if is_nonpositive_integer(b) {
        return Err(Error::Pole {
            function: "hyp_1f1",
            at: b,
        });
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small_run = 0;
    for j in 0..opts.max_terms {
        let jf = j as f64;
        term *= (a + jf) * x / ((b + jf) * (jf + 1.0));
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Overflow("hyp_1f1"));
        }
        if term == 0.0 {
            return Ok(SeriesValue {
                value: sum,
                terms: j + 2,
            });
        }
        // the ratio of successive terms tends to x/j, so only trust
        // smallness once past the turning point
        if jf > x.abs() - b && term.abs() < opts.rel_tol * sum.abs() + opts.abs_tol {
            small_run += 1;
            if small_run == 2 {
                return Ok(SeriesValue {
                    value: sum,
                    terms: j + 2,
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "hyp_1f1 series",
        terms: opts.max_terms,
    })
}

/// Σ_{j=0}^{k} C(k,j) w^j / ((u)_{k−j} (u)_j), a polynomial of degree k in w.
pub fn hyp_2f1_poly(u: f64, k: u32, w: f64) -> Result<f64> {
    if u <= 0.0 {
        return Err(domain("hyp_2f1_poly", format!("u = {u} must be positive")));
    }
    let kf = k as f64;
    let ln_poch = |j: u32| ln_gamma_pos(u + j as f64) - ln_gamma_pos(u);
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    let mut wpow = 1.0f64;
    for j in 0..=k {
        if j > 0 {
            binom *= (kf - (j - 1) as f64) / j as f64;
            wpow *= w;
        }
        let denom = if k < 150 {
            pochhammer(u, k - j) * pochhammer(u, j)
        } else {
            (ln_poch(k - j) + ln_poch(j)).exp()
        };
        sum += binom * wpow / denom;
    }
    if !sum.is_finite() {
        return Err(Error::Overflow("hyp_2f1_poly"));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert_eq!(pochhammer(1.0, 5), 120.0);
        assert_eq!(pochhammer(0.5, 3), 1.875);
    }

    #[test]
    fn hyp_0f1_values() {
        assert_eq!(hyp_0f1(2.5, 0.0).unwrap(), 1.0);
        // 0F1(;1/2;x^2/4) = cosh x
        let x: f64 = 1.7;
        assert!((hyp_0f1(0.5, x * x / 4.0).unwrap() - x.cosh()).abs() < 1e-14 * x.cosh());
        // 0F1(;3/2;-x^2/4) = sin x / x
        assert!((hyp_0f1(1.5, -x * x / 4.0).unwrap() - x.sin() / x).abs() < 1e-14);
        assert!(matches!(hyp_0f1(-2.0, 1.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn hyp_0f1_large_argument_uses_bessel_route() {
        let x = 900.0;
        let via_log = ln_hyp_0f1(1.5, x).unwrap();
        // 0F1(;3/2;x) = sinh(2 sqrt x)/(2 sqrt x)
        let r = 2.0 * f64::sqrt(x);
        let exact = r - std::f64::consts::LN_2 - r.ln() + (-(-2.0 * r).exp()).ln_1p();
        assert!((via_log - exact).abs() < 1e-13 * exact);
        assert!(((hyp_0f1(1.5, x).unwrap().ln() - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn hyp_1f1_values() {
        let o = SpecFunOptions::default();
        // M(a,a,x) = e^x, M(1,2,x) = (e^x-1)/x
        assert!((hyp_1f1(0.3, 0.3, 2.0, &o).unwrap().value - 2f64.exp()).abs() < 1e-13);
        let x: f64 = -3.0;
        let exact = (x.exp() - 1.0) / x;
        assert!((hyp_1f1(1.0, 2.0, x, &o).unwrap().value - exact).abs() < 1e-14);
        // terminating: M(-2,b,x) = 1 - 2x/b + x^2/(b(b+1))
        let (b, x) = (1.5, 0.7);
        let exact = 1.0 - 2.0 * x / b + x * x / (b * (b + 1.0));
        assert!((hyp_1f1(-2.0, b, x, &o).unwrap().value - exact).abs() < 1e-15);
    }

    #[test]
    fn hyp_2f1_poly_small_cases() {
        assert_eq!(hyp_2f1_poly(2.3, 0, 5.0).unwrap(), 1.0);
        assert!((hyp_2f1_poly(2.0, 1, 3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(hyp_2f1_poly(0.0, 1, 1.0).is_err());
    }
}
