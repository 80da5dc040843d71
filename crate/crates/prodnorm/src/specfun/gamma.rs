//! Euler gamma function and its logarithm.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Largest argument for which `gamma` is finite.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// sin(pi x) with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r.abs() == 0.5 {
        return r.signum();
    }
    (PI * r).sin()
}

fn lanczos_sum(x: f64) -> f64 {
    let xm1 = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (xm1 + i as f64);
    }
    a
}

fn stirling_ln(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let corr = r
        * (1.0 / 12.0
            - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr
}

/// ln Γ(x) for x > 0 without error checks; the hot paths of the
/// density evaluators call this with arguments known to be positive.
pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > 30.0 {
        return stirling_ln(x);
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos sum in its accurate range
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    let t = x + LANCZOS_G - 0.5;
    HALF_LN_2PI + (x - 0.5) * t.ln() - t + lanczos_sum(x).ln()
}

/// Euler gamma function.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(crate::error::domain("gamma", "NaN argument"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole {
            function: "gamma",
            at: x,
        });
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let g = gamma(1.0 - x)?;
        return Ok(PI / (s * g));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow("gamma"));
    }
    if x > 30.0 {
        return Ok(stirling_ln(x).exp());
    }
    let t = x + LANCZOS_G - 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(x - 0.5) * (-t).exp() * lanczos_sum(x))
}

/// ln |Γ(x)|.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(crate::error::domain("ln_gamma", "NaN argument"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole {
            function: "ln_gamma",
            at: x,
        });
    }
    if x > 0.0 {
        return Ok(ln_gamma_pos(x));
    }
    Ok(PI.ln() - sin_pi(x).abs().ln() - ln_gamma_pos(1.0 - x))
}

/// Sign of Γ(x); zero at the poles.
pub fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if is_nonpositive_integer(x) {
        0.0
    } else if (x.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// 1/Γ(x), which is entire: zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x > GAMMA_MAX_ARG {
        return (-ln_gamma_pos(x)).exp();
    }
    match gamma(x) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// ln k!.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma_pos(k as f64 + 1.0)
    }
}

/// Table of ln k! for k = 0..=n, built by direct evaluation so errors do not accumulate.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    (0..=n).map(|k| ln_factorial(k as u64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn integer_and_half_integer_values() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(-0.5).unwrap(), -2.0 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(20.0).unwrap(), 121_645_100_408_832_000.0) < 1e-13);
    }

    #[test]
    fn poles_are_errors() {
        assert!(matches!(gamma(0.0), Err(Error::Pole { .. })));
        assert!(matches!(gamma(-3.0), Err(Error::Pole { .. })));
        assert!(matches!(ln_gamma(-1.0), Err(Error::Pole { .. })));
        assert_eq!(rgamma(-2.0), 0.0);
    }

    #[test]
    fn ln_gamma_matches_large_factorials() {
        // ln 100! from the exact integer, summed in a compensated loop
        let mut s = 0.0f64;
        let mut c = 0.0f64;
        for k in 2..=100u32 {
            let y = (k as f64).ln() - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        assert!(rel(ln_gamma(101.0).unwrap(), s) < 1e-15);
        assert!(matches!(gamma(200.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn sign_and_negative_arguments() {
        assert_eq!(gamma_sign(-0.5), -1.0);
        assert_eq!(gamma_sign(-1.5), 1.0);
        let g = gamma(-2.3).unwrap();
        assert!(rel(ln_gamma(-2.3).unwrap(), g.abs().ln()) < 1e-14);
        assert_eq!(gamma_sign(-2.3), g.signum());
    }
}
