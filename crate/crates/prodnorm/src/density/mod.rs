//! Density evaluators for sums of products, their means and divisors.

mod cui;
mod integral;
mod series;

pub use cui::pdf_product_cui;
pub use integral::{pdf_sum_integral, pdf_sum_rho0_integral};
pub use series::{
    pdf_mean, pdf_sum_reduced, pdf_sum_rho0_series, pdf_sum_series, pdf_sum_zero_means,
    sign_and_index,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances for the series evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on the outer summation index.
    pub max_k: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_k: 400,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_k < 1 {
            return Err(Error::InvalidParams(format!("evaluation options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SeriesGeneral,
    SeriesReduced,
    ClosedForm,
    BesselSeries,
    CuiSeries,
    Integral,
    CfInversion,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SeriesGeneral => "series_general",
            Method::SeriesReduced => "series_reduced",
            Method::ClosedForm => "closed_form",
            Method::BesselSeries => "bessel_series",
            Method::CuiSeries => "cui_series",
            Method::Integral => "integral",
            Method::CfInversion => "cf_inversion",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A density value with its diagnostics. `ln_value` carries the logarithm
/// so that densities far below the smallest f64 can still be compared.
/// A value of +∞ marks the integrable singularity at x = 0 for ν ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub ln_value: f64,
    pub err_estimate: f64,
    pub terms_used: usize,
    pub method: Method,
}

impl EvalResult {
    pub(crate) fn from_ln(ln_value: f64, rel_err: f64, terms_used: usize, method: Method) -> Self {
        let value = ln_value.exp();
        Self {
            value,
            ln_value,
            err_estimate: (rel_err.abs() * value).max(0.0),
            terms_used,
            method,
        }
    }

    pub(crate) fn singular(method: Method) -> Self {
        Self {
            value: f64::INFINITY,
            ln_value: f64::INFINITY,
            err_estimate: 0.0,
            terms_used: 0,
            method,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.value.is_infinite()
    }

    /// The density of a·S at a·x given the density of S at x.
    pub(crate) fn rescaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            ln_value: self.ln_value + factor.ln(),
            err_estimate: self.err_estimate * factor,
            ..self
        }
    }
}

/// ln(e^a + e^b).
pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn ln_sum(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub(crate) fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(crate::error::domain("density", format!("x = {x} is not finite")));
    }
    Ok(())
}
