//! Real-parameter special functions: Γ, I_ν, K_ν, U(a,b,x), W_{κ,μ}, ₀F₁, ₁F₁.

mod bessel;
mod gamma;
mod hyper;
mod tricomi;

pub use bessel::{
    bessel_i, bessel_i_scaled, bessel_i_series_with, bessel_k, bessel_k_scaled, bessel_k_with,
    ln_bessel_i, ln_bessel_k,
};
pub use gamma::{gamma, gamma_sign, ln_factorial, ln_gamma, rgamma, GAMMA_MAX_ARG};
pub use hyper::{hyp_0f1, hyp_0f1_with, hyp_1f1, hyp_2f1_poly, ln_hyp_0f1, pochhammer};
pub use tricomi::{
    ln_tricomi_u, ln_tricomi_u_ladder, tricomi_u, tricomi_u_by_definition, whittaker_w, ULadder,
};

pub(crate) use bessel::ln_bessel_i_fast;
pub(crate) use gamma::{ln_factorials, ln_gamma_pos};
pub(crate) use tricomi::ln_tricomi_u_pos;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budgets for the series and quadratures in this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecFunOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
    pub quad_points: usize,
}

impl Default for SpecFunOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-17,
            abs_tol: 0.0,
            max_terms: 100_000,
            quad_points: 8192,
        }
    }
}

impl SpecFunOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_terms < 1 || self.quad_points < 8 {
            return Err(Error::InvalidParams(format!("special-function options {self:?}")));
        }
        Ok(())
    }
}

/// A value produced by a truncated series or a quadrature, with the number
/// of terms or nodes it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
}
