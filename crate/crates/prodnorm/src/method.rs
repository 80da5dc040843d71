//! Density evaluators behind a common trait, looked up by name at run time.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::{
    pdf_product_cui, pdf_sum_integral, pdf_sum_reduced, pdf_sum_rho0_integral, pdf_sum_rho0_series, pdf_sum_series,
    pdf_sum_zero_means, EvalOptions, EvalResult,
};
use crate::error::{Error, Result};
use crate::params::{BivariateParams, OrderSpec, RatioCase};
use crate::quad::QuadOptions;
use crate::verify::pdf_cf_inversion;

/// Below this multiple of σXσY the auto method prefers the series, whose
/// terms stay finite at x = 0, over the integral form.
pub const SERIES_BAND: f64 = 0.01;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub eval: EvalOptions,
    pub quad: QuadOptions,
}

pub trait DensityMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn evaluate(&self, params: &BivariateParams, order: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult>;
}

struct Series;
struct Reduced;
struct Closed;
struct BesselSeries;
struct Cui;
struct Integral;
struct Rho0Integral;
struct CfInversion;
struct Auto;

impl DensityMethod for Series {
    fn name(&self) -> &'static str {
        "series"
    }
    fn description(&self) -> &'static str {
        "double series in Tricomi U functions, any parameters"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
        pdf_sum_series(p, o, x, &cfg.eval)
    }
}

impl DensityMethod for Reduced {
    fn name(&self) -> &'static str {
        "reduced"
    }
    fn description(&self) -> &'static str {
        "single U series when mu_x/sigma_x = ±mu_y/sigma_y"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
        pdf_sum_reduced(p, o, x, &cfg.eval)
    }
}

impl DensityMethod for Closed {
    fn name(&self) -> &'static str {
        "closed"
    }
    fn description(&self) -> &'static str {
        "Bessel-K closed form for zero means"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, _: &MethodConfig) -> Result<EvalResult> {
        if p.mu_x != 0.0 || p.mu_y != 0.0 {
            return Err(Error::Precondition("closed form needs mu_x = mu_y = 0".into()));
        }
        pdf_sum_zero_means(p, o, x)
    }
}

impl DensityMethod for BesselSeries {
    fn name(&self) -> &'static str {
        "bessel-series"
    }
    fn description(&self) -> &'static str {
        "Bessel-K series for rho = 0 and one zero mean"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
        pdf_sum_rho0_series(&rho0_orientation(p)?, o, x, &cfg.eval)
    }
}

impl DensityMethod for Cui {
    fn name(&self) -> &'static str {
        "cui"
    }
    fn description(&self) -> &'static str {
        "double K-Bessel series for a single product (order 1 only)"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
        if o.nu != 1.0 {
            return Err(Error::Precondition(format!("the product K-series needs order 1, got {}", o.nu)));
        }
        pdf_product_cui(p, x, &cfg.eval)
    }
}

impl DensityMethod for Integral {
    fn name(&self) -> &'static str {
        "integral"
    }
    fn description(&self) -> &'static str {
        "integral of two Bessel-I factors, x != 0"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
        pdf_sum_integral(p, o, x, &cfg.quad)
    }
}

impl DensityMethod for Rho0Integral {
    fn name(&self) -> &'static str {
        "rho0-integral"
    }
    fn description(&self) -> &'static str {
        "integral with a 0F1 kernel for rho = 0 and one zero mean, x != 0"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
        pdf_sum_rho0_integral(&rho0_orientation(p)?, o, x, &cfg.quad)
    }
}

impl DensityMethod for CfInversion {
    fn name(&self) -> &'static str {
        "cf"
    }
    fn description(&self) -> &'static str {
        "Fourier inversion of the characteristic function, order >= 2"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
        pdf_cf_inversion(p, o, x, &cfg.quad)
    }
}

/// XY is symmetric in X and Y, so ρ = 0 with μX = 0 is handled by swapping.
fn rho0_orientation(p: &BivariateParams) -> Result<BivariateParams> {
    if p.rho != 0.0 {
        return Err(Error::Precondition("needs rho = 0".into()));
    }
    if p.mu_y == 0.0 {
        Ok(*p)
    } else if p.mu_x == 0.0 {
        Ok(p.swapped())
    } else {
        Err(Error::Precondition("needs mu_x = 0 or mu_y = 0".into()))
    }
}

impl DensityMethod for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }
    fn description(&self) -> &'static str {
        "closed form, reduced or Bessel series where they apply, otherwise series near 0 and the integral elsewhere"
    }
    fn evaluate(&self, p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
        p.validate()?;
        o.validate()?;
        let case = p.standardized().ratio_case();
        if p.mu_x == 0.0 && p.mu_y == 0.0 {
            return pdf_sum_zero_means(p, o, x);
        }
        let near_zero = x.abs() < SERIES_BAND * p.scale();
        if case != RatioCase::Generic {
            match pdf_sum_reduced(p, o, x, &cfg.eval) {
                Err(Error::NonConvergence { .. }) if !near_zero => {}
                other => return other,
            }
        } else if let Ok(q) = rho0_orientation(p) {
            match pdf_sum_rho0_series(&q, o, x, &cfg.eval) {
                Err(Error::NonConvergence { .. }) if !near_zero => {}
                other => return other,
            }
        }
        if near_zero {
            return series_with_growing_cap(p, o, x, cfg);
        }
        pdf_sum_integral(p, o, x, &cfg.quad)
    }
}

/// The general series, retried with a larger cap on k when the Poisson
/// weight of the means pushes the peak term past the configured cap.
fn series_with_growing_cap(p: &BivariateParams, o: OrderSpec, x: f64, cfg: &MethodConfig) -> Result<EvalResult> {
    let mut eval = cfg.eval;
    let limit = eval.max_k.saturating_mul(16);
    loop {
        match pdf_sum_series(p, o, x, &eval) {
            Err(Error::NonConvergence { .. }) if eval.max_k < limit => eval.max_k *= 4,
            other => return other,
        }
    }
}

/// Named density methods. Lookup is by exact name; registration order is
/// kept for listings.
#[derive(Clone, Default)]
pub struct MethodRegistry {
    methods: Vec<Arc<dyn DensityMethod>>,
}

impl MethodRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        let builtins: [Arc<dyn DensityMethod>; 9] = [
            Arc::new(Auto),
            Arc::new(Series),
            Arc::new(Reduced),
            Arc::new(Closed),
            Arc::new(BesselSeries),
            Arc::new(Cui),
            Arc::new(Integral),
            Arc::new(Rho0Integral),
            Arc::new(CfInversion),
        ];
        for m in builtins {
            r.register(m).expect("builtin names are distinct");
        }
        r
    }

    pub fn register(&mut self, method: Arc<dyn DensityMethod>) -> Result<()> {
        if self.methods.iter().any(|m| m.name() == method.name()) {
            return Err(Error::InvalidParams(format!("method '{}' is already registered", method.name())));
        }
        self.methods.push(method);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn DensityMethod>> {
        self.methods
            .iter()
            .find(|m| m.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.iter().map(|m| m.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn DensityMethod>> {
        self.methods.iter()
    }
}

impl std::fmt::Debug for MethodRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

/// Density by the auto method with default settings.
pub fn pdf(params: &BivariateParams, order: OrderSpec, x: f64) -> Result<EvalResult> {
    Auto.evaluate(params, order, x, &MethodConfig::default())
}
