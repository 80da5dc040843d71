//! Distribution functions by quadrature of a density, normalization checks
//! and the Kolmogorov–Smirnov statistic against simulated samples.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::montecarlo::{sample_sum, McConfig};
use crate::density::EvalResult;
use crate::error::{Error, Result};
use crate::method::{pdf, DensityMethod, MethodConfig};
use crate::params::{BivariateParams, OrderSpec};
use crate::quad::{quad_finite, quad_tail_ln, QuadOptions};

const TINY: f64 = 1e-300;

/// Uniform grid with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        let g = Self { lo, hi, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) || self.points < 2 {
            return Err(Error::InvalidParams(format!(
                "grid {}:{}:{} needs lo < hi and at least 2 points",
                self.lo, self.hi, self.points
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.hi } else { self.lo + i as f64 * h })
            .collect()
    }
}

/// Integrates a density given pointwise as an [`EvalResult`]. `spread` is a
/// length scale of the law (a standard deviation) used to place quadrature
/// nodes; `center` its mean.
pub struct DensityIntegrator<F> {
    density: F,
    center: f64,
    spread: f64,
    quad: QuadOptions,
}

impl<F> DensityIntegrator<F>
where
    F: Fn(f64) -> Result<EvalResult> + Sync,
{
    pub fn new(density: F, center: f64, spread: f64, quad: QuadOptions) -> Self {
        Self {
            density,
            center,
            spread,
            quad,
        }
    }

    /// ∫_a^∞ f(±t) dt for a ≥ 0, the sign selecting the upper or lower tail.
    /// Nodes with t < 1e-300 are dropped: near a singularity |x|^{ν−1} at 0
    /// they carry a mass of order 1e-300ν/ν, and x/(σXσY) may underflow there.
    fn tail(&self, a: f64, sign: f64) -> Result<f64> {
        let failure = RefCell::new(None);
        let ln_f = |t: f64| {
            if t < TINY {
                return f64::NEG_INFINITY;
            }
            match (self.density)(sign * t) {
                Ok(r) => r.ln_value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NEG_INFINITY
                }
            }
        };
        let reach = (sign * self.center).max(0.0) + 60.0 * self.spread;
        let r = quad_tail_ln(ln_f, a, (1e-6 * self.spread, reach), &self.quad);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(r?.value())
    }

    /// P(S > a) for a ≥ 0.
    pub fn upper_tail(&self, a: f64) -> Result<f64> {
        self.tail(a, 1.0)
    }

    /// P(S < −a) for a ≥ 0.
    pub fn lower_tail(&self, a: f64) -> Result<f64> {
        self.tail(a, -1.0)
    }

    /// Total mass ∫ f.
    pub fn mass(&self) -> Result<f64> {
        Ok(self.lower_tail(0.0)? + self.upper_tail(0.0)?)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let v = if x <= 0.0 {
            self.lower_tail(-x)?
        } else {
            1.0 - self.upper_tail(x)?
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// ∫_a^b f for a < b. Intervals with 0 as an endpoint or inside go through
    /// tail differences, since the density may be singular there.
    fn increment(&self, a: f64, b: f64) -> Result<f64> {
        if a > 0.0 || b < 0.0 {
            let failure = RefCell::new(None);
            let f = |x: f64| match (self.density)(x) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            };
            let r = quad_finite(f, a, b, &self.quad);
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            return Ok(r?.0.max(0.0));
        }
        let left = if a < 0.0 {
            (self.lower_tail(0.0)? - self.lower_tail(-a)?).max(0.0)
        } else {
            0.0
        };
        let right = if b > 0.0 {
            (self.upper_tail(0.0)? - self.upper_tail(b)?).max(0.0)
        } else {
            0.0
        };
        Ok(left + right)
    }

    /// The distribution function on a grid, non-decreasing by construction:
    /// the first value comes from a tail integral and the rest accumulate
    /// non-negative increments.
    pub fn cdf_grid(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        grid.validate()?;
        let xs = grid.values();
        let first = self.cdf(xs[0])?;
        let inc: Vec<f64> = xs
            .par_windows(2)
            .map(|w| self.increment(w[0], w[1]))
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(xs.len());
        let mut acc = first;
        out.push(acc);
        for d in inc {
            acc = (acc + d).min(1.0);
            out.push(acc);
        }
        Ok(out)
    }
}

/// Integrator for the order-ν sum with a given density method.
pub fn integrator_for<'a>(
    params: &'a BivariateParams,
    order: OrderSpec,
    method: &'a dyn DensityMethod,
    cfg: &'a MethodConfig,
) -> DensityIntegrator<impl Fn(f64) -> Result<EvalResult> + Sync + 'a> {
    let (mean, sd) = params.product_moments();
    let nu = order.nu;
    DensityIntegrator::new(
        move |x| method.evaluate(params, order, x, cfg),
        nu * mean,
        nu.sqrt() * sd,
        cfg.quad,
    )
}

/// P(S ≤ x) for the order-ν sum, from the auto density.
pub fn cdf_numeric(params: &BivariateParams, order: OrderSpec, x: f64, q: &QuadOptions) -> Result<f64> {
    params.validate()?;
    order.validate()?;
    let (mean, sd) = params.product_moments();
    let nu = order.nu;
    DensityIntegrator::new(|t| pdf(params, order, t), nu * mean, nu.sqrt() * sd, *q).cdf(x)
}

/// sup over the grid of |F_N(x) − F(x)| for sorted samples.
pub fn ks_statistic_on_grid(sorted: &[f64], xs: &[f64], cdf: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    xs.iter()
        .zip(cdf)
        .map(|(&x, &f)| {
            let below = sorted.partition_point(|&s| s <= x) as f64;
            (below / n - f).abs()
        })
        .fold(0.0, f64::max)
}

/// Critical value 1.63/√N of the KS statistic at α ≈ 0.01, widened by 1.5.
pub fn ks_bound(n_samples: usize) -> f64 {
    1.5 * 1.63 / (n_samples as f64).sqrt()
}

/// KS distance between N simulated values of S_n and the quadrature CDF,
/// taken over the grid points.
pub fn ks_check(params: &BivariateParams, n: u32, mc: &McConfig, grid: &GridSpec) -> Result<f64> {
    ks_check_against(params, params, n, mc, grid)
}

/// KS distance between samples drawn with `sampled` and the CDF computed
/// with `reference`; the two differ only in negative controls.
pub fn ks_check_against(
    sampled: &BivariateParams,
    reference: &BivariateParams,
    n: u32,
    mc: &McConfig,
    grid: &GridSpec,
) -> Result<f64> {
    let mut samples = sample_sum(sampled, n, mc)?;
    if samples.is_empty() {
        return Err(Error::InvalidParams("KS check needs at least one sample".into()));
    }
    samples.sort_by(f64::total_cmp);
    let order = OrderSpec::copies(n)?;
    let (mean, sd) = reference.product_moments();
    let nu = order.nu;
    let integ = DensityIntegrator::new(|t| pdf(reference, order, t), nu * mean, nu.sqrt() * sd, QuadOptions::default());
    let cdf = integ.cdf_grid(grid)?;
    Ok(ks_statistic_on_grid(&samples, &grid.values(), &cdf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{pdf_sum_zero_means, EvalOptions};

    #[test]
    fn grid_values() {
        let g = GridSpec::new(-3.0, 3.0, 7).unwrap();
        assert_eq!(g.values(), vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert!(GridSpec::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn laplace_cdf() {
        // ν = 2, zero means, ρ = 0: Laplace density ½e^{−|x|}
        let par = BivariateParams::new(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let o = OrderSpec { nu: 2.0 };
        let q = QuadOptions::default();
        for x in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let exact = if x <= 0.0 { 0.5 * f64::exp(x) } else { 1.0 - 0.5 * f64::exp(-x) };
            assert!((cdf_numeric(&par, o, x, &q).unwrap() - exact).abs() < 1e-10, "x={x}");
        }
        let integ = DensityIntegrator::new(|t| pdf_sum_zero_means(&par, o, t), 0.0, 2f64.sqrt(), q);
        let g = GridSpec::new(-5.0, 5.0, 41).unwrap();
        let c = integ.cdf_grid(&g).unwrap();
        for (x, v) in g.values().iter().zip(&c) {
            let exact = if *x <= 0.0 { 0.5 * x.exp() } else { 1.0 - 0.5 * (-x).exp() };
            assert!((v - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn product_cdf_limits() {
        let par = BivariateParams::new(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let o = OrderSpec { nu: 1.0 };
        let q = QuadOptions::default();
        assert!(cdf_numeric(&par, o, -50.0, &q).unwrap() < 1e-8);
        assert!((cdf_numeric(&par, o, 0.0, &q).unwrap() - 0.5).abs() < 1e-10);
        assert!((cdf_numeric(&par, o, 50.0, &q).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn generic_mass_is_one() {
        let par = BivariateParams::new(1.0, -0.5, 2.0, 0.7, 0.3).unwrap();
        let cfg = MethodConfig {
            eval: EvalOptions::default(),
            quad: QuadOptions::default(),
        };
        let m = crate::method::MethodRegistry::with_builtins().get("auto").unwrap();
        for nu in [0.5, 1.0, 3.0] {
            let mass = integrator_for(&par, OrderSpec { nu }, m.as_ref(), &cfg).mass().unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "nu={nu}: {mass}");
        }
    }
}
