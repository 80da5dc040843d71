//! A fixed battery of cross-checks for one parameter set.

use serde::{Deserialize, Serialize};

use super::{check_int1, check_int11, integrator_for, ks_bound, ks_check, mean_and_stderr, pdf_cf_inversion, sample_sum};
use super::{GridSpec, McConfig};
use crate::density::{pdf_sum_integral, pdf_sum_series};
use crate::divisibility::{pdf_divisor, verify_divisibility_cf};
use crate::error::Result;
use crate::method::{MethodConfig, MethodRegistry};
use crate::params::{BivariateParams, OrderSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub params: BivariateParams,
    pub order: OrderSpec,
    pub divisibility_m: u32,
    pub mc: McConfig,
    pub methods: MethodConfig,
    /// Replaces every check's own tolerance when set.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    /// The measured deviation, or NaN when the check could not run.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Runs every check; a check that errors is reported as failed with the
/// error text and does not stop the others.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let p = &cfg.params;
    p.validate()?;
    cfg.order.validate()?;
    let s = p.scale();
    let nu = cfg.order.nu;
    let mcfg = &cfg.methods;
    let mut checks = Vec::new();
    let mut record = |name: &str, tol: f64, detail: String, r: Result<f64>| {
        let tol = cfg.tolerance.unwrap_or(tol);
        let (value, passed, detail) = match r {
            Ok(v) => (v, v <= tol, detail),
            Err(e) => (f64::NAN, false, e.to_string()),
        };
        checks.push(CheckOutcome {
            name: name.to_string(),
            value,
            tolerance: tol,
            passed,
            detail,
        });
    };

    let xs: Vec<f64> = [-2.0, -0.5, 0.7, 2.5].iter().map(|v| v * s).collect();
    let series_vs = |other: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let mut worst = 0.0f64;
        for &x in &xs {
            let a = pdf_sum_series(p, cfg.order, x, &mcfg.eval)?.value;
            worst = worst.max(rel(other(x)?, a));
        }
        Ok(worst)
    };
    record(
        "series_vs_integral",
        1e-7,
        "max relative difference at 4 points".into(),
        series_vs(&|x| Ok(pdf_sum_integral(p, cfg.order, x, &mcfg.quad)?.value)),
    );
    if nu >= 2.0 {
        record(
            "series_vs_cf_inversion",
            1e-5,
            "max relative difference at 4 points".into(),
            series_vs(&|x| Ok(pdf_cf_inversion(p, cfg.order, x, &mcfg.quad)?.value)),
        );
    }

    let registry = MethodRegistry::with_builtins();
    let auto = registry.get("auto")?;
    record(
        "normalization",
        1e-6,
        format!("|total mass - 1| at order {nu}"),
        integrator_for(p, cfg.order, auto.as_ref(), mcfg).mass().map(|m| (m - 1.0).abs()),
    );

    let m = cfg.divisibility_m;
    let t: Vec<f64> = (0..101).map(|i| (-20.0 + 0.4 * i as f64) / s).collect();
    record(
        "divisibility_cf",
        1e-12,
        format!("max |phi_(1/{m})^{m} - phi_1| over 101 points"),
        verify_divisibility_cf(p, m, &t),
    );
    let negative = (|| -> Result<f64> {
        let mut count = 0usize;
        for i in 0..201 {
            let x = (-10.0 + 0.1 * i as f64) * s;
            let v = pdf_divisor(p, m, x, &mcfg.eval)?.value;
            if !(v >= 0.0) {
                count += 1;
            }
        }
        Ok(count as f64)
    })();
    record(
        "divisor_nonnegative",
        0.0,
        format!("number of negative divisor densities (m = {m}) over 201 points"),
        negative,
    );

    record(
        "int1",
        1e-6,
        "relative difference of both sides at (1.5, 1, 1, 1, 0.7)".into(),
        check_int1(1.5, 1.0, 1.0, 1.0, 0.7).map(|(l, r)| (l - r).norm() / r.norm()),
    );
    record(
        "int11",
        1e-8,
        "max relative difference of the three forms at (2.5, 0.6)".into(),
        check_int11(2.5, 0.6).map(|(l, w, b)| rel(l, b).max(rel(w, b))),
    );

    if cfg.mc.n_samples > 1 {
        let n = nu.round().max(1.0) as u32;
        let (mean, sd) = p.product_moments();
        let nf = n as f64;
        let grid = GridSpec::new(nf * mean - 8.0 * nf.sqrt() * sd, nf * mean + 8.0 * nf.sqrt() * sd, 201)?;
        record(
            "ks",
            ks_bound(cfg.mc.n_samples),
            format!("KS distance of {} samples of {n} copies", cfg.mc.n_samples),
            ks_check(p, n, &cfg.mc, &grid),
        );
        record(
            "sample_mean",
            4.0,
            "standard errors between sample mean and n(mu_x mu_y + rho sigma_x sigma_y)".into(),
            sample_sum(p, n, &cfg.mc).map(|v| {
                let (m, se) = mean_and_stderr(&v);
                (m - nf * mean).abs() / se
            }),
        );
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { checks, passed })
}
