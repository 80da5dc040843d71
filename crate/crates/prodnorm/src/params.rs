//! Parameters of the bivariate normal vector and the convolution order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// (μX, μY, σX, σY, ρ) of the bivariate normal vector (X, Y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateParams {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
}

impl BivariateParams {
    pub fn new(mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64, rho: f64) -> Result<Self> {
        let p = Self {
            mu_x,
            mu_y,
            sigma_x,
            sigma_y,
            rho,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu_x, self.mu_y, self.sigma_x, self.sigma_y, self.rho];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if !(self.sigma_x > 0.0) || !(self.sigma_y > 0.0) {
            return Err(Error::InvalidParams("standard deviations must be positive".into()));
        }
        if self.rho.abs() >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "rho = {} must lie strictly inside (-1, 1); at rho = ±1 the product is a \
                 scaled non-central chi-square variable, which is infinitely divisible \
                 but not handled here",
                self.rho
            )));
        }
        Ok(())
    }

    /// σX·σY, the natural scale of the product.
    pub fn scale(&self) -> f64 {
        self.sigma_x * self.sigma_y
    }

    /// Means in units of their own standard deviations.
    pub fn standardized(&self) -> Standardized {
        Standardized {
            mx: self.mu_x / self.sigma_x,
            my: self.mu_y / self.sigma_y,
            rho: self.rho,
        }
    }

    /// Same law for −XY: (ρ, μY) → (−ρ, −μY).
    pub fn reflected(&self) -> Self {
        Self {
            mu_y: -self.mu_y,
            rho: -self.rho,
            ..*self
        }
    }

    /// XY is symmetric in the roles of X and Y.
    pub fn swapped(&self) -> Self {
        Self {
            mu_x: self.mu_y,
            mu_y: self.mu_x,
            sigma_x: self.sigma_y,
            sigma_y: self.sigma_x,
            rho: self.rho,
        }
    }

    /// Mean and standard deviation of XY.
    pub fn product_moments(&self) -> (f64, f64) {
        let (mx, my, sx, sy, r) = (self.mu_x, self.mu_y, self.sigma_x, self.sigma_y, self.rho);
        let mean = mx * my + r * sx * sy;
        let var = mx * mx * sy * sy + my * my * sx * sx + sx * sx * sy * sy * (1.0 + r * r)
            + 2.0 * r * mx * my * sx * sy;
        (mean, var.sqrt())
    }
}

/// Means divided by standard deviations, with σX = σY = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardized {
    pub mx: f64,
    pub my: f64,
    pub rho: f64,
}

impl Standardized {
    /// (μX − μY)², (μX + μY)².
    pub fn diff_sum_sq(&self) -> (f64, f64) {
        let d = self.mx - self.my;
        let s = self.mx + self.my;
        (d * d, s * s)
    }

    /// (μX² + μY² − 2ρμXμY)/(2(1−ρ²)), the Poisson rate per unit order.
    pub fn rate(&self) -> f64 {
        (self.mx * self.mx + self.my * self.my - 2.0 * self.rho * self.mx * self.my)
            / (2.0 * (1.0 - self.rho * self.rho))
    }
}

/// Which single-series reduction applies to a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioCase {
    /// μX/σX and μY/σY are both zero.
    ZeroMeans,
    /// μX/σX = μY/σY.
    Equal,
    /// μX/σX = −μY/σY.
    Opposite,
    /// |μX|/σX ≠ |μY|/σY.
    Generic,
}

/// Relative tolerance for deciding μX/σX = ±μY/σY.
pub const RATIO_TOL: f64 = 1e-12;

impl Standardized {
    pub fn ratio_case(&self) -> RatioCase {
        let tol = RATIO_TOL * self.mx.abs().max(1.0);
        let eq = (self.mx - self.my).abs() < tol;
        let opp = (self.mx + self.my).abs() < tol;
        match (eq, opp) {
            (true, true) => RatioCase::ZeroMeans,
            (true, false) => RatioCase::Equal,
            (false, true) => RatioCase::Opposite,
            (false, false) => RatioCase::Generic,
        }
    }
}

/// Convolution order ν > 0: ν = n is the sum of n independent copies,
/// ν = 1/m is the m-th divisor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderSpec {
    pub nu: f64,
}

impl OrderSpec {
    pub fn new(nu: f64) -> Result<Self> {
        let o = Self { nu };
        o.validate()?;
        Ok(o)
    }

    pub fn copies(n: u32) -> Result<Self> {
        Self::new(n as f64)
    }

    pub fn divisor(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("divisor index m must be at least 1".into()));
        }
        Self::new(1.0 / m as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::InvalidParams(format!("order nu = {} must be positive", self.nu)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(BivariateParams::new(0.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(BivariateParams::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(BivariateParams::new(f64::NAN, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(OrderSpec::new(0.0).is_err());
        assert!(OrderSpec::divisor(0).is_err());
        assert_eq!(OrderSpec::divisor(4).unwrap().nu, 0.25);
    }

    #[test]
    fn ratio_cases() {
        let c = |mx, my| {
            BivariateParams::new(mx, my, 2.0, 1.0, 0.3)
                .unwrap()
                .standardized()
                .ratio_case()
        };
        assert_eq!(c(0.0, 0.0), RatioCase::ZeroMeans);
        assert_eq!(c(1.0, 0.5), RatioCase::Equal);
        assert_eq!(c(1.0, -0.5), RatioCase::Opposite);
        assert_eq!(c(1.0, 0.4), RatioCase::Generic);
    }
}
