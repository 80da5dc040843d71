//! Reproducible simulation of S_n = Σ XᵢYᵢ.
//!
//! Sample i draws its normals from a ChaCha8 stream seeded with `seed` and
//! positioned at word 4n·i, so every sample is a pure function of
//! (params, n, seed, i) whatever the batch size or thread count. Normals
//! come from the Box–Muller transform on 53-bit uniforms in (0, 1].

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::BivariateParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Samples per parallel work unit.
    pub batch: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 0x5eed,
            batch: 4096,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 {
            return Err(Error::InvalidParams("Monte Carlo batch size must be positive".into()));
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = uniform(rng);
    let u2 = uniform(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

fn one_sample(params: &BivariateParams, n: u32, seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * 4 * n as u128);
    let c = (1.0 - params.rho * params.rho).sqrt();
    (0..n)
        .map(|_| {
            let (g1, g2) = normal_pair(&mut rng);
            let x = params.mu_x + params.sigma_x * g1;
            let y = params.mu_y + params.sigma_y * (params.rho * g1 + c * g2);
            x * y
        })
        .sum()
}

/// N samples of the sum of n independent copies of XY.
pub fn sample_sum(params: &BivariateParams, n: u32, mc: &McConfig) -> Result<Vec<f64>> {
    params.validate()?;
    mc.validate()?;
    if n == 0 {
        return Err(Error::InvalidParams("number of copies n must be at least 1".into()));
    }
    let mut out = vec![0.0; mc.n_samples];
    out.par_chunks_mut(mc.batch).enumerate().for_each(|(b, chunk)| {
        let start = (b * mc.batch) as u64;
        for (i, v) in chunk.iter_mut().enumerate() {
            *v = one_sample(params, n, mc.seed, start + i as u64);
        }
    });
    Ok(out)
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
