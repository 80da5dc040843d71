//! Independent checks: characteristic-function inversion, simulation,
//! distribution functions and two Fourier integrals with closed forms.

mod kernels;
mod cdf;
mod inversion;
mod montecarlo;
mod suite;

pub use kernels::{check_int1, check_int11};
pub use cdf::{
    cdf_numeric, integrator_for, ks_bound, ks_check, ks_check_against, ks_statistic_on_grid, DensityIntegrator,
    GridSpec,
};
pub use inversion::pdf_cf_inversion;
pub use montecarlo::{mean_and_stderr, sample_sum, McConfig};
pub use suite::{run_suite, CheckOutcome, SuiteConfig, SuiteReport};
