//! Exact densities of products of correlated normal variables, of sums and
//! means of independent copies, and of the fractional-order divisors that
//! make the product law infinitely divisible.

pub mod charfun;
pub mod density;
pub mod divisibility;
pub mod error;
pub mod method;
pub mod params;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use charfun::{cf_order, partial_fraction_terms, ComplexValue, PartialFractions};
pub use density::{EvalOptions, EvalResult, Method};
pub use error::{Error, Result};
pub use method::{pdf, DensityMethod, MethodConfig, MethodRegistry};
pub use params::{BivariateParams, OrderSpec};
pub use quad::QuadOptions;
pub use verify::{GridSpec, McConfig};
