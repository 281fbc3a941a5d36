//! Series containers, fractional operators, ARFIMA simulation and the
//! deterministic transforms of the empirical pipeline.

mod arfima;
mod frac;
mod transform;

pub use arfima::{simulate_arfima, simulate_arfima_stream, ArfimaSpec};
pub use frac::{frac_coeffs, frac_filter, FracCoeffs, FracFilter};
pub(crate) use frac::{coeffs_derivative, coeffs_unchecked};
pub use transform::{log_and_diff, log_levels, sigma_dispersion};
