//! Long-memory estimation and fractional cointegration rank testing.
//!
//! The crate covers the semiparametric route (local and exact local Whittle
//! estimation, the X* diagnostic and the sequential common-trend rank
//! procedure built on it) and the nonparametric variance-ratio rank test
//! with a Monte Carlo engine for its critical values.

pub mod critval;
pub mod error;
pub mod hualde;
pub mod memory;
pub mod nielsen;
mod optimize;
pub mod panel;
pub mod rng;
pub mod series;
pub mod spectral;
pub mod xstar;

pub use error::{Error, Result};
pub use panel::Panel;
