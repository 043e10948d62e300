//! Growth-rate optimal e-values for tests between maximum entropy models on
//! 2×k binary contingency tables.

pub mod diagnostics;
pub mod error;
pub mod evariables;
pub mod io;
pub mod models;
pub mod numerics;
pub mod priors;
pub mod scalar;

pub use error::{Error, Result};
pub use numerics::{GridDensity, LogValue, Pmf};
pub use scalar::Real;
