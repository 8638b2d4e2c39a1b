//! Quasi-periodic response solutions of strongly damped, quasi-periodically
//! forced wave equations.

pub mod error;
pub mod explorer;
pub mod fixedpoint;
pub mod lindstedt;
pub mod operators;
pub mod spectral;
pub mod zeroth_order;

pub use error::{Error, Result};
