//! Model-dependent linear operators, spectral bounds, ε-domains and
//! resonances.

pub mod domain;
pub mod elliptic;
pub mod gamma;
pub mod linear;
pub mod model;
pub mod resonance;

pub use domain::{in_domain, DomainSpec};
pub use elliptic::{EllipticOperator, OperatorSource, SpectrumReport};
pub use gamma::{gamma_lower_bound, GammaBound};
pub use linear::{
    apply_linear, conditioning, invert_linear, multiplier, Conditioning, Scaling,
    DEFAULT_MULTIPLIER_FLOOR,
};
pub use model::{ModelSpec, Variant};
pub use resonance::{resonance_locations, Resonance, ResonanceList};
