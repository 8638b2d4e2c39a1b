//! Spectral representation of functions on 𝕋ᵈ × 𝒟.

pub mod basis;
pub mod field;
pub mod lattice;
pub mod nonlinearity;
pub mod norm;
pub mod ops;
pub mod params;

pub use basis::{basis_tables, SpatialBasis};
pub use field::{BasisTag, Discretization, GridField, Profile, SpectralField};
pub use nonlinearity::{NonlinearityKind, NonlinearitySpec, PolyCoeff};
pub use norm::norm;
pub use ops::{
    apply_omega_grad, compose_h, compose_h_derivative, compose_h_derivative_times, multiply,
    solve_omega_grad,
};
pub use params::{BoundaryCondition, Frequency, NormParams, Truncation};
