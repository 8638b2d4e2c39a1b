//! The weighted analytic-Sobolev norm ‖·‖_{ρ,j,m} in coefficient form.

use std::f64::consts::PI;

use super::field::SpectralField;
use super::lattice;
use super::params::NormParams;
use crate::error::{Error, Result};

/// B(k, ρ) = ∏ a(k_i, ρ) with a = 4π|k_i| for k_i ≠ 0 and 1/(4πρ) otherwise.
pub fn b_factor(k: &[i64], rho: f64) -> f64 {
    k.iter()
        .map(|&c| {
            if c == 0 {
                1.0 / (4.0 * PI * rho)
            } else {
                4.0 * PI * c.abs() as f64
            }
        })
        .product()
}

/// θ-part of the squared weight: e^{4π|k|ρ} ((2π)ᵈ|k|² + 1)ʲ / B(k, ρ).
pub fn theta_weight(k: &[i64], params: &NormParams) -> f64 {
    let l1 = lattice::l1(k) as f64;
    let sob = ((2.0 * PI).powi(k.len() as i32) * l1 * l1 + 1.0).powi(params.j as i32);
    (4.0 * PI * l1 * params.rho).exp() * sob / b_factor(k, params.rho)
}

/// ‖u‖_{ρ,j,m} with spatial weights λ_nᵐ. The index n of `u` must refer
/// to the eigenbasis whose eigenvalues are `lambdas`.
pub fn norm(u: &SpectralField, params: &NormParams, lambdas: &[f64]) -> Result<f64> {
    Ok(norm_squared(u, params, lambdas)?.sqrt())
}

pub fn norm_squared(u: &SpectralField, params: &NormParams, lambdas: &[f64]) -> Result<f64> {
    let disc = u.disc();
    if lambdas.len() != disc.n_x() {
        return Err(Error::Mismatch(format!(
            "{} eigenvalues for {} spatial modes",
            lambdas.len(),
            disc.n_x()
        )));
    }
    if let Some(&l1) = lambdas.iter().min_by(|a, b| a.total_cmp(b)) {
        if !(l1 > 0.0) {
            return Err(Error::H2Violation {
                lambda1: l1,
                context: "weighted norm needs positive eigenvalues".into(),
            });
        }
    }
    let spatial: Vec<f64> = lambdas.iter().map(|l| l.powi(params.m as i32)).collect();
    let mut total = 0.0;
    for (idx, k) in disc.modes().iter().enumerate() {
        let w = theta_weight(k, params);
        let row: f64 = u
            .row(idx)
            .iter()
            .zip(&spatial)
            .map(|(c, s)| s * c.norm_sqr())
            .sum();
        total += w * row;
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("weighted norm".into()));
    }
    Ok(total)
}
