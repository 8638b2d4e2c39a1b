#![allow(dead_code)]

use std::sync::Arc;

use dampwave::fixedpoint::HullSystem;
use dampwave::lindstedt::{expand, LindstedtConfig, LindstedtSeries};
use dampwave::operators::{ModelSpec, Variant};
use dampwave::spectral::{
    BoundaryCondition, Discretization, Frequency, NonlinearitySpec, Profile, SpectralField,
    Truncation,
};
use dampwave::zeroth_order::{
    solve_U0_modelB, solve_U0_modelBprime, solve_c0, NewtonConfig, U0Config,
};
use num_complex::Complex64;

pub const CUBIC: [f64; 4] = [0.0, 1.0, 0.0, 0.1];

pub fn disc(k_theta: usize, n_x: usize) -> Arc<Discretization> {
    Discretization::new(
        1,
        Truncation::new(k_theta, n_x, BoundaryCondition::Dirichlet).unwrap(),
    )
    .unwrap()
}

/// f = 0.1 cos(2πθ) sin(πx) in the Dirichlet basis √2 sin(nπx).
pub fn benchmark_forcing(d: &Arc<Discretization>) -> SpectralField {
    let c = Complex64::new(0.05 / 2f64.sqrt(), 0.0);
    let mut f = SpectralField::zeros(d);
    f.set(&[1], 0, c).unwrap();
    f.set(&[-1], 0, c).unwrap();
    f
}

pub fn benchmark(variant: Variant, coeffs: &[f64], k_theta: usize, n_x: usize) -> ModelSpec {
    let d = disc(k_theta, n_x);
    ModelSpec::new(
        variant,
        NonlinearitySpec::polynomial(coeffs),
        benchmark_forcing(&d),
        Frequency::new(vec![1.0]).unwrap(),
    )
    .unwrap()
}

/// Hull system plus U₀ (B/B′).
pub fn system(model: &ModelSpec) -> (HullSystem, Option<SpectralField>) {
    match model.variant() {
        Variant::A | Variant::APrime => {
            let c0 = solve_c0(
                model,
                &model.forcing().theta_average(),
                &Profile::zeros(model.disc()),
                &NewtonConfig::default(),
            )
            .unwrap();
            (HullSystem::new(model, Some(&c0.c0)).unwrap(), None)
        }
        Variant::B => {
            let u0 = solve_U0_modelB(model, &U0Config::default()).unwrap().u0;
            (HullSystem::new(model, None).unwrap(), Some(u0))
        }
        Variant::BPrime => {
            let u0 = solve_U0_modelBprime(model).unwrap();
            (HullSystem::new(model, None).unwrap(), Some(u0))
        }
    }
}

pub fn series(model: &ModelSpec, order: usize) -> LindstedtSeries {
    let (sys, u0) = system(model);
    expand(&sys, u0.as_ref(), order, &LindstedtConfig::default()).unwrap()
}

/// Dirichlet eigenvalues of −Δ on [0, 1]: (nπ)², n = 1, 2, …
pub fn dirichlet_eigenvalue(index: usize) -> f64 {
    let n = (index + 1) as f64;
    (n * std::f64::consts::PI).powi(2)
}
