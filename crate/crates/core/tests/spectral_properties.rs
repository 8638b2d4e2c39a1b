use std::sync::Arc;

use dampwave::operators::{apply_linear, invert_linear, EllipticOperator, Scaling, Variant};
use dampwave::spectral::{
    apply_omega_grad, compose_h, multiply, norm, solve_omega_grad, BasisTag, BoundaryCondition,
    Discretization, Frequency, NonlinearitySpec, NormParams, SpectralField, Truncation,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disc_for(bc: BoundaryCondition, dim: usize) -> Arc<Discretization> {
    let k = if dim == 1 { 6 } else { 3 };
    Discretization::new(dim, Truncation::new(k, 6, bc).unwrap()).unwrap()
}

/// Random field with coefficients decaying like e^{−|k|₁}/(n+1)².
fn random_field(d: &Arc<Discretization>, seed: u64, zero_average: bool) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nx = d.n_x();
    let mut coeffs = Vec::with_capacity(d.len());
    for k in d.modes() {
        let l1: i64 = k.iter().map(|c| c.abs()).sum();
        for n in 0..nx {
            let s = (-(l1 as f64)).exp() / ((n + 1) * (n + 1)) as f64;
            let c = if zero_average && l1 == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * s
            };
            coeffs.push(c);
        }
    }
    SpectralField::from_coeffs(d, coeffs, BasisTag::DeltaBasis).unwrap()
}

fn bc_strategy() -> impl Strategy<Value = BoundaryCondition> {
    prop_oneof![
        Just(BoundaryCondition::Dirichlet),
        Just(BoundaryCondition::Neumann),
        Just(BoundaryCondition::Periodic),
    ]
}

fn lambdas(d: &Arc<Discretization>) -> Vec<f64> {
    // spatial weights need λ > 0; shift the Neumann/periodic zero mode
    d.basis().eigenvalues().iter().map(|l| l + 1.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_is_a_norm(bc in bc_strategy(), dim in 1usize..=2, seed in any::<u64>(),
                      a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let d = disc_for(bc, dim);
        let p = NormParams::default();
        let l = lambdas(&d);
        let u = random_field(&d, seed, false);
        let v = random_field(&d, seed ^ 0x9e37_79b9, false);
        let nu = norm(&u, &p, &l).unwrap();
        let nv = norm(&v, &p, &l).unwrap();
        let nsum = norm(&(&u + &v), &p, &l).unwrap();
        prop_assert!(nsum <= (nu + nv) * (1.0 + 1e-10));
        let s = Complex64::new(a, b);
        let ns = norm(&u.scale(s), &p, &l).unwrap();
        prop_assert!((ns - s.norm() * nu).abs() <= 1e-10 * (s.norm() * nu).max(1e-300));
        prop_assert_eq!(norm(&SpectralField::zeros(&d), &p, &l).unwrap(), 0.0);
    }

    #[test]
    fn grid_round_trip(bc in bc_strategy(), dim in 1usize..=2, seed in any::<u64>()) {
        let d = disc_for(bc, dim);
        let u = random_field(&d, seed, false);
        let back = u.to_grid().unwrap().to_spectral();
        prop_assert!(back.max_diff(&u) <= 1e-12 * u.max_abs().max(1.0));
    }

    #[test]
    fn average_projection(bc in bc_strategy(), seed in any::<u64>()) {
        let d = disc_for(bc, 1);
        let u = random_field(&d, seed, false);
        let osc = u.oscillating_part();
        prop_assert!(osc.theta_average().max_abs() == 0.0);
        let restored = &osc + &SpectralField::from_profile(&u.theta_average());
        prop_assert!(restored.max_diff(&u) <= 1e-15);
    }

    #[test]
    fn omega_grad_right_inverse(seed in any::<u64>(), dim in 1usize..=2) {
        let d = disc_for(BoundaryCondition::Dirichlet, dim);
        let omega = if dim == 1 {
            Frequency::new(vec![1.0]).unwrap()
        } else {
            Frequency::new(vec![(1.0 + 5f64.sqrt()) / 2.0, 1.0]).unwrap()
        };
        let rhs = random_field(&d, seed, true);
        let u = solve_omega_grad(&rhs, &omega).unwrap();
        prop_assert_eq!(u.theta_average().max_abs(), 0.0);
        let back = apply_omega_grad(&u, &omega).unwrap();
        prop_assert!(back.max_diff(&rhs) <= 1e-12 * rhs.max_abs());
    }

    #[test]
    fn linear_operator_round_trip(seed in any::<u64>(), re in 0.01f64..0.2, im in -0.01f64..0.01,
                                  variant in prop_oneof![Just(Variant::A), Just(Variant::APrime),
                                                         Just(Variant::B), Just(Variant::BPrime)]) {
        let d = disc_for(BoundaryCondition::Dirichlet, 1);
        let omega = Frequency::new(vec![1.0]).unwrap();
        let shifted: Vec<f64> = d.basis().eigenvalues().iter().map(|l| l + 1.0).collect();
        let op = EllipticOperator::from_eigenvalues(&d, shifted).unwrap();
        let eps = Complex64::new(re, im);
        let u = random_field(&d, seed, false);
        let lu = apply_linear(variant, &omega, &op, eps, &u, Scaling::Raw).unwrap();
        let back = invert_linear(variant, &omega, &op, eps, &lu, 0.0).unwrap();
        prop_assert!(back.max_diff(&u) <= 1e-10 * u.max_abs());
    }
}

#[test]
fn banach_algebra_constant_holds_on_fresh_pairs() {
    let p = NormParams::default();
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Periodic] {
        let d = disc_for(bc, 1);
        let l = lambdas(&d);
        let ratio = |seed: u64| {
            let u = random_field(&d, seed, false);
            let v = random_field(&d, seed.wrapping_mul(31).wrapping_add(7), false);
            let uv = multiply(&u, &v).unwrap();
            norm(&uv, &p, &l).unwrap() / (norm(&u, &p, &l).unwrap() * norm(&v, &p, &l).unwrap())
        };
        let c = (0..100).map(ratio).fold(0.0, f64::max);
        assert!(c.is_finite() && c > 0.0);
        let violations = (1000..1100).filter(|&s| ratio(s) > 1.05 * c).count();
        assert_eq!(violations, 0, "{bc:?}: C = {c}");
    }
}

/// Spatial eigenfunction n evaluated directly, independent of the library tables.
fn phi(bc: BoundaryCondition, n: usize, x: f64) -> f64 {
    use std::f64::consts::{PI, SQRT_2};
    match bc {
        BoundaryCondition::Dirichlet => SQRT_2 * ((n + 1) as f64 * PI * x).sin(),
        BoundaryCondition::Periodic if n == 0 => 1.0,
        BoundaryCondition::Periodic => {
            let m = ((n + 1) / 2) as f64;
            if n % 2 == 1 {
                SQRT_2 * (2.0 * PI * m * x).cos()
            } else {
                SQRT_2 * (2.0 * PI * m * x).sin()
            }
        }
        BoundaryCondition::Neumann => unreachable!(),
    }
}

/// Galerkin coefficients of g(θ, x) by midpoint quadrature on a fine grid.
fn quadrature_oracle<G>(d: &Arc<Discretization>, bc: BoundaryCondition, g: G) -> SpectralField
where
    G: Fn(f64, f64) -> Complex64,
{
    use std::f64::consts::PI;
    let (nt, nxg) = (64, 96);
    let mut values = vec![Complex64::new(0.0, 0.0); nt * nxg];
    for it in 0..nt {
        for ix in 0..nxg {
            values[it * nxg + ix] = g(it as f64 / nt as f64, (ix as f64 + 0.5) / nxg as f64);
        }
    }
    let mut out = SpectralField::zeros(d);
    for (idx, k) in d.modes().iter().enumerate() {
        for n in 0..d.n_x() {
            let mut acc = Complex64::new(0.0, 0.0);
            for it in 0..nt {
                let e = Complex64::from_polar(1.0, -2.0 * PI * k[0] as f64 * it as f64 / nt as f64);
                for ix in 0..nxg {
                    acc += values[it * nxg + ix] * e * phi(bc, n, (ix as f64 + 0.5) / nxg as f64);
                }
            }
            out.row_mut(idx)[n] = acc / (nt * nxg) as f64;
        }
    }
    out
}

fn eval(w: &SpectralField, bc: BoundaryCondition, t: f64, x: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (idx, k) in w.disc().modes().iter().enumerate() {
        let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k[0] as f64 * t);
        for (n, c) in w.row(idx).iter().enumerate() {
            s += c * e * phi(bc, n, x);
        }
    }
    s
}

#[test]
fn periodic_product_matches_quadrature_oracle() {
    let bc = BoundaryCondition::Periodic;
    let d = disc_for(bc, 1);
    let u = random_field(&d, 3, false);
    let v = random_field(&d, 4, false);
    let uv = multiply(&u, &v).unwrap();
    let oracle = quadrature_oracle(&d, bc, |t, x| eval(&u, bc, t, x) * eval(&v, bc, t, x));
    assert!(uv.max_diff(&oracle) < 1e-12, "{}", uv.max_diff(&oracle));
}

#[test]
fn dirichlet_cubic_composition_matches_quadrature_oracle() {
    let bc = BoundaryCondition::Dirichlet;
    let d = disc_for(bc, 1);
    let u = random_field(&d, 5, false);
    let h = NonlinearitySpec::polynomial(&[0.0, 1.0, 0.0, 0.1]);
    let hu = compose_h(&h, &u, None).unwrap();
    let oracle = quadrature_oracle(&d, bc, |t, x| {
        let w = eval(&u, bc, t, x);
        w + 0.1 * w * w * w
    });
    assert!(hu.max_diff(&oracle) < 1e-10, "{}", hu.max_diff(&oracle));
}
